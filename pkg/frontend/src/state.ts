/** Revision-gated session state. Responses can arrive out of order; the
 * store only ever moves forward, so a stale response (lower revision of the
 * same session) is discarded instead of overwriting newer data. */

import type { Summary } from "./types.js";

export interface SummaryStore {
  /** Adopt the summary if it is not stale; report whether it was adopted. */
  offer(summary: Summary): boolean;
  current(): Summary | null;
}

export function createSummaryStore(): SummaryStore {
  let latest: Summary | null = null;
  return {
    offer(summary: Summary): boolean {
      if (latest !== null && summary.session === latest.session && summary.revision < latest.revision) {
        return false;
      }
      latest = summary;
      return true;
    },
    current(): Summary | null {
      return latest;
    },
  };
}

/** Gate for secondary payloads (decision block, what-if) that carry the
 * revision they were computed at: accept only if not older than the
 * revision currently on screen. */
export function isFresh(storeRevision: number, payloadRevision: number): boolean {
  return payloadRevision >= storeRevision;
}
