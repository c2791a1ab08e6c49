import { describe, expect, it } from "vitest";
import { createSummaryStore, isFresh } from "../src/state.js";
import type { Summary } from "../src/types.js";

function summary(session: string, revision: number): Summary {
  return {
    session,
    network: "default",
    revision,
    evidence: {},
    posteriors: { D: { yes: 0.5, no: 0.5 } },
    prob_of_evidence: 1.0,
    conflict: { surprise: 1.0, flagged: false },
    decision: null,
    expected_utilities: null,
    recommended: null,
    tie: null,
  };
}

describe("createSummaryStore", () => {
  it("adopts the first summary it sees", () => {
    const store = createSummaryStore();
    expect(store.current()).toBeNull();
    expect(store.offer(summary("s1", 0))).toBe(true);
    expect(store.current()?.revision).toBe(0);
  });

  it("adopts higher revisions and equal revisions", () => {
    const store = createSummaryStore();
    store.offer(summary("s1", 0));
    expect(store.offer(summary("s1", 2))).toBe(true);
    expect(store.offer(summary("s1", 2))).toBe(true);
    expect(store.current()?.revision).toBe(2);
  });

  it("discards a stale lower revision of the same session", () => {
    const store = createSummaryStore();
    store.offer(summary("s1", 0));
    store.offer(summary("s1", 2));
    expect(store.offer(summary("s1", 1))).toBe(false);
    expect(store.current()?.revision).toBe(2);
  });

  it("a new session resets the gate even at a lower revision", () => {
    const store = createSummaryStore();
    store.offer(summary("s1", 5));
    expect(store.offer(summary("s2", 0))).toBe(true);
    expect(store.current()?.session).toBe("s2");
    expect(store.current()?.revision).toBe(0);
  });
});

describe("isFresh", () => {
  it("accepts payloads at or above the store revision", () => {
    expect(isFresh(3, 3)).toBe(true);
    expect(isFresh(3, 4)).toBe(true);
  });

  it("rejects payloads below the store revision", () => {
    expect(isFresh(3, 2)).toBe(false);
  });
});
