/** Pure payload -> view-model -> markup builders. Every number that appears
 * here comes from the service payload through one of the format helpers;
 * ordering (levels, indicant ranking) is the payload's own ordering. */

import {
  formatPercent,
  formatSigned,
  formatSignedPercent,
  formatSurprise,
  formatUtility,
} from "./format.js";
import type {
  Catalog,
  Summary,
  WhatIfResponse,
} from "./types.js";

// ---------------------------------------------------------------------------
// view models
// ---------------------------------------------------------------------------

export interface BarSegment {
  level: string;
  /** Displayed label and CSS width, both the same rounded payload number. */
  percent: string;
}

export interface DiagnosisBar {
  variable: string;
  observed: string | null;
  segments: BarSegment[];
}

export function diagnosisBars(summary: Summary): DiagnosisBar[] {
  return Object.entries(summary.posteriors).map(([variable, dist]) => ({
    variable,
    observed: summary.evidence[variable] ?? null,
    segments: Object.entries(dist).map(([level, p]) => ({
      level,
      percent: formatPercent(p),
    })),
  }));
}

export interface DecisionRow {
  alternative: string;
  utility: string;
  recommended: boolean;
}

export interface DecisionView {
  decision: string | null;
  rows: DecisionRow[];
  recommended: string | null;
  tie: boolean;
}

export function decisionView(
  summary: Pick<Summary, "decision" | "expected_utilities" | "recommended" | "tie">,
): DecisionView {
  const utilities = summary.expected_utilities ?? {};
  return {
    decision: summary.decision,
    rows: Object.entries(utilities).map(([alternative, value]) => ({
      alternative,
      utility: formatUtility(value),
      recommended: alternative === summary.recommended,
    })),
    recommended: summary.recommended,
    tie: summary.tie === true,
  };
}

export interface ConflictView {
  flagged: boolean;
  surprise: string;
  probability: string;
}

export function conflictView(
  summary: Pick<Summary, "conflict" | "prob_of_evidence">,
): ConflictView {
  return {
    flagged: summary.conflict.flagged,
    surprise: formatSurprise(summary.conflict.surprise),
    probability: formatPercent(summary.prob_of_evidence),
  };
}

export interface EvidenceControl {
  variable: string;
  levels: string[];
  selected: string | null;
}

/** One selector per observable variable (utility nodes have no levels and
 * cannot be observed); "unknown" is the unselected state. */
export function evidenceControls(
  catalog: Catalog,
  evidence: Record<string, string>,
): EvidenceControl[] {
  return catalog.nodes
    .filter((node) => node.kind !== "utility" && node.levels !== null)
    .map((node) => ({
      variable: node.name,
      levels: node.levels as string[],
      selected: evidence[node.name] ?? null,
    }));
}

export interface WhatIfCell {
  level: string;
  value: string;
}

export interface WhatIfRow {
  variable: string;
  sensitivity: string;
  cells: WhatIfCell[];
}

export interface WhatIfView {
  targetLabel: string;
  rows: WhatIfRow[];
}

/** Indicant ranking exactly as the server ordered it. */
export function whatIfView(response: WhatIfResponse): WhatIfView {
  const { variable, levels } = response.target;
  return {
    targetLabel: `P(${variable} ∈ {${levels.join(", ")}})`,
    rows: response.indicants.map((row) => ({
      variable: row.variable,
      sensitivity: formatSigned(row.sensitivity),
      cells: Object.entries(row.posteriors).map(([level, p]) => ({
        level,
        value: p === null ? "—" : formatPercent(p),
      })),
    })),
  };
}

export interface DeltaRow {
  label: string;
  delta: string;
}

/** Posterior and expected-utility swings of a hypothetical observation. */
export function deltaRows(response: WhatIfResponse): DeltaRow[] {
  const rows: DeltaRow[] = [];
  for (const [variable, dist] of Object.entries(response.deltas.posteriors)) {
    for (const [level, delta] of Object.entries(dist)) {
      rows.push({
        label: `P(${variable} = ${level})`,
        delta: formatSignedPercent(delta),
      });
    }
  }
  if (response.deltas.expected_utilities !== null) {
    for (const [alternative, delta] of Object.entries(response.deltas.expected_utilities)) {
      rows.push({ label: `EU(${alternative})`, delta: formatSigned(delta) });
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// markup
// ---------------------------------------------------------------------------

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}

export function renderDiagnosis(bars: DiagnosisBar[]): string {
  return bars
    .map((bar) => {
      const segments = bar.segments
        .map(
          (segment, i) =>
            `<span class="seg seg-${i}" style="width:${segment.percent}"` +
            ` title="${escapeHtml(segment.level)} ${segment.percent}"></span>`,
        )
        .join("");
      const legend = bar.segments
        .map(
          (segment, i) =>
            `<span class="legend"><i class="seg-${i}"></i>` +
            `${escapeHtml(segment.level)} <b>${segment.percent}</b></span>`,
        )
        .join(" ");
      const observed =
        bar.observed === null
          ? ""
          : ` <em class="observed">observed: ${escapeHtml(bar.observed)}</em>`;
      return (
        `<div class="diagnosis"><h3>${escapeHtml(bar.variable)}${observed}</h3>` +
        `<div class="bar">${segments}</div><div class="legends">${legend}</div></div>`
      );
    })
    .join("");
}

export function renderDecision(view: DecisionView): string {
  if (view.decision === null) {
    return '<p class="muted">This network has no decision node.</p>';
  }
  if (view.rows.length === 0) {
    return `<p class="muted">${escapeHtml(view.decision)}: no alternatives to compare.</p>`;
  }
  const rows = view.rows
    .map(
      (row) =>
        `<tr class="${row.recommended ? "recommended" : ""}">` +
        `<td>${escapeHtml(row.alternative)}${row.recommended ? " ★" : ""}</td>` +
        `<td class="num">${row.utility}</td></tr>`,
    )
    .join("");
  const tieNote = view.tie ? '<p class="tie">tie within tolerance</p>' : "";
  return (
    `<table><thead><tr><th>${escapeHtml(view.decision)}</th><th>expected utility</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>${tieNote}`
  );
}

export function renderConflict(view: ConflictView): string {
  if (!view.flagged) {
    return "";
  }
  return (
    `<div class="banner">Evidence conflict: these observations are ` +
    `${view.surprise} more surprising together than separately ` +
    `(P(evidence) = ${view.probability}).</div>`
  );
}

export function renderEvidencePanel(controls: EvidenceControl[]): string {
  return controls
    .map((control) => {
      const options = [
        `<option value=""${control.selected === null ? " selected" : ""}>unknown</option>`,
        ...control.levels.map(
          (level) =>
            `<option value="${escapeHtml(level)}"` +
            `${control.selected === level ? " selected" : ""}>${escapeHtml(level)}</option>`,
        ),
      ].join("");
      return (
        `<label class="evidence-row"><span>${escapeHtml(control.variable)}</span>` +
        `<select data-variable="${escapeHtml(control.variable)}">${options}</select></label>`
      );
    })
    .join("");
}

export function renderWhatIf(view: WhatIfView): string {
  if (view.rows.length === 0) {
    return '<p class="muted">No unobserved indicants left.</p>';
  }
  const rows = view.rows
    .map((row) => {
      const cells = row.cells
        .map(
          (cell) =>
            `<span class="cell">${escapeHtml(cell.level)}: <b>${cell.value}</b></span>`,
        )
        .join(" ");
      return (
        `<tr><td>${escapeHtml(row.variable)}</td>` +
        `<td class="num">${row.sensitivity}</td><td>${cells}</td></tr>`
      );
    })
    .join("");
  return (
    `<table><thead><tr><th>indicant</th><th>swing</th>` +
    `<th>${escapeHtml(view.targetLabel)} if observed…</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`
  );
}

export function renderDeltas(rows: DeltaRow[]): string {
  if (rows.length === 0) {
    return '<p class="muted">No change.</p>';
  }
  return (
    "<ul class=\"deltas\">" +
    rows
      .map((row) => `<li>${escapeHtml(row.label)}: <b>${row.delta}</b></li>`)
      .join("") +
    "</ul>"
  );
}
