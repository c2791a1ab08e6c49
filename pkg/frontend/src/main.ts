/** DOM wiring. No probability arithmetic, no formatting, no ordering
 * decisions happen here — this file moves payloads between the API client,
 * the revision-gated store, and the pure render functions. */

import { Api, ApiError } from "./api.js";
import { createSummaryStore, isFresh } from "./state.js";
import type { Catalog, Summary } from "./types.js";
import {
  conflictView,
  decisionView,
  deltaRows,
  diagnosisBars,
  evidenceControls,
  escapeHtml,
  renderConflict,
  renderDecision,
  renderDeltas,
  renderDiagnosis,
  renderEvidencePanel,
  renderWhatIf,
  whatIfView,
} from "./view.js";

const params = new URLSearchParams(window.location.search);
const api = new Api(params.get("api") ?? window.location.origin);
const store = createSummaryStore();

let catalog: Catalog | null = null;
let sessionId: string | null = null;

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node;
}

function setStatus(text: string, isError: boolean): void {
  const status = el("status");
  status.textContent = text;
  status.className = isError ? "status error" : "status";
}

function describe(error: unknown): string {
  if (error instanceof ApiError) {
    return `${error.code}: ${error.message}`;
  }
  return error instanceof Error ? error.message : String(error);
}

function render(summary: Summary): void {
  if (catalog !== null) {
    el("evidence").innerHTML = renderEvidencePanel(
      evidenceControls(catalog, summary.evidence),
    );
  }
  el("diagnosis").innerHTML = renderDiagnosis(diagnosisBars(summary));
  el("decision").innerHTML = renderDecision(decisionView(summary));
  el("conflict").innerHTML = renderConflict(conflictView(summary));
  el("session-line").textContent =
    `session ${summary.session} · ${summary.network} · revision ${summary.revision}`;
}

function adopt(summary: Summary): boolean {
  if (!store.offer(summary)) {
    return false;
  }
  render(summary);
  void refreshWhatIf(summary.revision);
  return true;
}

async function refreshWhatIf(revision: number): Promise<void> {
  if (sessionId === null) {
    return;
  }
  try {
    const response = await api.whatIf(sessionId, {});
    const latest = store.current();
    if (latest !== null && isFresh(latest.revision, revision)) {
      el("whatif").innerHTML = renderWhatIf(whatIfView(response));
    }
  } catch (error) {
    el("whatif").innerHTML =
      `<p class="muted">${escapeHtml(describe(error))}</p>`;
  }
}

async function onEvidenceChange(variable: string, level: string): Promise<void> {
  if (sessionId === null) {
    return;
  }
  try {
    const summary =
      level === ""
        ? await api.clearEvidence(sessionId, variable)
        : await api.putEvidence(sessionId, variable, level);
    adopt(summary);
    setStatus("", false);
  } catch (error) {
    setStatus(describe(error), true);
    const latest = store.current();
    if (latest !== null) {
      render(latest); // snap selectors back to the server's preserved state
    }
  }
}

function populateHypotheticalLevels(): void {
  if (catalog === null) {
    return;
  }
  const variable = (el("hypo-variable") as HTMLSelectElement).value;
  const node = catalog.nodes.find((n) => n.name === variable);
  const levels = node?.levels ?? [];
  (el("hypo-level") as HTMLSelectElement).innerHTML = levels
    .map((level) => `<option value="${escapeHtml(level)}">${escapeHtml(level)}</option>`)
    .join("");
}

async function evaluateHypothetical(): Promise<void> {
  if (sessionId === null) {
    return;
  }
  const variable = (el("hypo-variable") as HTMLSelectElement).value;
  const level = (el("hypo-level") as HTMLSelectElement).value;
  if (variable === "" || level === "") {
    return;
  }
  try {
    const response = await api.whatIf(sessionId, { [variable]: level });
    el("deltas").innerHTML =
      `<h3>if ${escapeHtml(variable)} = ${escapeHtml(level)}</h3>` +
      renderDeltas(deltaRows(response));
    setStatus("", false);
  } catch (error) {
    setStatus(describe(error), true);
  }
}

async function exportEvidence(): Promise<void> {
  if (sessionId === null) {
    return;
  }
  try {
    const text = await api.exportEvidence(sessionId);
    el("export-output").textContent = text === "" ? "(no evidence)" : text;
  } catch (error) {
    setStatus(describe(error), true);
  }
}

async function init(): Promise<void> {
  try {
    catalog = await api.getNetwork("default");
    const summary = await api.openSession();
    sessionId = summary.session;
    adopt(summary);

    const observable = catalog.nodes.filter(
      (n) => n.kind !== "utility" && n.levels !== null,
    );
    (el("hypo-variable") as HTMLSelectElement).innerHTML = observable
      .map((n) => `<option value="${escapeHtml(n.name)}">${escapeHtml(n.name)}</option>`)
      .join("");
    populateHypotheticalLevels();
    setStatus("", false);
  } catch (error) {
    setStatus(`failed to reach service: ${describe(error)}`, true);
  }
}

el("evidence").addEventListener("change", (event) => {
  const target = event.target;
  if (target instanceof HTMLSelectElement && target.dataset.variable !== undefined) {
    void onEvidenceChange(target.dataset.variable, target.value);
  }
});
el("hypo-variable").addEventListener("change", populateHypotheticalLevels);
el("hypo-evaluate").addEventListener("click", () => void evaluateHypothetical());
el("export-button").addEventListener("click", () => void exportEvidence());

void init();
