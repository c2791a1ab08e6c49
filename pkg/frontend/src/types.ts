/** Wire types of the consultation service. The console renders these
 * payloads verbatim; it never derives probabilities of its own. */

export interface Diagnostic {
  severity: string;
  message: string;
  file: string;
  line: number;
  column: number;
}

export interface NodeInfo {
  name: string;
  kind: "chance" | "decision" | "deterministic" | "utility";
  levels: string[] | null;
  parents: string[];
  tags: string[];
}

export interface Catalog {
  id: string;
  nodes: NodeInfo[];
  diagnosis: string[];
  decision: string | null;
  diagnostics: Diagnostic[];
}

export interface Conflict {
  surprise: number;
  flagged: boolean;
}

export interface Summary {
  session: string;
  network: string;
  revision: number;
  evidence: Record<string, string>;
  posteriors: Record<string, Record<string, number>>;
  prob_of_evidence: number;
  conflict: Conflict;
  decision: string | null;
  expected_utilities: Record<string, number> | null;
  recommended: string | null;
  tie: boolean | null;
}

export interface DecisionBlock {
  session: string;
  revision: number;
  evidence: Record<string, string>;
  decision: string | null;
  expected_utilities: Record<string, number> | null;
  recommended: string | null;
  tie: boolean | null;
}

export interface IndicantRow {
  variable: string;
  posteriors: Record<string, number | null>;
  sensitivity: number;
}

export interface WhatIfResponse {
  hypothetical: Record<string, string>;
  payload: Summary;
  deltas: {
    posteriors: Record<string, Record<string, number>>;
    expected_utilities: Record<string, number> | null;
  };
  target: { variable: string; levels: string[] };
  indicants: IndicantRow[];
}

export interface ApiErrorBody {
  error: string;
  message: string;
  [extra: string]: unknown;
}
