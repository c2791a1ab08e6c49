/** Typed client for the consultation service. All data shown in the
 * console comes through these calls; nothing is computed client-side. */

import type {
  ApiErrorBody,
  Catalog,
  DecisionBlock,
  Summary,
  WhatIfResponse,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly body: ApiErrorBody;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.status = status;
    this.code = body.error;
    this.body = body;
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class Api {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      let parsed: ApiErrorBody;
      try {
        parsed = (await response.json()) as ApiErrorBody;
      } catch {
        parsed = { error: "http_error", message: `HTTP ${response.status}` };
      }
      throw new ApiError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  getNetwork(id: string): Promise<Catalog> {
    return this.request("GET", `/networks/${encodeURIComponent(id)}`);
  }

  uploadNetwork(source: string, file: string): Promise<Catalog> {
    return this.request("POST", "/networks", { source, file });
  }

  openSession(networkId?: string): Promise<Summary> {
    const body = networkId === undefined ? {} : { network_id: networkId };
    return this.request("POST", "/sessions", body);
  }

  getPosteriors(session: string): Promise<Summary> {
    return this.request("GET", `/sessions/${encodeURIComponent(session)}/posteriors`);
  }

  putEvidence(session: string, variable: string, level: string): Promise<Summary> {
    return this.request("PUT", `/sessions/${encodeURIComponent(session)}/evidence`, {
      variable,
      level,
    });
  }

  clearEvidence(session: string, variable: string): Promise<Summary> {
    return this.request(
      "DELETE",
      `/sessions/${encodeURIComponent(session)}/evidence/${encodeURIComponent(variable)}`,
    );
  }

  getDecision(session: string): Promise<DecisionBlock> {
    return this.request("GET", `/sessions/${encodeURIComponent(session)}/decision`);
  }

  whatIf(
    session: string,
    assignments: Record<string, string>,
    target?: string,
  ): Promise<WhatIfResponse> {
    const body: Record<string, unknown> = { assignments };
    if (target !== undefined) {
      body.target = target;
    }
    return this.request("POST", `/sessions/${encodeURIComponent(session)}/whatif`, body);
  }

  async exportEvidence(session: string): Promise<string> {
    const response = await this.fetchImpl(
      `${this.base}/sessions/${encodeURIComponent(session)}/export`,
      { method: "GET" },
    );
    if (!response.ok) {
      throw new ApiError(response.status, {
        error: "http_error",
        message: `HTTP ${response.status}`,
      });
    }
    return response.text();
  }
}
