// Thin fetch client for the review service.

import { Decision, DecisionResult, Filter, Stats, UnitEnvelope, UnitPage } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parseError(resp: Response): Promise<ApiError> {
  let message = `${resp.status} ${resp.statusText}`;
  try {
    const body = await resp.json();
    if (body.reason) message = body.reason;
    else if (body.error) message = body.error;
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(resp.status, message);
}

export function unitsQuery(filter: Filter, page: number, pageSize: number): string {
  const params = new URLSearchParams();
  if (filter.status) params.set("status", filter.status);
  if (filter.docKey) params.set("doc_key", filter.docKey);
  if (filter.sort !== "position") params.set("sort", filter.sort);
  if (page !== 1) params.set("page", String(page));
  params.set("page_size", String(pageSize));
  return `/units?${params.toString()}`;
}

export class ReviewClient {
  constructor(private base: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.base + path);
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as T;
  }

  listUnits(filter: Filter, page: number, pageSize: number): Promise<UnitPage> {
    return this.getJson<UnitPage>(unitsQuery(filter, page, pageSize));
  }

  getUnit(tuId: string): Promise<UnitEnvelope> {
    return this.getJson<UnitEnvelope>(`/units/${encodeURIComponent(tuId)}`);
  }

  async decide(tuId: string, decision: Decision): Promise<DecisionResult> {
    const resp = await fetch(`${this.base}/units/${encodeURIComponent(tuId)}/decision`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(decision),
    });
    // 409 carries {applied: false, reason}: a logged but inapplicable
    // decision is an answer, not a transport failure
    if (resp.status === 409) return (await resp.json()) as DecisionResult;
    if (!resp.ok) throw await parseError(resp);
    return (await resp.json()) as DecisionResult;
  }

  stats(): Promise<Stats> {
    return this.getJson<Stats>("/stats");
  }

  exportUrl(): string {
    return `${this.base}/export`;
  }
}
