/**
 * Typed client for the rating service API. The server blinds the payloads;
 * nothing here ever sees which slot holds which system.
 */

export type SlotId = "A" | "B" | "C";

export const SLOT_IDS: readonly SlotId[] = ["A", "B", "C"];

export type BlindedItem = {
  item_id: string;
  language: string;
  x: string;
  slots: Record<SlotId, string>;
  stratum: string;
};

export type Progress = { completed: number; total: number };

export type NextResponse =
  | { done: true; progress: Progress }
  | { item: BlindedItem; anchors: Record<string, string>; progress: Progress };

export type SessionInfo = { sessionId: string; nItems: number };

export type AggregateReport = {
  language: string;
  n_items: number;
  mean_original: number;
  mean_simple: number;
  mean_human: number;
  pct_positive: number;
  pct_negative: number;
  pct_same: number;
};

export type ExportedRating = {
  item_id: string;
  evaluator_id: string;
  scores: Record<SlotId, number>;
  timestamp: string;
};

/** Error carrying the HTTP status so callers can branch on 409/422/404. */
export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = typeof fetch;

export class RatingApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
  }

  private async request(path: string, init?: RequestInit): Promise<Response> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const body = await response.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(response.status, detail);
    }
    return response;
  }

  async createSession(evaluatorId: string, language: string): Promise<SessionInfo> {
    const response = await this.request("/sessions", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ evaluator_id: evaluatorId, language }),
    });
    const body = await response.json();
    return { sessionId: body.session_id, nItems: body.n_items };
  }

  async nextItem(sessionId: string): Promise<NextResponse> {
    const response = await this.request(`/sessions/${sessionId}/next`);
    return (await response.json()) as NextResponse;
  }

  async submitRating(
    sessionId: string,
    itemId: string,
    scores: Record<SlotId, number>,
  ): Promise<void> {
    await this.request(`/sessions/${sessionId}/ratings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ item_id: itemId, scores }),
    });
  }

  async report(language?: string): Promise<AggregateReport> {
    const query = language ? `?language=${encodeURIComponent(language)}` : "";
    const response = await this.request(`/report${query}`);
    return (await response.json()) as AggregateReport;
  }

  async exportRatings(): Promise<ExportedRating[]> {
    const response = await this.request("/export");
    const text = await response.text();
    return text
      .split("\n")
      .filter((line) => line.trim().length > 0)
      .map((line) => JSON.parse(line) as ExportedRating);
  }
}
