import { describe, expect, it } from "vitest";

import { ApiError, RatingApi } from "../src/api.js";

type Recorded = { url: string; init?: RequestInit };

function fakeFetch(
  responses: Array<{ status?: number; body?: unknown; text?: string }>,
  log: Recorded[] = [],
): typeof fetch {
  return (async (url: RequestInfo | URL, init?: RequestInit) => {
    log.push({ url: String(url), init });
    const next = responses.shift() ?? { status: 500, body: { detail: "script exhausted" } };
    const status = next.status ?? 200;
    const text = next.text ?? JSON.stringify(next.body ?? {});
    return new Response(text, {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }) as typeof fetch;
}

describe("RatingApi", () => {
  it("creates sessions with the documented body", async () => {
    const log: Recorded[] = [];
    const api = new RatingApi(
      "http://svc/",
      fakeFetch([{ body: { session_id: "s1", n_items: 7 } }], log),
    );
    const session = await api.createSession("vera", "en-bg");
    expect(session).toEqual({ sessionId: "s1", nItems: 7 });
    expect(log[0]?.url).toBe("http://svc/sessions");
    expect(JSON.parse(String(log[0]?.init?.body))).toEqual({
      evaluator_id: "vera",
      language: "en-bg",
    });
  });

  it("surfaces conflict and validation statuses", async () => {
    const api = new RatingApi(
      "http://svc",
      fakeFetch([{ status: 409, body: { detail: "already active" } }]),
    );
    await expect(api.createSession("vera", "en-bg")).rejects.toThrowError(ApiError);
    const api422 = new RatingApi(
      "http://svc",
      fakeFetch([{ status: 422, body: { detail: "score out of range" } }]),
    );
    const failure = api422
      .submitRating("s1", "i1", { A: 1, B: 2, C: 3 })
      .catch((e: ApiError) => e);
    expect(((await failure) as ApiError).status).toBe(422);
  });

  it("fetches next items and the done marker", async () => {
    const item = {
      item_id: "i1",
      language: "en-bg",
      x: "src",
      slots: { A: "1", B: "2", C: "3" },
      stratum: "positive",
    };
    const api = new RatingApi(
      "http://svc",
      fakeFetch([
        { body: { item, anchors: {}, progress: { completed: 0, total: 2 } } },
        { body: { done: true, progress: { completed: 2, total: 2 } } },
      ]),
    );
    const first = await api.nextItem("s1");
    expect("item" in first && first.item.item_id).toBe("i1");
    const second = await api.nextItem("s1");
    expect("done" in second && second.done).toBe(true);
  });

  it("parses the export ndjson", async () => {
    const lines =
      JSON.stringify({ item_id: "i1", evaluator_id: "v", scores: { A: 1, B: 2, C: 3 }, timestamp: "t" }) +
      "\n" +
      JSON.stringify({ item_id: "i2", evaluator_id: "v", scores: { A: 4, B: 5, C: 6 }, timestamp: "t" }) +
      "\n";
    const api = new RatingApi("http://svc", fakeFetch([{ text: lines }]));
    const ratings = await api.exportRatings();
    expect(ratings.map((r) => r.item_id)).toEqual(["i1", "i2"]);
  });
});
