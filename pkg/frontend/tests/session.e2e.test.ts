/**
 * Scripted end-to-end session against the LIVE rating service: the real
 * Python server is spawned, the UI's own client and controller drive a
 * 10-item session over HTTP, every payload that crosses the wire is
 * recorded and scanned, and the submitted scores are read back from
 * /export.
 */

import { spawn, type ChildProcess } from "node:child_process";
import { mkdtempSync, mkdirSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { RatingApi, SLOT_IDS, type SlotId } from "../src/api.js";
import { SessionController } from "../src/controller.js";

const PORT = 8900 + Math.floor(Math.random() * 500);
const BASE = `http://127.0.0.1:${PORT}`;
const LANGUAGE = "en-bg";
const N_ITEMS = 10;

// every request and response body that crosses the wire
const payloads: string[] = [];

const recordingFetch: typeof fetch = async (url, init) => {
  if (init?.body) payloads.push(String(init.body));
  const response = await fetch(url, init);
  const copy = response.clone();
  try {
    payloads.push(await copy.text());
  } catch {
    // empty 204 bodies
  }
  return response;
};

function makeStore(): string {
  const root = mkdtempSync(join(tmpdir(), "rating-e2e-"));
  const store = join(root, "store");
  mkdirSync(store);
  const systems = ["original_mt", "simplified_mt", "reference"];
  const lines = [];
  for (let i = 0; i < N_ITEMS; i++) {
    // rotate the hidden assignment so every permutation phase appears
    const rotated = [...systems.slice(i % 3), ...systems.slice(0, i % 3)];
    const mapping = Object.fromEntries(SLOT_IDS.map((slot, k) => [slot, rotated[k]]));
    const texts: Record<string, string> = {
      original_mt: `direct translation number ${i}`,
      simplified_mt: `preprocessed translation number ${i}`,
      reference: `human written sentence number ${i}`,
    };
    lines.push(
      JSON.stringify({
        item_id: `item-${i}`,
        language: LANGUAGE,
        x: `this is source sentence number ${i} with enough tokens`,
        y: texts.reference,
        slots: Object.fromEntries(
          SLOT_IDS.map((slot) => [slot, texts[mapping[slot] as string]]),
        ),
        mapping,
        stratum: i % 2 === 0 ? "positive" : "negative",
        delta_gleu: i % 2 === 0 ? 0.5 : -0.2,
      }),
    );
  }
  writeFileSync(join(store, "items.jsonl"), lines.join("\n") + "\n", "utf-8");
  return store;
}

let server: ChildProcess;

beforeAll(async () => {
  const store = makeStore();
  server = spawn("appmt", ["serve-humaneval", "--store", store, "--port", String(PORT)], {
    stdio: "ignore",
  });
  const deadline = Date.now() + 20_000;
  for (;;) {
    try {
      const response = await fetch(`${BASE}/report`);
      if (response.ok) break;
    } catch {
      // not up yet
    }
    if (Date.now() > deadline) throw new Error("rating service did not start");
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
}, 30_000);

afterAll(() => {
  server?.kill();
});

describe("live 10-item session", () => {
  it("completes, exports every score, and never leaks the blinding", async () => {
    const api = new RatingApi(BASE, recordingFetch);
    const controller = new SessionController(api, "scripted-rater", LANGUAGE);
    await controller.start();

    const submitted = new Map<string, Record<SlotId, number>>();
    let guard = 0;
    while (controller.state.phase === "rating" && guard < 50) {
      guard += 1;
      const itemId = controller.state.item!.item_id;
      const i = submitted.size;
      const scores: Record<SlotId, number> = {
        A: i % 7,
        B: (i + 3) % 7,
        C: (i + 5) % 7,
      };
      for (const slot of SLOT_IDS) controller.score(slot, scores[slot]);
      expect(controller.submitEnabled).toBe(true);
      await controller.submit();
      submitted.set(itemId, scores);
    }

    expect(controller.state.phase).toBe("done");
    expect(submitted.size).toBe(N_ITEMS);
    expect(controller.state.progress.completed).toBe(N_ITEMS);

    // every submitted score is visible in the export
    const exported = await api.exportRatings();
    expect(exported).toHaveLength(N_ITEMS);
    for (const rating of exported) {
      expect(rating.evaluator_id).toBe("scripted-rater");
      expect(rating.scores).toEqual(submitted.get(rating.item_id));
    }

    // the aggregate report is served and partitions to 100
    const report = await api.report(LANGUAGE);
    expect(report.n_items).toBe(N_ITEMS);
    expect(
      report.pct_positive + report.pct_negative + report.pct_same,
    ).toBeCloseTo(100.0, 1);

    // no payload in the whole exchange carried the slot-to-system mapping
    expect(payloads.length).toBeGreaterThan(N_ITEMS * 2);
    for (const payload of payloads) {
      expect(payload).not.toContain('"mapping"');
      expect(payload).not.toContain("original_mt");
      expect(payload).not.toContain("simplified_mt");
    }
  }, 30_000);
});
