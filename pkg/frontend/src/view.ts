/**
 * HTML rendering, kept as pure string builders so it is testable without a
 * browser. The payloads rendered here are already blinded by the server;
 * slots are only ever labelled A, B, C.
 */

import { SLOT_IDS, type SlotId } from "./api.js";
import type { FormState } from "./state.js";
import { canSubmit } from "./state.js";

const SCORE_VALUES = [0, 1, 2, 3, 4, 5, 6];

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function anchorList(anchors: Record<string, string>): string {
  const rows = Object.entries(anchors)
    .sort(([a], [b]) => Number(a) - Number(b))
    .map(
      ([score, text]) =>
        `<li><strong>${escapeHtml(score)}</strong> ${escapeHtml(text)}</li>`,
    )
    .join("");
  return `<ul class="anchors">${rows}</ul>`;
}

function slotPanel(state: FormState, slot: SlotId): string {
  const item = state.item!;
  const selected = state.selectedSlot === slot ? " selected" : "";
  const buttons = SCORE_VALUES.map((value) => {
    const active = state.scores[slot] === value ? " active" : "";
    return (
      `<button class="score${active}" data-slot="${slot}" data-score="${value}"` +
      ` aria-label="score ${value} for ${slot}">${value}</button>`
    );
  }).join("");
  return `
  <section class="slot${selected}" data-slot="${slot}" tabindex="0" aria-label="candidate ${slot}">
    <h3>Candidate ${slot}</h3>
    <p class="candidate">${escapeHtml(item.slots[slot])}</p>
    <div class="scores" role="group">${buttons}</div>
  </section>`;
}

export function renderItem(state: FormState): string {
  const item = state.item;
  if (!item) return "";
  const panels = SLOT_IDS.map((slot) => slotPanel(state, slot)).join("\n");
  const disabled = canSubmit(state.scores) ? "" : " disabled";
  const offline = state.offline
    ? `<p class="offline">offline, ratings queued — <button id="retry">retry now</button></p>`
    : "";
  const error = state.error ? `<p class="error" role="alert">${escapeHtml(state.error)}</p>` : "";
  return `
  <div class="progress">rated ${state.progress.completed} of ${state.progress.total}</div>
  <h2 class="source">${escapeHtml(item.x)}</h2>
  ${panels}
  ${anchorList(state.anchors)}
  ${error}
  ${offline}
  <button id="submit"${disabled}>Submit and next (Enter)</button>
  <p class="hint">keys: a/b/c select a candidate, 0-6 score it, Enter submits</p>`;
}

export function renderDone(state: FormState): string {
  return `
  <div class="done">
    <h2>Session complete</h2>
    <p>You rated ${state.progress.completed} of ${state.progress.total} items. Thank you.</p>
  </div>`;
}

export function renderError(state: FormState): string {
  return `<p class="error" role="alert">${escapeHtml(state.error ?? "something went wrong")}</p>
  <button id="retry">retry</button>`;
}

export function render(state: FormState): string {
  switch (state.phase) {
    case "idle":
    case "loading":
      return `<p class="loading">loading…</p>`;
    case "done":
      return renderDone(state);
    case "failed":
      return renderError(state);
    default:
      return renderItem(state);
  }
}

export type ReportLike = {
  language: string;
  n_items: number;
  mean_original: number;
  mean_simple: number;
  mean_human: number;
  pct_positive: number;
  pct_negative: number;
  pct_same: number;
};

export function renderReport(report: ReportLike): string {
  const fmt = (x: number) => x.toFixed(2);
  return `
  <table class="report">
    <caption>${escapeHtml(report.language)} — ${report.n_items} rated items</caption>
    <tr><th></th><th>original</th><th>simplified</th><th>human</th></tr>
    <tr><td>mean score</td><td>${fmt(report.mean_original)}</td><td>${fmt(
      report.mean_simple,
    )}</td><td>${fmt(report.mean_human)}</td></tr>
    <tr><td>% improved / worse / same</td><td colspan="3">${report.pct_positive} / ${
      report.pct_negative
    } / ${report.pct_same}</td></tr>
  </table>`;
}
