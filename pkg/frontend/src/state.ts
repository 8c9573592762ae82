/**
 * Pure form/session state. All transitions are plain functions so keyboard
 * handling and submit gating are testable without a browser.
 */

import type { BlindedItem, Progress, SlotId } from "./api.js";
import { SLOT_IDS } from "./api.js";

export type Scores = Partial<Record<SlotId, number>>;

export type Phase =
  | "idle"
  | "loading"
  | "rating"
  | "submitting"
  | "done"
  | "failed";

export type PendingRating = {
  itemId: string;
  scores: Record<SlotId, number>;
};

export type FormState = {
  phase: Phase;
  item: BlindedItem | null;
  anchors: Record<string, string>;
  scores: Scores;
  selectedSlot: SlotId;
  progress: Progress;
  /** ratings accepted locally but not yet acknowledged by the server */
  pending: PendingRating[];
  /** user-facing error, e.g. a validation rejection, cleared on edit */
  error: string | null;
  /** true while submissions are being queued instead of delivered */
  offline: boolean;
};

export function initialState(): FormState {
  return {
    phase: "idle",
    item: null,
    anchors: {},
    scores: {},
    selectedSlot: "A",
    progress: { completed: 0, total: 0 },
    pending: [],
    error: null,
    offline: false,
  };
}

export function isValidScore(value: number): boolean {
  return Number.isInteger(value) && value >= 0 && value <= 6;
}

/** Submit is enabled only when every slot has a valid score. */
export function canSubmit(scores: Scores): scores is Record<SlotId, number> {
  return SLOT_IDS.every((slot) => {
    const value = scores[slot];
    return value !== undefined && isValidScore(value);
  });
}

export function setScore(state: FormState, slot: SlotId, value: number): FormState {
  if (!isValidScore(value)) return { ...state, error: `scores are whole numbers 0..6` };
  return { ...state, scores: { ...state.scores, [slot]: value }, error: null };
}

export function selectSlot(state: FormState, slot: SlotId): FormState {
  return { ...state, selectedSlot: slot };
}

function cycleSlot(current: SlotId, step: 1 | -1): SlotId {
  const index = SLOT_IDS.indexOf(current);
  const next = (index + step + SLOT_IDS.length) % SLOT_IDS.length;
  return SLOT_IDS[next]!;
}

export type KeyAction = { state: FormState; submit: boolean };

/**
 * Keyboard-only operation: digits score the selected slot and advance to
 * the next one, a/b/c (or arrows / Tab) select a slot, Enter submits once
 * complete.
 */
export function handleKey(state: FormState, key: string): KeyAction {
  if (state.phase !== "rating") return { state, submit: false };
  if (/^[0-6]$/.test(key)) {
    const scored = setScore(state, state.selectedSlot, Number(key));
    return {
      state: { ...scored, selectedSlot: cycleSlot(state.selectedSlot, 1) },
      submit: false,
    };
  }
  const upper = key.toUpperCase();
  if ((SLOT_IDS as readonly string[]).includes(upper)) {
    return { state: selectSlot(state, upper as SlotId), submit: false };
  }
  if (key === "ArrowDown" || key === "Tab") {
    return { state: selectSlot(state, cycleSlot(state.selectedSlot, 1)), submit: false };
  }
  if (key === "ArrowUp") {
    return { state: selectSlot(state, cycleSlot(state.selectedSlot, -1)), submit: false };
  }
  if (key === "Enter" && canSubmit(state.scores)) {
    return { state, submit: true };
  }
  return { state, submit: false };
}

/** A fresh item arrived: reset the form but keep session-level fields. */
export function presentItem(
  state: FormState,
  item: BlindedItem,
  anchors: Record<string, string>,
  progress: Progress,
): FormState {
  return {
    ...state,
    phase: "rating",
    item,
    anchors,
    scores: {},
    selectedSlot: "A",
    progress,
    error: null,
  };
}

export function presentDone(state: FormState, progress: Progress): FormState {
  return { ...state, phase: "done", item: null, scores: {}, progress };
}

/** Optimistic submit: count the item as completed right away. */
export function beginSubmit(state: FormState): FormState {
  return {
    ...state,
    phase: "submitting",
    error: null,
    progress: { ...state.progress, completed: state.progress.completed + 1 },
  };
}

/** Roll the optimistic progress back; the caller decides whether the
 * rating goes to the offline queue (network) or surfaces inline
 * (validation). */
export function rollbackSubmit(state: FormState, error: string | null): FormState {
  return {
    ...state,
    phase: "rating",
    error,
    progress: { ...state.progress, completed: Math.max(0, state.progress.completed - 1) },
  };
}

export function queuePending(state: FormState, rating: PendingRating): FormState {
  return { ...state, pending: [...state.pending, rating], offline: true };
}

export function dequeuePending(state: FormState, delivered: number): FormState {
  const pending = state.pending.slice(delivered);
  return { ...state, pending, offline: pending.length > 0 };
}
