/**
 * Session orchestration: create a session, walk the queue, submit ratings
 * with optimistic progress, queue and retry when the network drops.
 */

import { ApiError, RatingApi, type SlotId } from "./api.js";
import {
  FormState,
  beginSubmit,
  canSubmit,
  dequeuePending,
  initialState,
  presentDone,
  presentItem,
  queuePending,
  rollbackSubmit,
  setScore,
  selectSlot,
  handleKey,
} from "./state.js";

export type Listener = (state: FormState) => void;

export class SessionController {
  state: FormState = initialState();
  sessionId: string | null = null;
  private listener: Listener | null = null;

  constructor(
    private readonly api: RatingApi,
    private readonly evaluatorId: string,
    private readonly language: string,
  ) {}

  onChange(listener: Listener): void {
    this.listener = listener;
  }

  private update(state: FormState): void {
    this.state = state;
    this.listener?.(state);
  }

  async start(): Promise<void> {
    this.update({ ...this.state, phase: "loading" });
    try {
      const session = await this.api.createSession(this.evaluatorId, this.language);
      this.sessionId = session.sessionId;
      await this.advance();
    } catch (error) {
      this.update({ ...this.state, phase: "failed", error: describe(error) });
      throw error;
    }
  }

  /** Fetch the next work unit (or the completion marker). */
  async advance(): Promise<void> {
    if (!this.sessionId) throw new Error("session not started");
    const next = await this.api.nextItem(this.sessionId);
    if ("done" in next) {
      this.update(presentDone(this.state, next.progress));
    } else {
      this.update(presentItem(this.state, next.item, next.anchors, next.progress));
    }
  }

  score(slot: SlotId, value: number): void {
    this.update(setScore(this.state, slot, value));
  }

  select(slot: SlotId): void {
    this.update(selectSlot(this.state, slot));
  }

  async key(key: string): Promise<void> {
    const action = handleKey(this.state, key);
    this.update(action.state);
    if (action.submit) await this.submit();
  }

  get submitEnabled(): boolean {
    return this.state.phase === "rating" && canSubmit(this.state.scores);
  }

  /**
   * Submit the current form. Progress is updated optimistically; a network
   * failure rolls it back and parks the rating in the offline queue (it is
   * retried before the next submission); a validation rejection rolls back
   * and surfaces inline without queueing.
   */
  async submit(): Promise<void> {
    const { item, scores } = this.state;
    if (!this.sessionId || !item || !canSubmit(scores)) return;
    this.update(beginSubmit(this.state));
    // the live form supersedes any queued rating for the same item
    const pending = this.state.pending.filter((p) => p.itemId !== item.item_id);
    if (pending.length !== this.state.pending.length) {
      this.update({ ...this.state, pending, offline: pending.length > 0 });
    }
    try {
      await this.flushPending();
      await this.api.submitRating(this.sessionId, item.item_id, scores);
      this.update({ ...this.state, offline: false });
      await this.advance();
    } catch (error) {
      if (error instanceof ApiError) {
        this.update(rollbackSubmit(this.state, describe(error)));
        return;
      }
      // network problem: keep the entered scores safe and retry later
      this.update(
        queuePending(rollbackSubmit(this.state, "offline, rating queued"), {
          itemId: item.item_id,
          scores,
        }),
      );
    }
  }

  /** Deliver queued ratings in order; stops at the first failure. */
  async flushPending(): Promise<boolean> {
    if (!this.sessionId) return true;
    let delivered = 0;
    for (const pending of this.state.pending) {
      try {
        await this.api.submitRating(this.sessionId, pending.itemId, pending.scores);
        delivered += 1;
      } catch (error) {
        this.update(dequeuePending(this.state, delivered));
        throw error;
      }
    }
    if (delivered > 0 || this.state.pending.length > 0) {
      this.update(dequeuePending(this.state, delivered));
    }
    return this.state.pending.length === 0;
  }

  /** Retry path for the offline queue; resumes the session when it clears. */
  async retry(): Promise<void> {
    try {
      const clear = await this.flushPending();
      if (clear) {
        this.update({ ...this.state, offline: false, error: null });
        await this.advance();
      }
    } catch (error) {
      this.update({ ...this.state, error: describe(error) });
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return `${error.status}: ${error.message}`;
  if (error instanceof Error) return error.message;
  return String(error);
}
