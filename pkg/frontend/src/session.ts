// Rating session state machine: one active task per browser session, all
// mutation through the service API. Submissions are single-flight (a
// double click cannot produce two POSTs) and survive connectivity loss
// through the offline queue.

import { ApiClient, PoolStats, RatingPayload, Task } from "./api.js";
import { OfflineQueue } from "./queue.js";

export type Category = "signal" | "noise" | "not_english";

export type Phase = "loading" | "rating" | "complete" | "offline";

export const SENTIMENT_MIN = -5;
export const SENTIMENT_MAX = 5;

export interface ViewState {
  phase: Phase;
  task: Task | null;
  category: Category | null;
  sentiment: number;
  validationError: string | null;
  stats: PoolStats | null;
  queuedCount: number;
  submitting: boolean;
}

export class RatingSession {
  private state: ViewState = {
    phase: "loading",
    task: null,
    category: null,
    sentiment: 0,
    validationError: null,
    stats: null,
    queuedCount: 0,
    submitting: false,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly queue: OfflineQueue,
    readonly rater: string,
    private readonly onChange: (state: ViewState) => void = () => {}
  ) {}

  get view(): ViewState {
    return { ...this.state };
  }

  private update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.view);
  }

  async start(): Promise<void> {
    await this.reconnect();
  }

  /** Flush anything queued, refresh progress, and load a task if needed. */
  async reconnect(): Promise<void> {
    try {
      await this.queue.flush(this.api);
      this.update({ queuedCount: this.queue.size });
      await this.refreshStats();
      if (this.state.phase !== "rating" || this.state.task === null) {
        await this.nextTask();
      }
    } catch {
      this.update({ phase: "offline", queuedCount: this.queue.size });
    }
  }

  async refreshStats(): Promise<void> {
    try {
      this.update({ stats: await this.api.fetchStats() });
    } catch {
      // progress display is best-effort; rating continues without it
    }
  }

  selectCategory(category: Category): void {
    if (this.state.phase !== "rating") return;
    // a sentiment chosen for signal must never leak onto other categories
    this.update({ category, validationError: null });
  }

  setSentiment(value: number): void {
    const snapped = Math.round(value);
    this.update({
      sentiment: Math.max(SENTIMENT_MIN, Math.min(SENTIMENT_MAX, snapped)),
    });
  }

  adjustSentiment(delta: number): void {
    this.setSentiment(this.state.sentiment + delta);
  }

  get canSubmit(): boolean {
    return (
      this.state.phase === "rating" &&
      this.state.task !== null &&
      this.state.category !== null &&
      !this.state.submitting
    );
  }

  buildPayload(): RatingPayload {
    if (this.state.task === null || this.state.category === null) {
      throw new Error("nothing to submit");
    }
    const payload: RatingPayload = {
      tweet_id: this.state.task.tweet_id,
      rater: this.rater,
      category: this.state.category,
    };
    if (this.state.category === "signal") {
      payload.sentiment = this.state.sentiment;
    }
    return payload;
  }

  /** Submit the current rating, then advance. Safe under double clicks. */
  async submit(): Promise<void> {
    if (!this.canSubmit) return;
    const payload = this.buildPayload();
    this.update({ submitting: true });
    let result;
    try {
      result = await this.api.submitRating(payload);
    } catch {
      // offline: keep the payload, drop the tweet content with the task
      this.queue.enqueue(payload);
      this.update({
        phase: "offline",
        task: null,
        submitting: false,
        queuedCount: this.queue.size,
      });
      return;
    }
    if (result === "invalid") {
      this.update({
        submitting: false,
        validationError: "The service rejected this rating; adjust and retry.",
      });
      return;
    }
    // accepted, or a duplicate from an earlier delivery: move on either way
    const stats = this.state.stats;
    this.update({
      submitting: false,
      stats: stats ? { ...stats, rated: stats.rated + 1 } : stats,
    });
    await this.nextTask();
    await this.refreshStats(); // reconcile the optimistic bump
  }

  async nextTask(): Promise<void> {
    this.update({ phase: "loading", validationError: null });
    let task;
    try {
      task = await this.api.fetchTask(this.rater);
    } catch {
      this.update({ phase: "offline", task: null });
      return;
    }
    if (task === null) {
      this.update({ phase: "complete", task: null, category: null });
      return;
    }
    this.update({
      phase: "rating",
      task,
      category: null,
      sentiment: 0,
      validationError: null,
    });
  }
}
