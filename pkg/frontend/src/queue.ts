// Offline submission queue.
//
// Only the rating payload (ids, category, sentiment) is persisted, never
// tweet text. Retries are idempotent: the server keys annotations by
// (tweet_id, rater) and answers 409 for anything it already has, which
// the flush treats as delivered.

import { ApiClient, RatingPayload } from "./api.js";

export interface StorageLike {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

const KEY = "cohort-miner.pending-ratings";

export class OfflineQueue {
  constructor(private readonly storage: StorageLike) {}

  pending(): RatingPayload[] {
    const raw = this.storage.getItem(KEY);
    if (!raw) return [];
    try {
      return JSON.parse(raw) as RatingPayload[];
    } catch {
      this.storage.removeItem(KEY);
      return [];
    }
  }

  enqueue(payload: RatingPayload): void {
    const items = this.pending().filter(
      (p) => !(p.tweet_id === payload.tweet_id && p.rater === payload.rater)
    );
    items.push(payload);
    this.storage.setItem(KEY, JSON.stringify(items));
  }

  get size(): number {
    return this.pending().length;
  }

  /**
   * Deliver queued ratings in order; stops at the first network failure
   * so nothing is lost. Returns how many the server now has.
   */
  async flush(api: ApiClient): Promise<number> {
    let delivered = 0;
    let items = this.pending();
    while (items.length > 0) {
      const head = items[0];
      try {
        await api.submitRating(head); // accepted, duplicate and invalid all settle it
      } catch {
        break; // still offline; keep the rest queued
      }
      delivered += 1;
      items = items.slice(1);
      this.storage.setItem(KEY, JSON.stringify(items));
    }
    if (items.length === 0) this.storage.removeItem(KEY);
    return delivered;
  }
}
