// Test doubles: an in-memory annotation service with the real endpoint
// semantics (409 duplicates, 422 validation, 204 exhaustion) plus a
// storage stub and a connectivity switch.

import { FetchLike, RatingPayload, Task } from "../src/api.js";
import { StorageLike } from "../src/queue.js";

export class MemoryStorage implements StorageLike {
  private map = new Map<string, string>();

  getItem(key: string): string | null {
    return this.map.has(key) ? this.map.get(key)! : null;
  }

  setItem(key: string, value: string): void {
    this.map.set(key, value);
  }

  removeItem(key: string): void {
    this.map.delete(key);
  }

  dump(): Record<string, string> {
    return Object.fromEntries(this.map);
  }
}

export interface StoredRating {
  tweet_id: number;
  rater: string;
  category: string;
  sentiment?: number;
}

export class FakeService {
  online = true;
  posts = 0;
  readonly ratings: StoredRating[] = [];
  private served = new Set<string>();

  constructor(private readonly pool: Task[]) {}

  private response(status: number, body?: unknown): Response {
    return new Response(body === undefined ? null : JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }

  ratingsFor(tweetId: number): StoredRating[] {
    return this.ratings.filter((r) => r.tweet_id === tweetId);
  }

  fetch: FetchLike = async (input, init) => {
    if (!this.online) throw new TypeError("network down");
    const url = new URL(input, "http://service.test");
    if (url.pathname.endsWith("/task")) {
      const rater = url.searchParams.get("rater") ?? "";
      const next = this.pool.find(
        (t) =>
          !this.served.has(`${t.tweet_id}:${rater}`) &&
          !this.ratings.some(
            (r) => r.tweet_id === t.tweet_id && r.rater === rater
          ) &&
          this.ratingsFor(t.tweet_id).length < 2
      );
      if (!next) return this.response(204);
      this.served.add(`${next.tweet_id}:${rater}`);
      return this.response(200, next);
    }
    if (url.pathname.endsWith("/annotation")) {
      this.posts += 1;
      const payload = JSON.parse(String(init?.body)) as RatingPayload;
      if (
        payload.sentiment !== undefined &&
        (payload.category !== "signal" ||
          payload.sentiment < -5 ||
          payload.sentiment > 5 ||
          !Number.isInteger(payload.sentiment))
      ) {
        return this.response(422, { error: "invalid" });
      }
      const dup = this.ratings.some(
        (r) => r.tweet_id === payload.tweet_id && r.rater === payload.rater
      );
      if (dup || this.ratingsFor(payload.tweet_id).length >= 2) {
        return this.response(409, { error: "duplicate" });
      }
      this.ratings.push({ ...payload });
      return this.response(201, { status: "pending" });
    }
    if (url.pathname.endsWith("/stats")) {
      const rated = new Set(this.ratings.map((r) => r.tweet_id)).size;
      const byTweet = new Map<number, number>();
      for (const r of this.ratings) {
        byTweet.set(r.tweet_id, (byTweet.get(r.tweet_id) ?? 0) + 1);
      }
      const doubly = [...byTweet.values()].filter((n) => n >= 2).length;
      return this.response(200, {
        total: this.pool.length,
        rated,
        doubly_rated: doubly,
        agreement_rate: null,
      });
    }
    return this.response(404);
  };
}

export function makePool(n: number): Task[] {
  return Array.from({ length: n }, (_, i) => ({
    tweet_id: i + 1,
    user_id: 100 + i,
    date: "2012-03-01",
    text: `tweet number ${i + 1} <script>alert("x")</script>`,
    user_lang: "en",
  }));
}
