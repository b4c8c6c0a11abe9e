// Typed client for the annotation service endpoints.

export interface Task {
  tweet_id: number;
  user_id: number;
  date: string;
  text: string;
  user_lang: string;
}

export interface PoolStats {
  total: number;
  rated: number;
  doubly_rated: number;
  agreement_rate: number | null;
}

export interface RatingPayload {
  tweet_id: number;
  rater: string;
  category: "signal" | "noise" | "not_english";
  sentiment?: number;
}

export type SubmitResult = "accepted" | "duplicate" | "invalid";

export type FetchLike = (
  input: string,
  init?: RequestInit
) => Promise<Response>;

export class ApiError extends Error {
  constructor(message: string, readonly status?: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init)
  ) {}

  /** Next unrated tweet for this rater, or null when the pool is done. */
  async fetchTask(rater: string): Promise<Task | null> {
    const res = await this.fetchImpl(
      `${this.baseUrl}/task?rater=${encodeURIComponent(rater)}`
    );
    if (res.status === 204) return null;
    if (!res.ok) throw new ApiError(`task fetch failed (${res.status})`, res.status);
    return (await res.json()) as Task;
  }

  /**
   * Submit one rating. A 409 means the server already has this rating
   * (double click, replayed retry) and is reported as "duplicate" so the
   * caller can move on; a 422 is a validation problem the caller must
   * surface.
   */
  async submitRating(payload: RatingPayload): Promise<SubmitResult> {
    const res = await this.fetchImpl(`${this.baseUrl}/annotation`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (res.status === 201) return "accepted";
    if (res.status === 409) return "duplicate";
    if (res.status === 422) return "invalid";
    throw new ApiError(`submit failed (${res.status})`, res.status);
  }

  async fetchStats(): Promise<PoolStats> {
    const res = await this.fetchImpl(`${this.baseUrl}/stats`);
    if (!res.ok) throw new ApiError(`stats fetch failed (${res.status})`, res.status);
    return (await res.json()) as PoolStats;
  }
}
