import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { OfflineQueue } from "../src/queue.js";
import { RatingSession } from "../src/session.js";
import { actionForKey } from "../src/keyboard.js";
import { FakeService, MemoryStorage, makePool } from "./helpers.js";

function makeSession(service: FakeService, rater = "a") {
  const api = new ApiClient("", service.fetch);
  const queue = new OfflineQueue(new MemoryStorage());
  return new RatingSession(api, queue, rater);
}

describe("RatingSession", () => {
  it("loads the first task on start", async () => {
    const session = makeSession(new FakeService(makePool(2)));
    await session.start();
    expect(session.view.phase).toBe("rating");
    expect(session.view.task?.tweet_id).toBe(1);
  });

  it("requires a category before submitting", async () => {
    const service = new FakeService(makePool(1));
    const session = makeSession(service);
    await session.start();
    expect(session.canSubmit).toBe(false);
    await session.submit(); // no-op
    expect(service.posts).toBe(0);
    session.selectCategory("noise");
    expect(session.canSubmit).toBe(true);
  });

  it("sends sentiment only for signal ratings", async () => {
    const service = new FakeService(makePool(2));
    const session = makeSession(service);
    await session.start();
    session.selectCategory("signal");
    session.setSentiment(-4);
    expect(session.buildPayload()).toEqual({
      tweet_id: 1,
      rater: "a",
      category: "signal",
      sentiment: -4,
    });
    await session.submit();
    session.selectCategory("noise");
    expect(session.buildPayload()).toEqual({
      tweet_id: 2,
      rater: "a",
      category: "noise",
    });
  });

  it("snaps sentiment to integers inside [-5, 5]", async () => {
    const session = makeSession(new FakeService(makePool(1)));
    await session.start();
    session.setSentiment(2.4);
    expect(session.view.sentiment).toBe(2);
    session.setSentiment(99);
    expect(session.view.sentiment).toBe(5);
    session.adjustSentiment(-1000);
    expect(session.view.sentiment).toBe(-5);
  });

  it("rapid double submit produces exactly one POST", async () => {
    const service = new FakeService(makePool(1));
    const session = makeSession(service);
    await session.start();
    session.selectCategory("noise");
    await Promise.all([session.submit(), session.submit()]);
    expect(service.posts).toBe(1);
    expect(service.ratings).toHaveLength(1);
  });

  it("handles a 409 from a replayed retry silently", async () => {
    const service = new FakeService(makePool(2));
    const session = makeSession(service);
    await session.start();
    // another tab already delivered this rating
    service.ratings.push({ tweet_id: 1, rater: "a", category: "noise" });
    session.selectCategory("noise");
    await session.submit();
    expect(session.view.validationError).toBeNull();
    expect(session.view.phase).toBe("rating"); // moved on to tweet 2
    expect(session.view.task?.tweet_id).toBe(2);
  });

  it("surfaces 422 as an inline validation message and stays on task", async () => {
    const service = new FakeService(makePool(1));
    let reject422Once = true;
    const flaky = new ApiClient("", async (input, init) => {
      if (String(input).includes("/annotation") && reject422Once) {
        reject422Once = false;
        return new Response(JSON.stringify({ error: "bad" }), { status: 422 });
      }
      return service.fetch(input, init);
    });
    const session = new RatingSession(
      flaky, new OfflineQueue(new MemoryStorage()), "a"
    );
    await session.start();
    const taskId = session.view.task?.tweet_id;
    session.selectCategory("signal");
    session.setSentiment(5);
    await session.submit();
    expect(session.view.validationError).toMatch(/rejected/);
    expect(session.view.phase).toBe("rating");
    expect(session.view.task?.tweet_id).toBe(taskId); // same tweet, retryable
    await session.submit();
    expect(session.view.validationError).toBeNull();
    expect(service.ratings).toHaveLength(1);
  });

  it("queues the rating when the network drops and flushes on reconnect", async () => {
    const service = new FakeService(makePool(2));
    const session = makeSession(service);
    await session.start();
    session.selectCategory("signal");
    session.setSentiment(3);
    service.online = false;
    await session.submit();
    expect(session.view.phase).toBe("offline");
    expect(session.view.queuedCount).toBe(1);
    expect(service.ratings).toHaveLength(0);

    service.online = true;
    await session.reconnect();
    expect(service.ratings).toHaveLength(1);
    expect(service.ratings[0]).toEqual({
      tweet_id: 1,
      rater: "a",
      category: "signal",
      sentiment: 3,
    });
    expect(session.view.queuedCount).toBe(0);
    expect(session.view.phase).toBe("rating");
    expect(session.view.task?.tweet_id).toBe(2);
  });

  it("shows completion when the pool is exhausted", async () => {
    const service = new FakeService(makePool(1));
    const session = makeSession(service);
    await session.start();
    session.selectCategory("noise");
    await session.submit();
    expect(session.view.phase).toBe("complete");
  });

  it("resets category and sentiment between tasks", async () => {
    const service = new FakeService(makePool(2));
    const session = makeSession(service);
    await session.start();
    session.selectCategory("signal");
    session.setSentiment(4);
    await session.submit();
    expect(session.view.category).toBeNull();
    expect(session.view.sentiment).toBe(0);
  });

  it("tracks progress optimistically and reconciles with stats", async () => {
    const service = new FakeService(makePool(3));
    const session = makeSession(service);
    await session.start();
    expect(session.view.stats?.rated).toBe(0);
    session.selectCategory("noise");
    await session.submit();
    expect(session.view.stats?.rated).toBe(1); // reconciled from the service
  });
});

describe("two-rater scripted session", () => {
  it("rates a 20-tweet pool as two raters: 40 ratings, no duplicates", async () => {
    const service = new FakeService(makePool(20));
    for (const rater of ["worker-1", "worker-2"]) {
      const session = makeSession(service, rater);
      await session.start();
      while (session.view.phase === "rating") {
        const pick = (session.view.task!.tweet_id + rater.length) % 3;
        if (pick === 0) {
          session.selectCategory("signal");
          session.setSentiment((session.view.task!.tweet_id % 11) - 5);
        } else {
          session.selectCategory(pick === 1 ? "noise" : "not_english");
        }
        const submitOnce = session.submit();
        void session.submit(); // double click
        await submitOnce;
      }
      expect(session.view.phase).toBe("complete");
    }
    expect(service.ratings).toHaveLength(40);
    const keys = new Set(service.ratings.map((r) => `${r.tweet_id}:${r.rater}`));
    expect(keys.size).toBe(40);
    for (const rating of service.ratings) {
      expect(rating.sentiment !== undefined).toBe(rating.category === "signal");
    }
  });
});

describe("keyboard shortcuts", () => {
  it("maps the documented keys", () => {
    expect(actionForKey("1")).toEqual({ kind: "category", category: "signal" });
    expect(actionForKey("2")).toEqual({ kind: "category", category: "noise" });
    expect(actionForKey("3")).toEqual({
      kind: "category",
      category: "not_english",
    });
    expect(actionForKey("ArrowUp")).toEqual({ kind: "sentiment", delta: 1 });
    expect(actionForKey("ArrowDown")).toEqual({ kind: "sentiment", delta: -1 });
    expect(actionForKey("Enter")).toEqual({ kind: "submit" });
    expect(actionForKey("x")).toBeNull();
  });
});
