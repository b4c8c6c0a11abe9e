import { ApiClient } from "./api.js";
import { OfflineQueue } from "./queue.js";
import { RatingSession } from "./session.js";
import { bind, grabElements, render } from "./dom.js";

function raterId(): string {
  const params = new URLSearchParams(window.location.search);
  const fromUrl = params.get("rater");
  if (fromUrl) return fromUrl;
  const stored = window.localStorage.getItem("cohort-miner.rater");
  if (stored) return stored;
  const entered = window.prompt("Rater id:") || `rater-${Date.now()}`;
  window.localStorage.setItem("cohort-miner.rater", entered);
  return entered;
}

const els = grabElements(document);
const api = new ApiClient("..");  // service root; the UI lives under /ui
const queue = new OfflineQueue(window.localStorage);
const session = new RatingSession(api, queue, raterId(), (state) =>
  render(els, state)
);
bind(session, els, window);
void session.start();
