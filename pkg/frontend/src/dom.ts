// DOM rendering for the rating session. Tweet text is always assigned
// through textContent so embedded markup stays inert.

import { Category, RatingSession, SENTIMENT_MAX, SENTIMENT_MIN, ViewState } from "./session.js";
import { actionForKey } from "./keyboard.js";

export interface Elements {
  tweetText: HTMLElement;
  status: HTMLElement;
  progress: HTMLElement;
  validation: HTMLElement;
  categoryButtons: Record<Category, HTMLButtonElement>;
  sentimentRow: HTMLElement;
  sentimentSlider: HTMLInputElement;
  sentimentValue: HTMLElement;
  submitButton: HTMLButtonElement;
  retryBanner: HTMLElement;
}

export function grabElements(doc: Document): Elements {
  const get = <T extends HTMLElement>(id: string): T => {
    const el = doc.getElementById(id);
    if (!el) throw new Error(`missing element #${id}`);
    return el as T;
  };
  return {
    tweetText: get("tweet-text"),
    status: get("status"),
    progress: get("progress"),
    validation: get("validation"),
    categoryButtons: {
      signal: get<HTMLButtonElement>("cat-signal"),
      noise: get<HTMLButtonElement>("cat-noise"),
      not_english: get<HTMLButtonElement>("cat-not-english"),
    },
    sentimentRow: get("sentiment-row"),
    sentimentSlider: get<HTMLInputElement>("sentiment"),
    sentimentValue: get("sentiment-value"),
    submitButton: get<HTMLButtonElement>("submit"),
    retryBanner: get("retry-banner"),
  };
}

export function render(els: Elements, state: ViewState): void {
  const { phase, task, category, sentiment, stats } = state;

  els.retryBanner.hidden = phase !== "offline";
  els.status.textContent =
    phase === "complete"
      ? "Pool complete. Thank you!"
      : phase === "loading"
        ? "Loading next tweet…"
        : phase === "offline"
          ? `Offline. ${state.queuedCount} rating(s) queued.`
          : "";

  els.tweetText.textContent = phase === "rating" && task ? task.text : "";

  for (const [name, button] of Object.entries(els.categoryButtons)) {
    button.disabled = phase !== "rating";
    button.classList.toggle("selected", category === name);
  }

  const signalChosen = phase === "rating" && category === "signal";
  els.sentimentRow.hidden = !signalChosen;
  els.sentimentSlider.min = String(SENTIMENT_MIN);
  els.sentimentSlider.max = String(SENTIMENT_MAX);
  els.sentimentSlider.step = "1";
  els.sentimentSlider.value = String(sentiment);
  els.sentimentValue.textContent = sentiment > 0 ? `+${sentiment}` : String(sentiment);

  els.submitButton.disabled = !(
    phase === "rating" && category !== null && !state.submitting
  );
  els.validation.textContent = state.validationError ?? "";

  if (stats) {
    const agreement =
      stats.agreement_rate === null
        ? "n/a"
        : `${(stats.agreement_rate * 100).toFixed(0)}%`;
    els.progress.textContent =
      `${stats.rated}/${stats.total} rated · agreement ${agreement}`;
  } else {
    els.progress.textContent = "";
  }
}

export function bind(
  session: RatingSession,
  els: Elements,
  win: Window
): void {
  for (const [name, button] of Object.entries(els.categoryButtons)) {
    button.addEventListener("click", () =>
      session.selectCategory(name as Category)
    );
  }
  els.sentimentSlider.addEventListener("input", () =>
    session.setSentiment(Number(els.sentimentSlider.value))
  );
  els.submitButton.addEventListener("click", () => void session.submit());
  els.retryBanner.addEventListener("click", () => void session.reconnect());
  win.addEventListener("online", () => void session.reconnect());
  win.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement && event.key !== "Enter") {
      return;
    }
    const action = actionForKey(event.key);
    if (!action) return;
    event.preventDefault();
    if (action.kind === "category") session.selectCategory(action.category);
    else if (action.kind === "sentiment") session.adjustSentiment(action.delta);
    else void session.submit();
  });
}
