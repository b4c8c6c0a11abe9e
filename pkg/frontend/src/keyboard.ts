// Keyboard shortcuts for rating throughput: 1/2/3 pick the category,
// arrow keys move the sentiment slider, Enter submits.

import { Category } from "./session.js";

export type KeyAction =
  | { kind: "category"; category: Category }
  | { kind: "sentiment"; delta: number }
  | { kind: "submit" }
  | null;

export function actionForKey(key: string): KeyAction {
  switch (key) {
    case "1":
      return { kind: "category", category: "signal" };
    case "2":
      return { kind: "category", category: "noise" };
    case "3":
      return { kind: "category", category: "not_english" };
    case "ArrowUp":
    case "ArrowRight":
      return { kind: "sentiment", delta: 1 };
    case "ArrowDown":
    case "ArrowLeft":
      return { kind: "sentiment", delta: -1 };
    case "Enter":
      return { kind: "submit" };
    default:
      return null;
  }
}
