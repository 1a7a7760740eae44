/** Retrieval settings panel state: k, mu (tenth increments), granularity. */

import type { AskOverrides } from "./api.js";

export interface Settings {
  k: number;
  mu: number;
  granularity: string;
}

export const DEFAULTS: Settings = Object.freeze({
  k: 10,
  mu: 0.5,
  granularity: "paragraph",
});

export const GRANULARITIES = ["article", "paragraph", "sentence"];

/** Snap a slider value to the tenths grid 0.0..1.0. */
export function snapMu(value: number): number {
  if (!Number.isFinite(value)) return DEFAULTS.mu;
  const clamped = Math.min(1, Math.max(0, value));
  return Math.round(clamped * 10) / 10;
}

export function clampK(value: number): number {
  if (!Number.isFinite(value) || value < 1) return DEFAULTS.k;
  return Math.floor(value);
}

export function resetSettings(): Settings {
  return { ...DEFAULTS };
}

/** Overrides for the next /ask request; always explicit so responses
 * echo exactly what the panel shows. */
export function toOverrides(s: Settings): AskOverrides {
  return { k: s.k, mu: s.mu, granularity: s.granularity };
}
