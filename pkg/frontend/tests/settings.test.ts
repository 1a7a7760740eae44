import { describe, expect, it } from "vitest";

import {
  DEFAULTS,
  clampK,
  resetSettings,
  snapMu,
  toOverrides,
} from "../src/settings.js";

describe("snapMu", () => {
  it("snaps to tenths", () => {
    expect(snapMu(0.34)).toBe(0.3);
    expect(snapMu(0.35)).toBe(0.4);
    expect(snapMu(0.9999)).toBe(1.0);
  });

  it("clamps to [0, 1]", () => {
    expect(snapMu(-2)).toBe(0);
    expect(snapMu(7)).toBe(1);
  });

  it("grid values are fixed points", () => {
    for (let i = 0; i <= 10; i++) {
      const mu = i / 10;
      expect(snapMu(mu)).toBe(mu);
    }
  });
});

describe("clampK", () => {
  it("floors and rejects non-positive values", () => {
    expect(clampK(3.7)).toBe(3);
    expect(clampK(0)).toBe(DEFAULTS.k);
    expect(clampK(Number.NaN)).toBe(DEFAULTS.k);
  });
});

describe("reset and overrides", () => {
  it("reset restores paragraph / k=10 / mu=0.5", () => {
    expect(resetSettings()).toEqual({ k: 10, mu: 0.5, granularity: "paragraph" });
  });

  it("overrides carry every field explicitly", () => {
    expect(toOverrides({ k: 1, mu: 0.2, granularity: "sentence" })).toEqual({
      k: 1,
      mu: 0.2,
      granularity: "sentence",
    });
  });
});
