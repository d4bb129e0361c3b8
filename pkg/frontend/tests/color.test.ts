import { describe, expect, it } from "vitest";

import {
  DEFAULT_LEGEND,
  colorForScores,
  interestSimilarity,
  normalizedSurprise,
  scoreColor,
} from "../src/color.js";

describe("score color mapping", () => {
  it("hue depends only on the interest-surprise difference", () => {
    // same difference, wildly different sums
    const pairs: Array<[number, number]> = [
      [0.1, 0.3],
      [0.4, 0.6],
      [0.7, 0.9],
    ];
    const hues = pairs.map(([s, i]) => scoreColor(s, i).hue);
    expect(new Set(hues.map((h) => h.toFixed(9))).size).toBe(1);
    // a different difference moves the hue
    expect(scoreColor(0.3, 0.1).hue).not.toBeCloseTo(hues[0], 6);
  });

  it("saturation depends only on the sum", () => {
    const pairs: Array<[number, number]> = [
      [0.2, 0.6],
      [0.4, 0.4],
      [0.6, 0.2],
    ];
    const sats = pairs.map(([s, i]) => scoreColor(s, i).saturation);
    expect(new Set(sats.map((x) => x.toFixed(9))).size).toBe(1);
    expect(scoreColor(0.1, 0.1).saturation).toBeLessThan(sats[0]);
  });

  it("runs from the surprise hue through purple to the interest hue", () => {
    expect(scoreColor(1, 0).hue).toBeCloseTo(240); // pure surprise: blue
    expect(scoreColor(0, 1).hue).toBeCloseTo(0); // pure interest: red (360 wraps)
    expect(scoreColor(1, 1).hue).toBeCloseTo(300); // balanced and strong: purple
    expect(scoreColor(1, 1).saturation).toBeCloseTo(100);
    expect(scoreColor(0, 0).saturation).toBeCloseTo(0);
  });

  it("clamps out-of-range inputs", () => {
    expect(scoreColor(5, -3).hue).toBeCloseTo(scoreColor(1, 0).hue);
    expect(scoreColor(5, 5).saturation).toBeCloseTo(100);
  });

  it("normalizes raw server scores by the weight total", () => {
    expect(normalizedSurprise(1.0, 4)).toBeCloseTo(0.25);
    expect(normalizedSurprise(null, 4)).toBe(0);
    expect(interestSimilarity(0, 4)).toBe(1); // zero divergence: perfect match
    expect(interestSimilarity(4, 4)).toBe(0);
    expect(interestSimilarity(null, 4)).toBe(0);
  });

  it("colorForScores is the composition of normalization and the mapping", () => {
    const direct = colorForScores(1.0, 1.0, 2.0);
    const manual = scoreColor(normalizedSurprise(1.0, 2.0), interestSimilarity(1.0, 2.0));
    expect(direct.css).toBe(manual.css);
  });

  it("legend parameters steer the wheel", () => {
    const legend = { ...DEFAULT_LEGEND, hueSurprise: 180, hueInterest: 240 };
    expect(scoreColor(1, 0, legend).hue).toBeCloseTo(180);
    expect(scoreColor(0, 1, legend).hue).toBeCloseTo(240);
  });

  it("emits a css hsl string", () => {
    expect(scoreColor(0.5, 0.5).css).toMatch(/^hsl\(\d+(\.\d+)?, \d+(\.\d+)?%, \d+%\)$/);
  });
});
