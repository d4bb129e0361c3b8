/**
 * Node color encoding: hue carries the interest-surprise difference,
 * saturation carries their sum.
 *
 * Scores arrive as server-computed divergences. For display, surprise is
 * normalized by the feature-weight total (its upper bound), and interest
 * divergence is flipped into a similarity, 1 - r / total, so that larger
 * always means "more". The hue axis then runs from the surprise hue
 * (difference -1) through the midpoint to the interest hue (difference
 * +1); with the default legend that midpoint is purple, between blue
 * (surprising) and red (interesting). Saturation grows linearly with the
 * sum of both normalized scores, so jointly high-scoring nodes are the
 * most vibrant.
 */

export interface LegendParams {
  hueSurprise: number; // degrees, difference = -1
  hueInterest: number; // degrees (may exceed 360 to pick the wheel direction)
  lightness: number; // percent
}

export const DEFAULT_LEGEND: LegendParams = {
  hueSurprise: 240, // blue
  hueInterest: 360, // red, reached through purple at the midpoint
  lightness: 55,
};

export interface NodeColor {
  hue: number; // degrees in [0, 360)
  saturation: number; // percent in [0, 100]
  lightness: number;
  css: string;
}

const clamp01 = (x: number) => Math.min(1, Math.max(0, x));

/** Surprise divergence normalized to [0, 1] by the weight total. */
export function normalizedSurprise(surprise: number | null, lambdaTotal: number): number {
  if (surprise === null || lambdaTotal <= 0) return 0;
  return clamp01(surprise / lambdaTotal);
}

/**
 * Interest divergence flipped into a similarity in [0, 1]; absent interest
 * (cold session, surprise-only ranking) reads as zero similarity.
 */
export function interestSimilarity(interest: number | null, lambdaTotal: number): number {
  if (interest === null || lambdaTotal <= 0) return 0;
  return clamp01(1 - interest / lambdaTotal);
}

/**
 * Pure mapping (surpriseNorm, interestNorm, legend) -> color. Hue is a
 * function of the difference alone; saturation of the sum alone.
 */
export function scoreColor(
  surpriseNorm: number,
  interestNorm: number,
  legend: LegendParams = DEFAULT_LEGEND,
): NodeColor {
  const s = clamp01(surpriseNorm);
  const i = clamp01(interestNorm);
  const difference = i - s; // in [-1, 1]
  const sum = i + s; // in [0, 2]
  const t = (difference + 1) / 2;
  const hue = (legend.hueSurprise + t * (legend.hueInterest - legend.hueSurprise)) % 360;
  const saturation = 100 * clamp01(sum / 2);
  return {
    hue,
    saturation,
    lightness: legend.lightness,
    css: `hsl(${hue.toFixed(1)}, ${saturation.toFixed(1)}%, ${legend.lightness}%)`,
  };
}

/** Convenience wrapper working on raw server scores. */
export function colorForScores(
  surprise: number | null,
  interest: number | null,
  lambdaTotal: number,
  legend: LegendParams = DEFAULT_LEGEND,
): NodeColor {
  return scoreColor(
    normalizedSurprise(surprise, lambdaTotal),
    interestSimilarity(interest, lambdaTotal),
    legend,
  );
}
