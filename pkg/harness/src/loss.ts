/**
 * Training losses and their analytic gradients.
 *
 * The value formulas mirror the engine's reference implementations exactly
 * (soft dice with epsilon in numerator and denominator, mean BCE with
 * probability clipping), so the cross-implementation check can demand
 * 1e-5 agreement. Gradients are with respect to the probabilities; the
 * model composes them with the sigmoid derivative to get logit gradients.
 */

export const DICE_EPSILON = 1e-6;
export const BCE_CLIP = 1e-7;

function checkLengths(p: Float64Array, g: Uint8Array): void {
  if (p.length !== g.length) {
    throw new Error(`prob and gt must have identical length, got ${p.length} vs ${g.length}`);
  }
  if (p.length === 0) {
    throw new Error("loss inputs must be nonempty");
  }
}

/** 1 - (2*sum(p*g) + eps) / (sum(p) + sum(g) + eps) */
export function diceLoss(p: Float64Array, g: Uint8Array, epsilon: number = DICE_EPSILON): number {
  checkLengths(p, g);
  let inter = 0;
  let sumP = 0;
  let sumG = 0;
  for (let i = 0; i < p.length; i++) {
    inter += p[i] * g[i];
    sumP += p[i];
    sumG += g[i];
  }
  return 1.0 - (2.0 * inter + epsilon) / (sumP + sumG + epsilon);
}

/** Mean of -(g*ln(p) + (1-g)*ln(1-p)) with p clipped to [clip, 1-clip]. */
export function bceLoss(p: Float64Array, g: Uint8Array, clip: number = BCE_CLIP): number {
  checkLengths(p, g);
  let total = 0;
  for (let i = 0; i < p.length; i++) {
    const pc = Math.min(Math.max(p[i], clip), 1.0 - clip);
    total += g[i] ? Math.log(pc) : Math.log(1.0 - pc);
  }
  return -total / p.length;
}

export interface LossBreakdown {
  loss: number;
  dice: number;
  bce: number;
  /** d(dice + bce)/dp per pixel. */
  gradP: Float64Array;
}

export function combinedLoss(p: Float64Array, g: Uint8Array): LossBreakdown {
  checkLengths(p, g);
  const n = p.length;
  let inter = 0;
  let sumP = 0;
  let sumG = 0;
  for (let i = 0; i < n; i++) {
    inter += p[i] * g[i];
    sumP += p[i];
    sumG += g[i];
  }
  const num = 2.0 * inter + DICE_EPSILON;
  const den = sumP + sumG + DICE_EPSILON;
  const dice = 1.0 - num / den;

  const gradP = new Float64Array(n);
  let bceTotal = 0;
  const lo = BCE_CLIP;
  const hi = 1.0 - BCE_CLIP;
  for (let i = 0; i < n; i++) {
    // dice term: d/dp_i [1 - num/den] = -(2*g_i*den - num) / den^2
    gradP[i] = -(2.0 * g[i] * den - num) / (den * den);
    const pi = p[i];
    const pc = Math.min(Math.max(pi, lo), hi);
    bceTotal += g[i] ? Math.log(pc) : Math.log(1.0 - pc);
    if (pi > lo && pi < hi) {
      // clipped pixels contribute zero slope, matching the value formula
      gradP[i] += (g[i] ? -1.0 / pc : 1.0 / (1.0 - pc)) / n;
    }
  }
  const bce = -bceTotal / n;
  return { loss: dice + bce, dice, bce, gradP };
}

export function sigmoid(z: number): number {
  return z >= 0 ? 1.0 / (1.0 + Math.exp(-z)) : Math.exp(z) / (1.0 + Math.exp(z));
}
