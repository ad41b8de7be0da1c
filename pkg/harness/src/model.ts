/**
 * Toy prompt-conditioned segmenter.
 *
 * A per-pixel logistic model over handcrafted channels: the raw image
 * intensity, box-blurred intensity at several scales, and blurred disk
 * stamps of the positive and negative clicks at the same scales. The blur
 * scales are the capacity knob. There is no learned encoder; the point is
 * a trainable stand-in that genuinely responds to click prompts, cheap
 * enough to train full-batch in seconds and exactly reproducible (fixed
 * iteration order, float64 accumulation, no RNG anywhere in training).
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { blur } from "./blur.js";
import { combinedLoss, sigmoid } from "./loss.js";
import { Manifest, ManifestEntry, imageFile, maskFiles, readManifest, subset } from "./manifest.js";
import { readGray, readMask, writeMask } from "./png.js";
import { clickChannel, clickCloseness, readPromptFile } from "./prompts.js";

export interface SegmenterConfig {
  /** (width, height); must match the frame the engine was run with. */
  frame: [number, number];
  /** Radius of the disk stamped for each click, in pixels. */
  clickRadius: number;
  /** Box-blur radii for the intensity and click channels (capacity knob). */
  blurScales: number[];
  epochs: number;
  learningRate: number;
  /** Recorded for provenance; training itself is RNG-free. */
  seed: number;
}

export const defaultConfig: SegmenterConfig = {
  frame: [128, 128],
  clickRadius: 3,
  blurScales: [2, 6, 14],
  epochs: 60,
  learningRate: 0.1,
  seed: 0,
};

export function featureCount(config: SegmenterConfig): number {
  // bias, intensity, blurred intensity per scale, one raw disk stamp per
  // click polarity, 5 coordinate features, 2 closeness scales per polarity
  return 2 + config.blurScales.length + 2 + 5 + 4;
}

export interface EpochPoint {
  epoch: number;
  loss: number;
  dice: number;
  bce: number;
}

export interface TrainResult {
  weights: Float64Array;
  /** Loss evaluated at the weights entering each epoch, before its update. */
  curve: EpochPoint[];
  /** Loss evaluated at the final weights. */
  final: { loss: number; dice: number; bce: number };
}

interface Sample {
  entry: ManifestEntry;
  npix: number;
  /** Feature-major: features[f * npix + i]. */
  features: Float32Array;
  gt: Uint8Array;
}

function loadGroundTruth(m: Manifest, e: ManifestEntry, frame: [number, number]): Uint8Array {
  const [w, h] = frame;
  let union: Uint8Array | null = null;
  for (const file of maskFiles(m, e)) {
    const mask = readMask(file);
    if (mask.width !== w || mask.height !== h) {
      throw new Error(
        `mask ${file} is ${mask.width}x${mask.height}, expected frame ${w}x${h}`,
      );
    }
    if (union === null) {
      union = mask.data;
    } else {
      for (let i = 0; i < union.length; i++) {
        union[i] = union[i] | mask.data[i];
      }
    }
  }
  if (union === null) {
    throw new Error(`entry ${e.imageId} has no mask files`);
  }
  return union;
}

function buildFeatures(
  m: Manifest, e: ManifestEntry, promptDir: string, config: SegmenterConfig,
): Float32Array {
  const [w, h] = config.frame;
  const npix = w * h;
  const img = readGray(imageFile(m, e));
  if (img.width !== w || img.height !== h) {
    throw new Error(
      `image ${e.imageId} is ${img.width}x${img.height}, expected frame ${w}x${h}`,
    );
  }
  const promptFile = path.join(promptDir, `${e.imageId}.prompts`);
  if (!fs.existsSync(promptFile)) {
    throw new Error(`missing prompt file for ${e.imageId}: ${promptFile}`);
  }
  const ps = readPromptFile(promptFile);
  if (ps.frame[0] !== w || ps.frame[1] !== h) {
    throw new Error(
      `prompt frame ${ps.frame[0]}x${ps.frame[1]} for ${e.imageId} does not match ${w}x${h}`,
    );
  }

  const intensity = new Float64Array(npix);
  for (let i = 0; i < npix; i++) {
    intensity[i] = img.data[i] / 255.0;
  }
  const pos = clickChannel(ps, 1, config.clickRadius);
  const neg = clickChannel(ps, -1, config.clickRadius);

  const channels: Float64Array[] = [intensity];
  for (const s of config.blurScales) {
    channels.push(blur(intensity, w, h, s));
  }
  // Click channels stay unblurred: a blurred stamp's mass grows with the
  // click count, so weights trained on sparse prompts would overshoot on
  // denser ones. Disk stamps and closeness maxima are count-stable.
  channels.push(pos, neg);

  // Quadratic pixel coordinates let one logistic layer carve a conic
  // boundary; click distances make the decision sharpen around prompts.
  const xs = new Float64Array(npix);
  const ys = new Float64Array(npix);
  const x2 = new Float64Array(npix);
  const y2 = new Float64Array(npix);
  const xy = new Float64Array(npix);
  for (let y = 0; y < h; y++) {
    const v = h > 1 ? y / (h - 1) : 0;
    for (let x = 0; x < w; x++) {
      const u = w > 1 ? x / (w - 1) : 0;
      const i = y * w + x;
      xs[i] = u;
      ys[i] = v;
      x2[i] = u * u;
      y2[i] = v * v;
      xy[i] = u * v;
    }
  }
  channels.push(xs, ys, x2, y2, xy);

  for (const tau of [2, 5]) {
    channels.push(clickCloseness(ps, 1, tau));
  }
  for (const tau of [2, 5]) {
    channels.push(clickCloseness(ps, -1, tau));
  }

  const nFeat = featureCount(config);
  const out = new Float32Array(nFeat * npix);
  out.fill(1.0, 0, npix); // feature 0 is the bias
  for (let f = 0; f < channels.length; f++) {
    out.set(channels[f], (f + 1) * npix);
  }
  return out;
}

function loadSamples(
  m: Manifest, entries: ManifestEntry[], promptDir: string, config: SegmenterConfig,
): Sample[] {
  const [w, h] = config.frame;
  return entries.map((entry) => ({
    entry,
    npix: w * h,
    features: buildFeatures(m, entry, promptDir, config),
    gt: loadGroundTruth(m, entry, config.frame),
  }));
}

function forwardLogits(weights: Float64Array, s: Sample): Float64Array {
  const logits = new Float64Array(s.npix);
  for (let f = 0; f < weights.length; f++) {
    const wf = weights[f];
    if (wf === 0) {
      continue;
    }
    const base = f * s.npix;
    for (let i = 0; i < s.npix; i++) {
      logits[i] += wf * s.features[base + i];
    }
  }
  return logits;
}

function probsOf(logits: Float64Array): Float64Array {
  const p = new Float64Array(logits.length);
  for (let i = 0; i < logits.length; i++) {
    p[i] = sigmoid(logits[i]);
  }
  return p;
}

export interface TrainOptions {
  manifestFile: string;
  promptDir: string;
  config: SegmenterConfig;
  initWeights?: Float64Array;
  split?: "train" | "test" | "all";
  /**
   * Called after each weight update. Return true to signal that the prompt
   * files under promptDir changed and click features must be rebuilt (the
   * per-epoch prompt-regeneration variant).
   */
  afterEpoch?: (epoch: number, weights: Float64Array) => boolean;
}

export function trainStage(opts: TrainOptions): TrainResult {
  const config = opts.config;
  const m = readManifest(opts.manifestFile);
  const entries = subset(m, opts.split ?? "train");
  if (entries.length === 0) {
    throw new Error(`no ${opts.split ?? "train"} entries in ${opts.manifestFile}`);
  }
  let samples = loadSamples(m, entries, opts.promptDir, config);

  const nFeat = featureCount(config);
  const weights = opts.initWeights
    ? Float64Array.from(opts.initWeights)
    : new Float64Array(nFeat);
  if (weights.length !== nFeat) {
    throw new Error(`init weights have ${weights.length} entries, expected ${nFeat}`);
  }
  if (!opts.initWeights) {
    // Start the bias at the foreground log-odds. A zero init spends the
    // first epochs collapsing toward all-background (the bce majority
    // attractor) while the dice term climbs; starting at the base rate
    // removes that hump and keeps the loss curve monotone.
    let fg = 0;
    let tot = 0;
    for (const s of samples) {
      for (let i = 0; i < s.npix; i++) {
        fg += s.gt[i];
      }
      tot += s.npix;
    }
    const q = Math.min(0.5, Math.max(1e-4, fg / tot));
    weights[0] = Math.log(q / (1.0 - q));
  }

  // Full-batch Adam direction with a backtracking step: a step is applied
  // only if it does not increase the full-batch loss, halving otherwise.
  // This makes the per-epoch loss non-increasing by construction.
  // Deterministic throughout: fixed sample order, float64 state, no RNG.
  const beta1 = 0.9;
  const beta2 = 0.999;
  const adamEps = 1e-8;
  const maxHalvings = 30;
  const m1 = new Float64Array(nFeat);
  const m2 = new Float64Array(nFeat);

  interface Evaluated {
    loss: number;
    dice: number;
    bce: number;
    ps: Float64Array[];
  }
  const evaluate = (w: Float64Array): Evaluated => {
    let lossSum = 0;
    let diceSum = 0;
    let bceSum = 0;
    const ps: Float64Array[] = [];
    for (const s of samples) {
      const p = probsOf(forwardLogits(w, s));
      const r = combinedLoss(p, s.gt);
      lossSum += r.loss;
      diceSum += r.dice;
      bceSum += r.bce;
      ps.push(p);
    }
    const n = samples.length;
    return { loss: lossSum / n, dice: diceSum / n, bce: bceSum / n, ps };
  };

  let cur = evaluate(weights);
  const curve: EpochPoint[] = [];
  for (let epoch = 1; epoch <= config.epochs; epoch++) {
    curve.push({ epoch, loss: cur.loss, dice: cur.dice, bce: cur.bce });

    // Gradient at the current weights, reusing the cached probabilities.
    const grad = new Float64Array(nFeat);
    for (let si = 0; si < samples.length; si++) {
      const s = samples[si];
      const p = cur.ps[si];
      const { gradP } = combinedLoss(p, s.gt);
      for (let i = 0; i < s.npix; i++) {
        gradP[i] *= p[i] * (1.0 - p[i]); // now d(loss)/d(logit)
      }
      for (let f = 0; f < nFeat; f++) {
        const base = f * s.npix;
        let acc = 0;
        for (let i = 0; i < s.npix; i++) {
          acc += gradP[i] * s.features[base + i];
        }
        grad[f] += acc;
      }
    }

    const n = samples.length;
    const dir = new Float64Array(nFeat);
    for (let f = 0; f < nFeat; f++) {
      const g = grad[f] / n;
      m1[f] = beta1 * m1[f] + (1.0 - beta1) * g;
      m2[f] = beta2 * m2[f] + (1.0 - beta2) * g * g;
      const c1 = m1[f] / (1.0 - Math.pow(beta1, epoch));
      const c2 = m2[f] / (1.0 - Math.pow(beta2, epoch));
      dir[f] = c1 / (Math.sqrt(c2) + adamEps);
    }

    let scale = config.learningRate;
    const trialW = new Float64Array(nFeat);
    for (let t = 0; t < maxHalvings; t++) {
      for (let f = 0; f < nFeat; f++) {
        trialW[f] = weights[f] - scale * dir[f];
      }
      const trial = evaluate(trialW);
      if (trial.loss <= cur.loss) {
        weights.set(trialW);
        cur = trial;
        break;
      }
      scale /= 2;
    }
    // All halvings rejected leaves the weights (and loss) unchanged.

    if (opts.afterEpoch && opts.afterEpoch(epoch, weights)) {
      samples = loadSamples(m, entries, opts.promptDir, config);
      cur = evaluate(weights);
    }
  }

  return {
    weights,
    curve,
    final: { loss: cur.loss, dice: cur.dice, bce: cur.bce },
  };
}

export interface Checkpoint {
  version: 1;
  config: SegmenterConfig;
  weights: number[];
}

export function saveCheckpoint(file: string, config: SegmenterConfig, weights: Float64Array): void {
  const ckpt: Checkpoint = { version: 1, config, weights: Array.from(weights) };
  fs.mkdirSync(path.dirname(file), { recursive: true });
  fs.writeFileSync(file, JSON.stringify(ckpt, null, 2) + "\n", "utf-8");
}

export function loadCheckpoint(file: string): { config: SegmenterConfig; weights: Float64Array } {
  const raw = JSON.parse(fs.readFileSync(file, "utf-8")) as Checkpoint;
  if (raw.version !== 1) {
    throw new Error(`unsupported checkpoint version ${raw.version} in ${file}`);
  }
  return { config: raw.config, weights: Float64Array.from(raw.weights) };
}

export interface ExportOptions {
  weights: Float64Array;
  manifestFile: string;
  promptDir: string;
  outDir: string;
  config: SegmenterConfig;
  threshold?: number;
  split?: "train" | "test" | "all";
}

/** Write one binarized prediction PNG per entry, in the engine's layout. */
export function exportPredictions(opts: ExportOptions): number {
  const threshold = opts.threshold ?? 0.5;
  const m = readManifest(opts.manifestFile);
  const entries = subset(m, opts.split ?? "all");
  const [w, h] = opts.config.frame;
  fs.mkdirSync(opts.outDir, { recursive: true });
  for (const entry of entries) {
    const features = buildFeatures(m, entry, opts.promptDir, opts.config);
    const sample: Sample = { entry, npix: w * h, features, gt: new Uint8Array(0) };
    const p = probsOf(forwardLogits(opts.weights, sample));
    const mask = new Uint8Array(w * h);
    for (let i = 0; i < mask.length; i++) {
      mask[i] = p[i] > threshold ? 1 : 0;
    }
    writeMask(path.join(opts.outDir, `${entry.imageId}.png`), w, h, mask);
  }
  return entries.length;
}
