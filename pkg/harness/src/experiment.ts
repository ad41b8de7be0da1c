/**
 * The two-stage experiment: train on automatic first-round clicks, export
 * predictions, ask the engine for correction clicks against those
 * predictions, retrain warm-started, and compare both models on the held-out
 * test split.
 *
 * Everything the engine produces or consumes goes through files (manifests,
 * prompt sets, mask PNGs, report TSVs) and its command line; nothing here
 * imports engine internals.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { parseEvalReport, runEngine, EvalRow } from "./engine.js";
import {
  SegmenterConfig,
  TrainResult,
  exportPredictions,
  loadCheckpoint,
  saveCheckpoint,
  trainStage,
} from "./model.js";

export interface ExperimentOptions {
  /** Image corpus root. Synthesized here when it does not exist yet. */
  root: string;
  /** Scratch directory for manifests, prompts, checkpoints, reports. */
  workDir: string;
  config: SegmenterConfig;
  /** Corpus synthesis knobs, used only when root has to be created. */
  corpusCount?: number;
  corpusSeed?: number;
  splitSeed?: number;
  /**
   * Variant: re-export predictions and regenerate correction clicks after
   * every stage-2 epoch instead of freezing them once. Costs one engine
   * invocation per epoch.
   */
  regenPerEpoch?: boolean;
  log?: (line: string) => void;
}

export interface ExperimentResult {
  stage1: TrainResult;
  stage2: TrainResult;
  stage1Eval: { rows: EvalRow[]; mean: EvalRow };
  stage2Eval: { rows: EvalRow[]; mean: EvalRow };
  comparisonFile: string;
  workDir: string;
}

function frameFlag(config: SegmenterConfig): string {
  return `${config.frame[0]}x${config.frame[1]}`;
}

function writeLossCurve(file: string, result: TrainResult): void {
  const lines = ["epoch\tloss\tdice\tbce"];
  for (const p of result.curve) {
    lines.push(`${p.epoch}\t${p.loss.toFixed(6)}\t${p.dice.toFixed(6)}\t${p.bce.toFixed(6)}`);
  }
  const f = result.final;
  lines.push(`final\t${f.loss.toFixed(6)}\t${f.dice.toFixed(6)}\t${f.bce.toFixed(6)}`);
  fs.writeFileSync(file, lines.join("\n") + "\n", "utf-8");
}

function writeComparison(
  file: string,
  stage1: { rows: EvalRow[]; mean: EvalRow },
  stage2: { rows: EvalRow[]; mean: EvalRow },
): void {
  const byId = new Map(stage2.rows.map((r) => [r.imageId, r]));
  const lines = [
    "image_id\tclass_label\tmask_iou_stage1\tmask_iou_stage2\tbbox_iou_stage1\tbbox_iou_stage2",
  ];
  const fmt = (r1: EvalRow, r2: EvalRow) =>
    `${r1.imageId}\t${r1.classLabel}\t${r1.maskIou.toFixed(6)}\t${r2.maskIou.toFixed(6)}`
    + `\t${r1.bboxIou.toFixed(6)}\t${r2.bboxIou.toFixed(6)}`;
  for (const r1 of stage1.rows) {
    const r2 = byId.get(r1.imageId);
    if (!r2) {
      throw new Error(`image ${r1.imageId} is missing from the stage-2 report`);
    }
    lines.push(fmt(r1, r2));
  }
  lines.push(fmt(stage1.mean, stage2.mean));
  fs.writeFileSync(file, lines.join("\n") + "\n", "utf-8");
}

export function twoStageExperiment(opts: ExperimentOptions): ExperimentResult {
  const log = opts.log ?? (() => {});
  const config = opts.config;
  const work = opts.workDir;
  fs.mkdirSync(work, { recursive: true });

  if (!fs.existsSync(opts.root)) {
    log(`synthesizing corpus at ${opts.root}`);
    runEngine([
      "make-synthetic", opts.root,
      "--count", String(opts.corpusCount ?? 220),
      "--size", String(config.frame[0]),
      "--seed", String(opts.corpusSeed ?? 0),
    ]);
  }

  const manifest = path.join(work, "manifest.tsv");
  const split = path.join(work, "split.tsv");
  log("scanning corpus");
  runEngine(["scan", opts.root, "--out", manifest]);
  log("splitting");
  runEngine(["split", manifest, "--out", split, "--seed", String(opts.splitSeed ?? 0)]);

  const stage1Dir = path.join(work, "stage1");
  log("generating first-round clicks");
  runEngine(["stage1", split, "--out-dir", stage1Dir, "--frame", frameFlag(config)]);

  log(`training stage 1 (${config.epochs} epochs)`);
  const stage1 = trainStage({ manifestFile: split, promptDir: stage1Dir, config });
  const ckpt1 = path.join(work, "checkpoint_stage1.json");
  saveCheckpoint(ckpt1, config, stage1.weights);
  writeLossCurve(path.join(work, "loss_stage1.tsv"), stage1);
  log(`stage 1 final loss ${stage1.final.loss.toFixed(4)}`);

  const preds1 = path.join(work, "preds_stage1");
  log("exporting stage-1 predictions");
  exportPredictions({
    weights: stage1.weights, manifestFile: split, promptDir: stage1Dir,
    outDir: preds1, config, split: "all",
  });

  const stage2Dir = path.join(work, "stage2");
  log("generating correction clicks");
  runEngine([
    "stage2", split, "--out-dir", stage2Dir, "--pred-dir", preds1,
    "--frame", frameFlag(config),
  ]);

  log(`training stage 2, warm start (${config.epochs} epochs)`);
  const regenPreds = path.join(work, "preds_regen");
  const stage2 = trainStage({
    manifestFile: split,
    promptDir: stage2Dir,
    config,
    initWeights: loadCheckpoint(ckpt1).weights,
    afterEpoch: opts.regenPerEpoch
      ? (epoch, weights) => {
          exportPredictions({
            weights, manifestFile: split, promptDir: stage2Dir,
            outDir: regenPreds, config, split: "all",
          });
          runEngine([
            "stage2", split, "--out-dir", stage2Dir, "--pred-dir", regenPreds,
            "--frame", frameFlag(config),
          ]);
          return true;
        }
      : undefined,
  });
  const ckpt2 = path.join(work, "checkpoint_stage2.json");
  saveCheckpoint(ckpt2, config, stage2.weights);
  writeLossCurve(path.join(work, "loss_stage2.tsv"), stage2);
  log(`stage 2 final loss ${stage2.final.loss.toFixed(4)}`);

  const preds2 = path.join(work, "preds_stage2");
  log("exporting stage-2 predictions");
  exportPredictions({
    weights: stage2.weights, manifestFile: split, promptDir: stage2Dir,
    outDir: preds2, config, split: "all",
  });

  const eval1Dir = path.join(work, "eval_stage1");
  const eval2Dir = path.join(work, "eval_stage2");
  log("scoring both stages on the test split");
  runEngine([
    "eval", split, "--out-dir", eval1Dir, "--pred-dir", preds1,
    "--split", "test", "--frame", frameFlag(config),
  ]);
  runEngine([
    "eval", split, "--out-dir", eval2Dir, "--pred-dir", preds2,
    "--split", "test", "--frame", frameFlag(config),
  ]);

  const stage1Eval = parseEvalReport(
    fs.readFileSync(path.join(eval1Dir, "report.tsv"), "utf-8"),
  );
  const stage2Eval = parseEvalReport(
    fs.readFileSync(path.join(eval2Dir, "report.tsv"), "utf-8"),
  );

  const comparisonFile = path.join(work, "comparison.tsv");
  writeComparison(comparisonFile, stage1Eval, stage2Eval);
  log(
    `test mask IoU: stage1 ${stage1Eval.mean.maskIou.toFixed(4)}`
    + ` stage2 ${stage2Eval.mean.maskIou.toFixed(4)}`,
  );

  return { stage1, stage2, stage1Eval, stage2Eval, comparisonFile, workDir: work };
}
