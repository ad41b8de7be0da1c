#!/usr/bin/env node
/** Command-line entry: run the two-stage comparison end to end. */

import { defaultConfig, SegmenterConfig } from "./model.js";
import { twoStageExperiment } from "./experiment.js";

interface CliArgs {
  root: string;
  work: string;
  count: number;
  seed: number;
  splitSeed: number;
  epochs: number;
  lr: number;
  frame: [number, number];
  regenPerEpoch: boolean;
}

function usage(): never {
  process.stderr.write(
    "usage: prompt-seg-harness [--root DIR] [--work DIR] [--count N] [--seed N]\n"
    + "                         [--split-seed N] [--epochs N] [--lr X] [--frame WxH]\n"
    + "                         [--regen-per-epoch]\n",
  );
  process.exit(2);
}

function parseArgs(argv: string[]): CliArgs {
  const args: CliArgs = {
    root: "corpus",
    work: "work",
    count: 220,
    seed: 0,
    splitSeed: 0,
    epochs: defaultConfig.epochs,
    lr: defaultConfig.learningRate,
    frame: defaultConfig.frame,
    regenPerEpoch: false,
  };
  for (let i = 0; i < argv.length; i++) {
    const a = argv[i];
    const next = (): string => {
      i++;
      if (i >= argv.length) {
        usage();
      }
      return argv[i];
    };
    switch (a) {
      case "--root": args.root = next(); break;
      case "--work": args.work = next(); break;
      case "--count": args.count = Number(next()); break;
      case "--seed": args.seed = Number(next()); break;
      case "--split-seed": args.splitSeed = Number(next()); break;
      case "--epochs": args.epochs = Number(next()); break;
      case "--lr": args.lr = Number(next()); break;
      case "--frame": {
        const m = /^(\d+)x(\d+)$/.exec(next());
        if (!m) {
          usage();
        }
        args.frame = [Number(m[1]), Number(m[2])];
        break;
      }
      case "--regen-per-epoch": args.regenPerEpoch = true; break;
      case "--help": case "-h": usage();
      default: usage();
    }
  }
  for (const v of [args.count, args.seed, args.splitSeed, args.epochs, args.lr]) {
    if (!Number.isFinite(v)) {
      usage();
    }
  }
  return args;
}

function main(): void {
  const a = parseArgs(process.argv.slice(2));
  const config: SegmenterConfig = {
    ...defaultConfig,
    frame: a.frame,
    epochs: a.epochs,
    learningRate: a.lr,
    seed: a.seed,
  };
  const result = twoStageExperiment({
    root: a.root,
    workDir: a.work,
    config,
    corpusCount: a.count,
    corpusSeed: a.seed,
    splitSeed: a.splitSeed,
    regenPerEpoch: a.regenPerEpoch,
    log: (line) => process.stderr.write(`[harness] ${line}\n`),
  });
  const m1 = result.stage1Eval.mean;
  const m2 = result.stage2Eval.mean;
  process.stdout.write(
    `test images: ${result.stage1Eval.rows.length}\n`
    + `stage1 mask_iou ${m1.maskIou.toFixed(6)} bbox_iou ${m1.bboxIou.toFixed(6)}\n`
    + `stage2 mask_iou ${m2.maskIou.toFixed(6)} bbox_iou ${m2.bboxIou.toFixed(6)}\n`
    + `delta  mask_iou ${(m2.maskIou - m1.maskIou).toFixed(6)}\n`
    + `report: ${result.comparisonFile}\n`,
  );
}

main();
