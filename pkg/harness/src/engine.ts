/**
 * Subprocess wrapper around the segmentation-prompt engine's CLI.
 *
 * All data exchange is file-based (manifests, prompt files, mask PNGs);
 * nothing links against the engine's internals. The command is
 * "python3 -m maskprompt" by default and can be overridden with the
 * MASKPROMPT_CMD environment variable (whitespace-separated).
 */

import { spawnSync } from "node:child_process";

export interface EngineResult {
  stdout: string;
  stderr: string;
}

function engineCommand(): string[] {
  const override = process.env.MASKPROMPT_CMD;
  if (override && override.trim() !== "") {
    return override.trim().split(/\s+/);
  }
  return ["python3", "-m", "maskprompt"];
}

export function runEngine(args: string[]): EngineResult {
  const cmd = engineCommand();
  const proc = spawnSync(cmd[0], [...cmd.slice(1), ...args], {
    encoding: "utf-8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.error) {
    throw new Error(`engine could not be started (${cmd.join(" ")}): ${proc.error.message}`);
  }
  if (proc.status !== 0) {
    throw new Error(
      `engine exited with ${proc.status}: ${cmd.join(" ")} ${args.join(" ")}\n`
      + `stdout:\n${proc.stdout}\nstderr:\n${proc.stderr}`,
    );
  }
  return { stdout: proc.stdout, stderr: proc.stderr };
}

export interface EvalRow {
  imageId: string;
  classLabel: string;
  split: string;
  maskIou: number;
  bboxIou: number;
  dice: number;
}

/** Parse the engine's eval report.tsv into per-image rows plus the mean row. */
export function parseEvalReport(text: string): { rows: EvalRow[]; mean: EvalRow } {
  const lines = text.split("\n").filter((l) => l !== "");
  const header = lines[0].split("\t");
  const expected = ["image_id", "class_label", "split", "mask_iou", "bbox_iou", "dice"];
  if (header.join(",") !== expected.join(",")) {
    throw new Error(`unexpected report columns: ${lines[0]}`);
  }
  const rows: EvalRow[] = [];
  let mean: EvalRow | null = null;
  for (const line of lines.slice(1)) {
    const f = line.split("\t");
    const row: EvalRow = {
      imageId: f[0],
      classLabel: f[1],
      split: f[2],
      maskIou: parseFloat(f[3]),
      bboxIou: parseFloat(f[4]),
      dice: parseFloat(f[5]),
    };
    if (row.imageId === "__mean__") {
      mean = row;
    } else {
      rows.push(row);
    }
  }
  if (mean === null) {
    throw new Error("report has no __mean__ row");
  }
  return { rows, mean };
}
