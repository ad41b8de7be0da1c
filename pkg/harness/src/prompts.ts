/**
 * Reader for the engine's prompt file format.
 *
 * Header: promptset<TAB>v1<TAB>image=<id><TAB>stage=<1|2><TAB>frame=<W>x<H>
 * Record: <x><TAB><y><TAB><+1|-1><TAB><GT|TP|FN|FP><TAB><component_id>
 *
 * Validation here is a sanity layer (the engine already guarantees its own
 * invariants); malformed files still fail loudly with the line number.
 */

import * as fs from "node:fs";

export interface Click {
  x: number;
  y: number;
  polarity: 1 | -1;
  kind: "GT" | "TP" | "FN" | "FP";
  componentId: number;
}

export interface PromptSet {
  imageId: string;
  stage: 1 | 2;
  frame: [number, number];
  clicks: Click[];
}

const KINDS = new Set(["GT", "TP", "FN", "FP"]);

function fail(file: string, line: number, message: string): never {
  throw new Error(`${file}:${line}: ${message}`);
}

function parseIntStrict(text: string, file: string, line: number, what: string): number {
  if (!/^-?\d+$/.test(text)) {
    fail(file, line, `${what} is not an integer: ${JSON.stringify(text)}`);
  }
  return parseInt(text, 10);
}

export function readPromptFile(file: string): PromptSet {
  const text = fs.readFileSync(file, "utf-8");
  const lines = text.split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    fail(file, 1, "empty file");
  }
  const header = lines[0].split("\t");
  if (header.length !== 5 || header[0] !== "promptset" || header[1] !== "v1") {
    fail(file, 1, "bad header");
  }
  const imageId = header[2].replace(/^image=/, "");
  const stage = parseIntStrict(header[3].replace(/^stage=/, ""), file, 1, "stage");
  if (stage !== 1 && stage !== 2) {
    fail(file, 1, `stage must be 1 or 2, got ${stage}`);
  }
  const frameMatch = /^frame=(\d+)x(\d+)$/.exec(header[4]);
  if (!frameMatch) {
    fail(file, 1, `bad frame field ${JSON.stringify(header[4])}`);
  }
  const w = parseInt(frameMatch[1], 10);
  const h = parseInt(frameMatch[2], 10);

  const clicks: Click[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split("\t");
    if (fields.length !== 5) {
      fail(file, i + 1, `expected 5 fields, got ${fields.length}`);
    }
    const x = parseIntStrict(fields[0], file, i + 1, "x");
    const y = parseIntStrict(fields[1], file, i + 1, "y");
    if (fields[2] !== "+1" && fields[2] !== "-1") {
      fail(file, i + 1, `bad polarity ${JSON.stringify(fields[2])}`);
    }
    if (!KINDS.has(fields[3])) {
      fail(file, i + 1, `unknown region kind ${JSON.stringify(fields[3])}`);
    }
    if (x < 0 || y < 0 || x >= w || y >= h) {
      fail(file, i + 1, `click (${x}, ${y}) outside frame ${w}x${h}`);
    }
    clicks.push({
      x, y,
      polarity: fields[2] === "+1" ? 1 : -1,
      kind: fields[3] as Click["kind"],
      componentId: parseIntStrict(fields[4], file, i + 1, "component_id"),
    });
  }
  return { imageId, stage: stage as 1 | 2, frame: [w, h], clicks };
}

/**
 * Rasterize clicks of one polarity into a disk-stamped channel: 1.0 inside
 * a disk of the given radius around each click, 0 elsewhere. Overlapping
 * disks saturate at 1.
 */
export function clickChannel(
  ps: PromptSet, polarity: 1 | -1, radius: number,
): Float64Array {
  const [w, h] = ps.frame;
  const out = new Float64Array(w * h);
  const r2 = radius * radius;
  for (const c of ps.clicks) {
    if (c.polarity !== polarity) {
      continue;
    }
    const x0 = Math.max(0, c.x - radius);
    const x1 = Math.min(w - 1, c.x + radius);
    const y0 = Math.max(0, c.y - radius);
    const y1 = Math.min(h - 1, c.y + radius);
    for (let y = y0; y <= y1; y++) {
      for (let x = x0; x <= x1; x++) {
        const dx = x - c.x;
        const dy = y - c.y;
        if (dx * dx + dy * dy <= r2) {
          out[y * w + x] = 1.0;
        }
      }
    }
  }
  return out;
}

/**
 * Gaussian closeness to the nearest click of one polarity:
 * max over clicks of exp(-d^2 / (2 tau^2)). Zero when that polarity has no
 * clicks, which keeps the channel's weights untouched in a stage that
 * never emits such clicks, so they transfer cleanly across stages.
 */
export function clickCloseness(ps: PromptSet, polarity: 1 | -1, tau: number): Float64Array {
  const [w, h] = ps.frame;
  const out = new Float64Array(w * h);
  const clicks = ps.clicks.filter((c) => c.polarity === polarity);
  if (clicks.length === 0) {
    return out;
  }
  const inv = -1.0 / (2.0 * tau * tau);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      let best = Infinity;
      for (const c of clicks) {
        const dx = x - c.x;
        const dy = y - c.y;
        const d2 = dx * dx + dy * dy;
        if (d2 < best) {
          best = d2;
        }
      }
      out[y * w + x] = Math.exp(best * inv);
    }
  }
  return out;
}
