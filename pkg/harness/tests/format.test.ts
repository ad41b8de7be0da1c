import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { parseEvalReport, runEngine } from "../src/engine.js";
import { readManifest, imageFile, maskFiles, subset } from "../src/manifest.js";
import { readGray, readMask, writeMask } from "../src/png.js";
import { clickChannel, clickCloseness, readPromptFile } from "../src/prompts.js";

let dir: string;

beforeAll(() => {
  dir = fs.mkdtempSync(path.join(os.tmpdir(), "harness-fmt-"));
  runEngine(["make-synthetic", path.join(dir, "corpus"), "--count", "3", "--size", "64", "--seed", "11"]);
  runEngine(["scan", path.join(dir, "corpus"), "--out", path.join(dir, "manifest.tsv")]);
  runEngine(["stage1", path.join(dir, "manifest.tsv"), "--out-dir", path.join(dir, "stage1"), "--frame", "64x64"]);
});

afterAll(() => {
  fs.rmSync(dir, { recursive: true, force: true });
});

describe("manifest reader", () => {
  it("reads entries the generator produced", () => {
    const m = readManifest(path.join(dir, "manifest.tsv"));
    expect(m.entries.length).toBe(3);
    for (const e of m.entries) {
      expect(fs.existsSync(imageFile(m, e))).toBe(true);
      for (const f of maskFiles(m, e)) {
        expect(fs.existsSync(f)).toBe(true);
      }
      expect(e.split).toBe("unassigned");
    }
    expect(subset(m, "all").length).toBe(3);
    expect(subset(m, "train").length).toBe(0);
  });

  it("rejects a bad header with the line number", () => {
    const bad = path.join(dir, "bad.tsv");
    fs.writeFileSync(bad, "nonsense\tv9\n", "utf-8");
    expect(() => readManifest(bad)).toThrow(/bad\.tsv:1/);
  });
});

describe("prompt reader", () => {
  it("reads first-round prompt files", () => {
    const m = readManifest(path.join(dir, "manifest.tsv"));
    for (const e of m.entries) {
      const ps = readPromptFile(path.join(dir, "stage1", `${e.imageId}.prompts`));
      expect(ps.imageId).toBe(e.imageId);
      expect(ps.stage).toBe(1);
      expect(ps.frame).toEqual([64, 64]);
      expect(ps.clicks.length).toBeGreaterThan(0);
      const gt = readMask(maskFiles(m, e)[0]);
      for (const c of ps.clicks) {
        expect(c.polarity).toBe(1);
        expect(c.kind).toBe("GT");
        expect(c.x).toBeGreaterThanOrEqual(0);
        expect(c.x).toBeLessThan(64);
        expect(c.y).toBeGreaterThanOrEqual(0);
        expect(c.y).toBeLessThan(64);
        expect(gt.data[c.y * 64 + c.x]).toBe(1);
      }
    }
  });

  it("rejects malformed records with file and line", () => {
    const file = path.join(dir, "broken.prompts");
    fs.writeFileSync(
      file,
      "promptset\tv1\timage=x\tstage=1\tframe=64x64\n10\t10\t+1\tGT\tnot-an-int\n",
      "utf-8",
    );
    expect(() => readPromptFile(file)).toThrow(/broken\.prompts:2/);
  });

  it("rasterizes click disks inside the radius only", () => {
    const ps = {
      imageId: "x",
      stage: 1 as const,
      frame: [32, 32] as [number, number],
      clicks: [{ x: 10, y: 12, polarity: 1 as const, kind: "GT" as const, componentId: 0 }],
    };
    const ch = clickChannel(ps, 1, 3);
    expect(ch[12 * 32 + 10]).toBe(1);
    expect(ch[12 * 32 + 13]).toBe(1);
    expect(ch[12 * 32 + 14]).toBe(0);
    expect(ch[(12 + 4) * 32 + 10]).toBe(0);
    const none = clickChannel(ps, -1, 3);
    expect(none.every((v) => v === 0)).toBe(true);
  });

  it("closeness peaks at the click and is zero without clicks", () => {
    const ps = {
      imageId: "x",
      stage: 2 as const,
      frame: [16, 16] as [number, number],
      clicks: [{ x: 8, y: 8, polarity: 1 as const, kind: "TP" as const, componentId: 0 }],
    };
    const c = clickCloseness(ps, 1, 4);
    expect(c[8 * 16 + 8]).toBeCloseTo(1.0, 12);
    expect(c[8 * 16 + 12]).toBeCloseTo(Math.exp(-16 / 32), 12);
    expect(clickCloseness(ps, -1, 4).every((v) => v === 0)).toBe(true);
  });
});

describe("mask png io", () => {
  it("round-trips a binary mask", () => {
    const w = 20;
    const h = 10;
    const mask = new Uint8Array(w * h);
    for (let i = 0; i < mask.length; i += 3) {
      mask[i] = 1;
    }
    const file = path.join(dir, "roundtrip.png");
    writeMask(file, w, h, mask);
    const back = readMask(file);
    expect(back.width).toBe(w);
    expect(back.height).toBe(h);
    expect(Array.from(back.data)).toEqual(Array.from(mask));
    const gray = readGray(file);
    expect(gray.data[0]).toBe(255);
    expect(gray.data[1]).toBe(0);
  });
});

describe("eval report parser", () => {
  it("parses rows and the mean line", () => {
    const text = [
      "image_id\tclass_label\tsplit\tmask_iou\tbbox_iou\tdice",
      "a\tbenign\ttest\t0.5\t0.6\t0.66",
      "__mean__\t\ttest\t0.5\t0.6\t0.66",
      "",
    ].join("\n");
    const r = parseEvalReport(text);
    expect(r.rows.length).toBe(1);
    expect(r.rows[0].imageId).toBe("a");
    expect(r.mean.maskIou).toBeCloseTo(0.5, 12);
  });

  it("rejects reports without a mean row or with foreign columns", () => {
    expect(() =>
      parseEvalReport("image_id\tclass_label\tsplit\tmask_iou\tbbox_iou\tdice\na\tb\ttest\t1\t1\t1\n"),
    ).toThrow(/mean/);
    expect(() => parseEvalReport("foo\tbar\n")).toThrow(/columns/);
  });
});

describe("engine invocation", () => {
  it("reports captured diagnostics when the engine fails", () => {
    expect(() => runEngine(["no-such-subcommand"])).toThrow(/engine exited|stderr/);
    try {
      runEngine(["no-such-subcommand"]);
    } catch (err) {
      expect(String(err)).toMatch(/no-such-subcommand/);
    }
  });
});
