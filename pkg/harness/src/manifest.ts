// Reader for the engine's manifest format:
//   manifest<TAB>v1<TAB>seed=<int|none><TAB>root=<abs path>
//   <image_id><TAB><class><TAB><split><TAB><image_path><TAB><mask_path>...

import * as fs from "node:fs";
import * as path from "node:path";

export interface ManifestEntry {
  imageId: string;
  classLabel: string;
  split: "train" | "test" | "unassigned";
  imagePath: string;
  maskPaths: string[];
}

export interface Manifest {
  root: string;
  seed: number | null;
  entries: ManifestEntry[];
}

export function readManifest(file: string): Manifest {
  const lines = fs.readFileSync(file, "utf-8").split("\n");
  if (lines.length > 0 && lines[lines.length - 1] === "") {
    lines.pop();
  }
  if (lines.length === 0) {
    throw new Error(`${file}:1: empty manifest`);
  }
  const header = lines[0].split("\t");
  if (header.length !== 4 || header[0] !== "manifest" || header[1] !== "v1") {
    throw new Error(`${file}:1: bad manifest header`);
  }
  const seedText = header[2].replace(/^seed=/, "");
  const root = header[3].replace(/^root=/, "");
  const entries: ManifestEntry[] = [];
  for (let i = 1; i < lines.length; i++) {
    const fields = lines[i].split("\t");
    if (fields.length < 5) {
      throw new Error(`${file}:${i + 1}: expected at least 5 fields, got ${fields.length}`);
    }
    const split = fields[2];
    if (split !== "train" && split !== "test" && split !== "unassigned") {
      throw new Error(`${file}:${i + 1}: unknown split ${JSON.stringify(split)}`);
    }
    entries.push({
      imageId: fields[0],
      classLabel: fields[1],
      split,
      imagePath: fields[3],
      maskPaths: fields.slice(4),
    });
  }
  return { root, seed: seedText === "none" ? null : parseInt(seedText, 10), entries };
}

export function imageFile(m: Manifest, e: ManifestEntry): string {
  return path.join(m.root, e.imagePath);
}

export function maskFiles(m: Manifest, e: ManifestEntry): string[] {
  return e.maskPaths.map((p) => path.join(m.root, p));
}

export function subset(m: Manifest, split: "train" | "test" | "all"): ManifestEntry[] {
  return split === "all" ? m.entries : m.entries.filter((e) => e.split === split);
}
