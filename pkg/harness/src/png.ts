/**
 * PNG IO against the engine's mask and image conventions.
 *
 * Corpus images are 8-bit grayscale; masks are strictly 0/255. pngjs hands
 * us RGBA regardless of the source color type, so grayscale values are read
 * from the red channel. Masks are written as opaque gray RGBA, which the
 * engine's luminance conversion maps back to the exact same byte values.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { PNG } from "pngjs";

export interface GrayImage {
  width: number;
  height: number;
  /** Row-major pixel values in [0, 255]. */
  data: Float64Array;
}

export function readGray(file: string): GrayImage {
  const png = PNG.sync.read(fs.readFileSync(file));
  const data = new Float64Array(png.width * png.height);
  for (let i = 0; i < data.length; i++) {
    data[i] = png.data[i * 4];
  }
  return { width: png.width, height: png.height, data };
}

/** Binary mask: foreground where the gray value exceeds 127. */
export function readMask(file: string): { width: number; height: number; data: Uint8Array } {
  const img = readGray(file);
  const data = new Uint8Array(img.data.length);
  for (let i = 0; i < data.length; i++) {
    data[i] = img.data[i] > 127 ? 1 : 0;
  }
  return { width: img.width, height: img.height, data };
}

export function writeMask(file: string, width: number, height: number, mask: Uint8Array): void {
  if (mask.length !== width * height) {
    throw new Error(`mask length ${mask.length} does not match ${width}x${height}`);
  }
  const png = new PNG({ width, height });
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] ? 255 : 0;
    png.data[i * 4] = v;
    png.data[i * 4 + 1] = v;
    png.data[i * 4 + 2] = v;
    png.data[i * 4 + 3] = 255;
  }
  fs.mkdirSync(path.dirname(file), { recursive: true });
  // fixed deflate settings keep re-exports byte-identical
  fs.writeFileSync(file, PNG.sync.write(png, { deflateLevel: 9, deflateStrategy: 0 }));
}
