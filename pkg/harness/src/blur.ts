/**
 * Separable box blur, three passes, edge-clamped.
 *
 * Three box passes approximate a gaussian closely enough for feature
 * channels, run in O(pixels) per pass via sliding sums, and stay exactly
 * reproducible (pure float64, fixed accumulation order). Windows truncate
 * at the borders and divide by the actual pixel count, so flat inputs stay
 * flat and total mass has no edge bleed.
 */

function boxPass1d(
  src: Float64Array, dst: Float64Array,
  count: number, stride: number, offset: number, radius: number,
): void {
  let sum = 0;
  for (let i = 0; i <= Math.min(radius, count - 1); i++) {
    sum += src[offset + i * stride];
  }
  let lo = 0;
  let hi = Math.min(radius, count - 1);
  for (let i = 0; i < count; i++) {
    dst[offset + i * stride] = sum / (hi - lo + 1);
    const nextHi = i + 1 + radius;
    if (nextHi < count) {
      sum += src[offset + nextHi * stride];
      hi = nextHi;
    }
    const nextLo = i + 1 - radius;
    if (nextLo > 0) {
      sum -= src[offset + (nextLo - 1) * stride];
      lo = nextLo;
    }
  }
}

function boxBlurOnce(src: Float64Array, width: number, height: number, radius: number): Float64Array {
  const tmp = new Float64Array(src.length);
  const out = new Float64Array(src.length);
  for (let y = 0; y < height; y++) {
    boxPass1d(src, tmp, width, 1, y * width, radius);
  }
  for (let x = 0; x < width; x++) {
    boxPass1d(tmp, out, height, width, x, radius);
  }
  return out;
}

export function blur(src: Float64Array, width: number, height: number, radius: number): Float64Array {
  if (radius < 1) {
    return Float64Array.from(src);
  }
  let cur = src;
  for (let pass = 0; pass < 3; pass++) {
    cur = boxBlurOnce(cur, width, height, radius);
  }
  return cur;
}
