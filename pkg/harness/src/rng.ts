// Seeded 32-bit LCG: x = (1664525*x + 1013904223) mod 2^32.
// Good enough for sampling test pixels; training itself uses no randomness.
export function makeLcg(seed: number): () => number {
  let state = seed >>> 0;
  return function random(): number {
    state = (Math.imul(1664525, state) + 1013904223) >>> 0;
    return state / 4294967296;
  };
}

export function randInt(rand: () => number, bound: number): number {
  return Math.floor(rand() * bound);
}
