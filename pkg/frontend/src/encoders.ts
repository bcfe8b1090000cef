/**
 * Deterministic local encoders.
 *
 * The "hash" family projects token sequences (or pixel grids) into a
 * fixed dimension through seeded pseudo-random unit vectors, with
 * first-token-weighted pooling. It runs anywhere, needs no model
 * weights, and is bitwise deterministic, which makes it the reference
 * encoder for format-level work; model-backed encoders can implement
 * the same interface.
 */

export interface TextEncoder2 {
  readonly name: string;
  readonly dim: number;
  /** Encode one token sequence; positions matter. */
  encode(tokens: string[]): Float32Array;
  /** Per-segment vectors of a joint pass (for cross-encoded pairs). */
  encodeSegments(tokens: string[], firstLength: number): [Float32Array, Float32Array];
}

function fnv1a(text: string, seed: number): number {
  let h = (0x811c9dc5 ^ seed) >>> 0;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h >>> 0;
}

/** xorshift32; cheap, seeded, stable across platforms. */
function nextRandom(state: number): number {
  state ^= state << 13;
  state >>>= 0;
  state ^= state >>> 17;
  state ^= state << 5;
  return state >>> 0;
}

function tokenVector(token: string, position: number, dim: number, out: Float64Array, weight: number): void {
  let state = fnv1a(`${token}#${position}`, 0x9e3779b9) || 1;
  for (let j = 0; j < dim; j++) {
    state = nextRandom(state);
    // map to (-1, 1)
    out[j] += weight * ((state / 0x80000000) - 1.0);
  }
}

function normalized(acc: Float64Array): Float32Array {
  let norm = 0;
  for (let j = 0; j < acc.length; j++) norm += acc[j] * acc[j];
  norm = Math.sqrt(norm);
  const out = new Float32Array(acc.length);
  if (norm === 0) {
    out[0] = 1; // degenerate input; keep vectors non-zero for cosine use
    return out;
  }
  for (let j = 0; j < acc.length; j++) out[j] = acc[j] / norm;
  return out;
}

export class HashTextEncoder implements TextEncoder2 {
  readonly name: string;
  readonly dim: number;

  constructor(dim: number) {
    if (dim < 2) throw new Error(`dim too small: ${dim}`);
    this.dim = dim;
    this.name = "hash";
  }

  encode(tokens: string[]): Float32Array {
    if (tokens.length === 0) throw new Error("cannot encode an empty token sequence");
    const acc = new Float64Array(this.dim);
    tokens.forEach((token, position) => {
      // first-token pooling analogue: the leading token dominates
      const weight = position === 0 ? 2.0 : 1.0;
      tokenVector(token, position, this.dim, acc, weight);
    });
    return normalized(acc);
  }

  encodeSegments(tokens: string[], firstLength: number): [Float32Array, Float32Array] {
    if (firstLength <= 0 || firstLength >= tokens.length) {
      throw new Error(`firstLength ${firstLength} outside sequence of ${tokens.length}`);
    }
    const first = new Float64Array(this.dim);
    const second = new Float64Array(this.dim);
    tokens.forEach((token, position) => {
      const target = position < firstLength ? first : second;
      const weight = position === 0 || position === firstLength ? 2.0 : 1.0;
      tokenVector(token, position, this.dim, target, weight);
    });
    return [normalized(first), normalized(second)];
  }
}

export interface VisionEncoder {
  readonly name: string;
  readonly dim: number;
  /** Encode a grayscale image given as rows*cols floats in [0, 1]. */
  encode(pixels: Float64Array, rows: number, cols: number): Float32Array;
}

export class HashVisionEncoder implements VisionEncoder {
  readonly name: string;
  readonly dim: number;
  private readonly grid: number;

  constructor(dim: number, grid = 16) {
    if (dim < 2) throw new Error(`dim too small: ${dim}`);
    this.dim = dim;
    this.grid = grid;
    this.name = "hash-vision";
  }

  encode(pixels: Float64Array, rows: number, cols: number): Float32Array {
    if (rows * cols !== pixels.length) {
      throw new Error(`pixel buffer ${pixels.length} != ${rows}x${cols}`);
    }
    // pool to a grid of mean intensities, then project each cell
    const g = this.grid;
    const acc = new Float64Array(this.dim);
    for (let gy = 0; gy < g; gy++) {
      for (let gx = 0; gx < g; gx++) {
        const y0 = Math.floor((gy * rows) / g);
        const y1 = Math.max(y0 + 1, Math.floor(((gy + 1) * rows) / g));
        const x0 = Math.floor((gx * cols) / g);
        const x1 = Math.max(x0 + 1, Math.floor(((gx + 1) * cols) / g));
        let sum = 0;
        for (let y = y0; y < y1; y++) {
          for (let x = x0; x < x1; x++) sum += pixels[y * cols + x];
        }
        const mean = sum / ((y1 - y0) * (x1 - x0));
        tokenVector(`cell${gy},${gx}`, 0, this.dim, acc, mean + 1e-3);
      }
    }
    return normalized(acc);
  }
}

export function makeTextEncoder(name: string, dim: number): TextEncoder2 {
  if (name === "hash") return new HashTextEncoder(dim);
  throw new Error(`unsupported text encoder ${JSON.stringify(name)} (supported: hash)`);
}

export function makeVisionEncoder(name: string, dim: number): VisionEncoder {
  if (name === "hash") return new HashVisionEncoder(dim);
  throw new Error(`unsupported vision encoder ${JSON.stringify(name)} (supported: hash)`);
}
