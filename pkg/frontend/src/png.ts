/**
 * Minimal PNG reader: 8-bit depth, grayscale/RGB/RGBA (color types
 * 0/2/4/6), non-interlaced. Returns a grayscale intensity image in
 * [0, 1]. Enough for deterministic feature extraction; exotic PNGs are
 * rejected with a clear error.
 */

import { inflateSync } from "node:zlib";

export interface GrayImage {
  rows: number;
  cols: number;
  pixels: Float64Array; // row-major, [0, 1]
}

const SIGNATURE = [0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a];

const CHANNELS: Record<number, number> = { 0: 1, 2: 3, 4: 2, 6: 4 };

function paeth(a: number, b: number, c: number): number {
  const p = a + b - c;
  const pa = Math.abs(p - a);
  const pb = Math.abs(p - b);
  const pc = Math.abs(p - c);
  if (pa <= pb && pa <= pc) return a;
  if (pb <= pc) return b;
  return c;
}

export function decodePng(data: Uint8Array): GrayImage {
  if (data.length < 8 || !SIGNATURE.every((b, i) => data[i] === b)) {
    throw new Error("not a PNG file");
  }
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  let pos = 8;
  let width = 0;
  let height = 0;
  let colorType = -1;
  const idat: Uint8Array[] = [];

  while (pos + 8 <= data.length) {
    const length = view.getUint32(pos, false);
    const type = new TextDecoder().decode(data.subarray(pos + 4, pos + 8));
    const body = data.subarray(pos + 8, pos + 8 + length);
    pos += 12 + length; // length + type + data + crc
    if (type === "IHDR") {
      // Uint8Array.from copies: .slice() on a Node Buffer shares memory
      // and its .buffer would alias the whole file
      const hv = new DataView(Uint8Array.from(body).buffer);
      width = hv.getUint32(0, false);
      height = hv.getUint32(4, false);
      const bitDepth = body[8];
      colorType = body[9];
      const interlace = body[12];
      if (bitDepth !== 8) throw new Error(`unsupported bit depth ${bitDepth}`);
      if (!(colorType in CHANNELS)) throw new Error(`unsupported color type ${colorType}`);
      if (interlace !== 0) throw new Error("interlaced PNGs are not supported");
    } else if (type === "IDAT") {
      idat.push(body);
    } else if (type === "IEND") {
      break;
    }
  }
  if (width === 0 || height === 0 || colorType < 0) throw new Error("missing IHDR");
  if (idat.length === 0) throw new Error("missing IDAT");

  const compressed = new Uint8Array(idat.reduce((n, c) => n + c.length, 0));
  let offset = 0;
  for (const chunk of idat) {
    compressed.set(chunk, offset);
    offset += chunk.length;
  }
  const raw = inflateSync(compressed);

  const channels = CHANNELS[colorType];
  const stride = width * channels;
  if (raw.length !== height * (stride + 1)) {
    throw new Error(`unexpected decompressed size ${raw.length}`);
  }

  const unfiltered = new Uint8Array(height * stride);
  for (let y = 0; y < height; y++) {
    const filter = raw[y * (stride + 1)];
    const rowIn = raw.subarray(y * (stride + 1) + 1, (y + 1) * (stride + 1));
    const rowOut = unfiltered.subarray(y * stride, (y + 1) * stride);
    const prev = y > 0 ? unfiltered.subarray((y - 1) * stride, y * stride) : null;
    for (let x = 0; x < stride; x++) {
      const a = x >= channels ? rowOut[x - channels] : 0;
      const b = prev ? prev[x] : 0;
      const c = prev && x >= channels ? prev[x - channels] : 0;
      let value: number;
      switch (filter) {
        case 0: value = rowIn[x]; break;
        case 1: value = rowIn[x] + a; break;
        case 2: value = rowIn[x] + b; break;
        case 3: value = rowIn[x] + Math.floor((a + b) / 2); break;
        case 4: value = rowIn[x] + paeth(a, b, c); break;
        default: throw new Error(`unknown filter ${filter} on row ${y}`);
      }
      rowOut[x] = value & 0xff;
    }
  }

  const pixels = new Float64Array(width * height);
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      const base = (y * width + x) * channels;
      let gray: number;
      if (channels === 1) gray = unfiltered[base];
      else if (channels === 2) gray = unfiltered[base];
      else {
        gray =
          0.299 * unfiltered[base] +
          0.587 * unfiltered[base + 1] +
          0.114 * unfiltered[base + 2];
      }
      pixels[y * width + x] = gray / 255.0;
    }
  }
  return { rows: height, cols: width, pixels };
}

/** Nearest-neighbor resize. */
export function resize(image: GrayImage, rows: number, cols: number): GrayImage {
  const out = new Float64Array(rows * cols);
  for (let y = 0; y < rows; y++) {
    const sy = Math.min(image.rows - 1, Math.floor((y * image.rows) / rows));
    for (let x = 0; x < cols; x++) {
      const sx = Math.min(image.cols - 1, Math.floor((x * image.cols) / cols));
      out[y * cols + x] = image.pixels[sy * image.cols + sx];
    }
  }
  return { rows, cols, pixels: out };
}

/** Side-by-side horizontal concatenation (heights padded with black). */
export function concatHorizontal(left: GrayImage, right: GrayImage): GrayImage {
  const rows = Math.max(left.rows, right.rows);
  const cols = left.cols + right.cols;
  const out = new Float64Array(rows * cols);
  for (let y = 0; y < left.rows; y++) {
    for (let x = 0; x < left.cols; x++) out[y * cols + x] = left.pixels[y * left.cols + x];
  }
  for (let y = 0; y < right.rows; y++) {
    for (let x = 0; x < right.cols; x++) {
      out[y * cols + left.cols + x] = right.pixels[y * right.cols + x];
    }
  }
  return { rows, cols, pixels: out };
}
