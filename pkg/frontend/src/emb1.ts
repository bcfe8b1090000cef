/**
 * EMB1 binary embedding container, little-endian throughout.
 *
 * Layout: magic "EMB1", version u32=1, modality u8 (0=text, 1=vision),
 * encoder name (u16 length + UTF-8), dim u32, count u64; per record:
 * id (u16 length + UTF-8; ordered pairs store "first\x00second"),
 * kind u8 (0=mention, 1=pair), dim f32 values; trailing CRC32 over all
 * preceding bytes.
 */

import { crc32 } from "./crc32.js";

export type Modality = "text" | "vision";

const MODALITY_CODES: Record<Modality, number> = { text: 0, vision: 1 };
const MAGIC = new TextEncoder().encode("EMB1");
const VERSION = 1;

export interface MentionRecord {
  kind: "mention";
  id: string;
  vec: Float32Array;
}

export interface PairRecord {
  kind: "pair";
  first: string;
  second: string;
  vec: Float32Array;
}

export type EmbRecord = MentionRecord | PairRecord;

class ByteSink {
  private chunks: Uint8Array[] = [];
  private scratch = new DataView(new ArrayBuffer(8));

  raw(bytes: Uint8Array): void {
    this.chunks.push(bytes);
  }

  u8(value: number): void {
    this.chunks.push(Uint8Array.of(value));
  }

  u16(value: number): void {
    this.scratch.setUint16(0, value, true);
    this.chunks.push(new Uint8Array(this.scratch.buffer.slice(0, 2)));
  }

  u32(value: number): void {
    this.scratch.setUint32(0, value, true);
    this.chunks.push(new Uint8Array(this.scratch.buffer.slice(0, 4)));
  }

  u64(value: number): void {
    this.scratch.setBigUint64(0, BigInt(value), true);
    this.chunks.push(new Uint8Array(this.scratch.buffer.slice(0, 8)));
  }

  str16(text: string): void {
    const bytes = new TextEncoder().encode(text);
    if (bytes.length > 0xffff) {
      throw new Error(`string field too long (${bytes.length} bytes)`);
    }
    this.u16(bytes.length);
    this.raw(bytes);
  }

  concat(): Uint8Array {
    const total = this.chunks.reduce((n, c) => n + c.length, 0);
    const out = new Uint8Array(total);
    let offset = 0;
    for (const chunk of this.chunks) {
      out.set(chunk, offset);
      offset += chunk.length;
    }
    return out;
  }
}

function checkFinite(vec: Float32Array, what: string): void {
  for (let i = 0; i < vec.length; i++) {
    if (!Number.isFinite(vec[i])) {
      throw new Error(`${what}: non-finite value at index ${i}`);
    }
  }
}

export function encodeEmb1(
  modality: Modality,
  encoder: string,
  dim: number,
  records: EmbRecord[],
): Uint8Array {
  const sink = new ByteSink();
  sink.raw(MAGIC);
  sink.u32(VERSION);
  sink.u8(MODALITY_CODES[modality]);
  sink.str16(encoder);
  sink.u32(dim);
  sink.u64(records.length);

  for (const record of records) {
    const id = record.kind === "mention" ? record.id : `${record.first}\x00${record.second}`;
    if (record.vec.length !== dim) {
      throw new Error(`record ${JSON.stringify(id)}: expected ${dim} values, got ${record.vec.length}`);
    }
    checkFinite(record.vec, `record ${JSON.stringify(id)}`);
    sink.str16(id);
    sink.u8(record.kind === "mention" ? 0 : 1);
    const bytes = new Uint8Array(record.vec.length * 4);
    const view = new DataView(bytes.buffer);
    for (let i = 0; i < record.vec.length; i++) {
      view.setFloat32(i * 4, record.vec[i], true);
    }
    sink.raw(bytes);
  }

  const payload = sink.concat();
  const out = new Uint8Array(payload.length + 4);
  out.set(payload, 0);
  new DataView(out.buffer).setUint32(payload.length, crc32(payload), true);
  return out;
}

export interface DecodedEmb1 {
  modality: Modality;
  encoder: string;
  dim: number;
  records: EmbRecord[];
}

/** Reader used by the round-trip tests; validates CRC and framing. */
export function decodeEmb1(data: Uint8Array): DecodedEmb1 {
  if (data.length < 4) throw new Error("truncated file");
  const payload = data.subarray(0, data.length - 4);
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  const stored = view.getUint32(data.length - 4, true);
  const actual = crc32(payload);
  if (stored !== actual) {
    throw new Error(`CRC32 mismatch (stored ${stored}, computed ${actual})`);
  }

  let pos = 0;
  const take = (n: number): Uint8Array => {
    if (pos + n > payload.length) throw new Error(`truncated at byte ${pos}`);
    const out = payload.subarray(pos, pos + n);
    pos += n;
    return out;
  };
  const magic = take(4);
  if (new TextDecoder().decode(magic) !== "EMB1") throw new Error("bad magic");
  // Uint8Array.from copies; Buffer.slice would alias the whole file
  const dv = (bytes: Uint8Array) => new DataView(Uint8Array.from(bytes).buffer);
  const u32 = () => dv(take(4)).getUint32(0, true);
  const u16 = () => dv(take(2)).getUint16(0, true);
  const u8 = () => take(1)[0];
  const u64 = () => Number(dv(take(8)).getBigUint64(0, true));
  const str16 = () => new TextDecoder().decode(take(u16()));

  const version = u32();
  if (version !== VERSION) throw new Error(`unsupported version ${version}`);
  const modalityCode = u8();
  const modality = (Object.keys(MODALITY_CODES) as Modality[]).find(
    (m) => MODALITY_CODES[m] === modalityCode,
  );
  if (!modality) throw new Error(`unknown modality code ${modalityCode}`);
  const encoder = str16();
  const dim = u32();
  const count = u64();

  const records: EmbRecord[] = [];
  for (let r = 0; r < count; r++) {
    const id = str16();
    const kind = u8();
    const raw = take(dim * 4);
    const vec = new Float32Array(dim);
    const rawView = new DataView(Uint8Array.from(raw).buffer);
    for (let i = 0; i < dim; i++) vec[i] = rawView.getFloat32(i * 4, true);
    if (kind === 0) {
      records.push({ kind: "mention", id, vec });
    } else if (kind === 1) {
      const parts = id.split("\x00");
      if (parts.length !== 2) throw new Error(`malformed pair id ${JSON.stringify(id)}`);
      records.push({ kind: "pair", first: parts[0], second: parts[1], vec });
    } else {
      throw new Error(`unknown record kind ${kind}`);
    }
  }
  if (pos !== payload.length) throw new Error("trailing bytes after last record");
  return { modality, encoder, dim, records };
}
