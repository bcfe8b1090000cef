/** Export pipelines turning corpora/manifests into EMB1 record lists. */

import { readFileSync } from "node:fs";

import { allOrderedPairs, loadCorpus, pairsFromCsv, type Mention, type OrderedPair } from "./corpus.js";
import { makeTextEncoder, makeVisionEncoder } from "./encoders.js";
import { EmbRecord } from "./emb1.js";
import { crossSequence, markedWindow } from "./markers.js";
import { concatHorizontal, decodePng, resize, type GrayImage } from "./png.js";

export interface TextExportOptions {
  corpusPath: string;
  pairsPath?: string;
  encoder: string;
  dim: number;
  maxTokens: number;
}

function mentionIndex(mentions: Mention[]): Map<string, Mention> {
  return new Map(mentions.map((m) => [m.mention_id, m]));
}

function resolvePairs(mentions: Mention[], pairsPath?: string): OrderedPair[] {
  const pairs = pairsPath ? pairsFromCsv(pairsPath) : allOrderedPairs(mentions);
  const known = new Set(mentions.map((m) => m.mention_id));
  for (const pair of pairs) {
    if (!known.has(pair.first) || !known.has(pair.second)) {
      throw new Error(
        `pair (${pair.first}, ${pair.second}) references a mention not in the corpus`,
      );
    }
  }
  return pairs;
}

/**
 * Per-mention vectors of the marked sentence plus one vector per
 * ordered pair from the cross-encoded (first, separator, second)
 * sequence.
 */
export function exportText(options: TextExportOptions): EmbRecord[] {
  const mentions = loadCorpus(options.corpusPath);
  const encoder = makeTextEncoder(options.encoder, options.dim);
  const byId = mentionIndex(mentions);
  const records: EmbRecord[] = [];
  for (const mention of [...mentions].sort((a, b) => a.mention_id.localeCompare(b.mention_id))) {
    records.push({
      kind: "mention",
      id: mention.mention_id,
      vec: encoder.encode(markedWindow(mention, options.maxTokens)),
    });
  }
  for (const pair of resolvePairs(mentions, options.pairsPath)) {
    const sequence = crossSequence(
      byId.get(pair.first)!, byId.get(pair.second)!, options.maxTokens,
    );
    records.push({
      kind: "pair",
      first: pair.first,
      second: pair.second,
      vec: encoder.encode(sequence.tokens),
    });
  }
  return records;
}

/**
 * Difficulty-cosine inputs: for each ordered pair a 2H record holding
 * the context-encoded vector of the first sentence followed by the
 * second sentence's (the consumer splits the halves).
 */
export function exportSentencePairs(options: TextExportOptions): EmbRecord[] {
  const mentions = loadCorpus(options.corpusPath);
  const encoder = makeTextEncoder(options.encoder, options.dim);
  const byId = mentionIndex(mentions);
  const records: EmbRecord[] = [];
  for (const pair of resolvePairs(mentions, options.pairsPath)) {
    const { tokens, firstLength } = crossSequence(
      byId.get(pair.first)!, byId.get(pair.second)!, options.maxTokens,
    );
    const [firstVec, secondVec] = encoder.encodeSegments(tokens, firstLength);
    const vec = new Float32Array(2 * options.dim);
    vec.set(firstVec, 0);
    vec.set(secondVec, options.dim);
    records.push({ kind: "pair", first: pair.first, second: pair.second, vec });
  }
  return records;
}

export interface ManifestEntry {
  mention_id: string;
  image: string;
}

export function loadManifest(path: string): ManifestEntry[] {
  const entries: ManifestEntry[] = [];
  const seen = new Set<string>();
  readFileSync(path, "utf-8").split("\n").forEach((line, index) => {
    const trimmed = line.trim();
    if (!trimmed) return;
    let obj: unknown;
    try {
      obj = JSON.parse(trimmed);
    } catch {
      throw new Error(`manifest line ${index + 1}: invalid JSON`);
    }
    const rec = obj as Record<string, unknown>;
    if (typeof rec.mention_id !== "string" || typeof rec.image !== "string") {
      throw new Error(`manifest line ${index + 1}: expected {"mention_id", "image"}`);
    }
    if (seen.has(rec.mention_id)) {
      throw new Error(`manifest line ${index + 1}: duplicate mention ${rec.mention_id}`);
    }
    seen.add(rec.mention_id);
    entries.push({ mention_id: rec.mention_id, image: rec.image });
  });
  return entries;
}

export interface VisionExportOptions {
  manifestPath: string;
  pairsPath?: string;
  encoder: string;
  dim: number;
  imageSize: number;
}

/**
 * Per-mention vectors (image resized to imageSize^2) plus ordered-pair
 * vectors from the side-by-side concatenation of both images, resized
 * after concatenation.
 */
export function exportVision(options: VisionExportOptions): EmbRecord[] {
  const entries = loadManifest(options.manifestPath);
  const encoder = makeVisionEncoder(options.encoder, options.dim);
  const failures: string[] = [];
  const images = new Map<string, GrayImage>();
  for (const entry of entries) {
    try {
      images.set(entry.mention_id, decodePng(readFileSync(entry.image)));
    } catch (exc) {
      failures.push(`${entry.mention_id}: ${(exc as Error).message}`);
    }
  }
  if (failures.length > 0) {
    throw new Error(`unreadable images:\n  ${failures.join("\n  ")}`);
  }

  const size = options.imageSize;
  const records: EmbRecord[] = [];
  for (const entry of [...entries].sort((a, b) => a.mention_id.localeCompare(b.mention_id))) {
    const scaled = resize(images.get(entry.mention_id)!, size, size);
    records.push({
      kind: "mention",
      id: entry.mention_id,
      vec: encoder.encode(scaled.pixels, size, size),
    });
  }

  let pairs: OrderedPair[];
  if (options.pairsPath) {
    pairs = pairsFromCsv(options.pairsPath);
    for (const pair of pairs) {
      if (!images.has(pair.first) || !images.has(pair.second)) {
        throw new Error(`pair (${pair.first}, ${pair.second}) references an unlisted mention`);
      }
    }
  } else {
    const ids = [...images.keys()].sort();
    pairs = [];
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        pairs.push({ first: ids[i], second: ids[j] });
        pairs.push({ first: ids[j], second: ids[i] });
      }
    }
  }
  for (const pair of pairs) {
    const joined = concatHorizontal(images.get(pair.first)!, images.get(pair.second)!);
    const scaled = resize(joined, size, size);
    records.push({
      kind: "pair",
      first: pair.first,
      second: pair.second,
      vec: encoder.encode(scaled.pixels, size, size),
    });
  }
  return records;
}
