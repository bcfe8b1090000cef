/** Corpus JSONL reading with the same invariants the consumer enforces. */

import { readFileSync } from "node:fs";

export interface Mention {
  mention_id: string;
  doc_id: string;
  topic_id: string;
  subtopic_id: string | null;
  sentence: string;
  trigger_text: string;
  trigger_lemma: string;
  token_span: [number, number];
  gold_cluster: string;
}

const STRING_FIELDS = [
  "mention_id",
  "doc_id",
  "topic_id",
  "sentence",
  "trigger_text",
  "trigger_lemma",
  "gold_cluster",
] as const;

function parseMention(obj: unknown, lineno: number): Mention {
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error(`line ${lineno}: expected a JSON object`);
  }
  const rec = obj as Record<string, unknown>;
  for (const field of STRING_FIELDS) {
    if (typeof rec[field] !== "string") {
      throw new Error(`line ${lineno}: missing or non-string field ${JSON.stringify(field)}`);
    }
  }
  const span = rec.token_span;
  if (
    !Array.isArray(span) ||
    span.length !== 2 ||
    !span.every((v) => Number.isInteger(v))
  ) {
    throw new Error(`line ${lineno}: token_span must be [start, end]`);
  }
  const subtopic = rec.subtopic_id ?? null;
  if (subtopic !== null && typeof subtopic !== "string") {
    throw new Error(`line ${lineno}: subtopic_id must be a string or null`);
  }
  const mention: Mention = {
    mention_id: rec.mention_id as string,
    doc_id: rec.doc_id as string,
    topic_id: rec.topic_id as string,
    subtopic_id: subtopic,
    sentence: rec.sentence as string,
    trigger_text: rec.trigger_text as string,
    trigger_lemma: rec.trigger_lemma as string,
    token_span: [span[0] as number, span[1] as number],
    gold_cluster: rec.gold_cluster as string,
  };
  const nTokens = mention.sentence.split(/\s+/).filter(Boolean).length;
  const [start, end] = mention.token_span;
  if (!(0 <= start && start <= end && end < nTokens)) {
    throw new Error(
      `line ${lineno}: token span [${start}, ${end}] out of range for a ${nTokens}-token sentence`,
    );
  }
  return mention;
}

export function loadCorpus(path: string): Mention[] {
  const mentions: Mention[] = [];
  const seen = new Set<string>();
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, index) => {
    const trimmed = line.trim();
    if (!trimmed) return;
    let obj: unknown;
    try {
      obj = JSON.parse(trimmed);
    } catch {
      throw new Error(`line ${index + 1}: invalid JSON`);
    }
    const mention = parseMention(obj, index + 1);
    if (seen.has(mention.mention_id)) {
      throw new Error(`line ${index + 1}: duplicate mention_id ${JSON.stringify(mention.mention_id)}`);
    }
    seen.add(mention.mention_id);
    mentions.push(mention);
  });
  return mentions;
}

export interface OrderedPair {
  first: string;
  second: string;
}

/** Both orders of every within-topic unordered pair, in canonical order. */
export function allOrderedPairs(mentions: Mention[]): OrderedPair[] {
  const sorted = [...mentions].sort((a, b) => a.mention_id.localeCompare(b.mention_id));
  const pairs: OrderedPair[] = [];
  for (let i = 0; i < sorted.length; i++) {
    for (let j = i + 1; j < sorted.length; j++) {
      if (sorted[i].topic_id !== sorted[j].topic_id) continue;
      pairs.push({ first: sorted[i].mention_id, second: sorted[j].mention_id });
      pairs.push({ first: sorted[j].mention_id, second: sorted[i].mention_id });
    }
  }
  return pairs;
}

/** Ordered pairs (both orders) from the consumer's pairs CSV. */
export function pairsFromCsv(path: string): OrderedPair[] {
  const lines = readFileSync(path, "utf-8").split("\n").filter((l) => l.trim());
  if (lines.length === 0) throw new Error("empty pairs CSV");
  const header = lines[0].split(",");
  const aIdx = header.indexOf("pair_a");
  const bIdx = header.indexOf("pair_b");
  if (aIdx < 0 || bIdx < 0) {
    throw new Error("pairs CSV must have pair_a and pair_b columns");
  }
  const pairs: OrderedPair[] = [];
  for (const line of lines.slice(1)) {
    const cols = line.split(",");
    pairs.push({ first: cols[aIdx], second: cols[bIdx] });
    pairs.push({ first: cols[bIdx], second: cols[aIdx] });
  }
  return pairs;
}
