/**
 * Mention marking and context windowing.
 *
 * The event trigger is wrapped in the special tokens <m> and </m>; when
 * a marked sentence exceeds the maximum token length it is
 * center-truncated around the marked span so the trigger keeps its
 * surrounding context.
 */

import type { Mention } from "./corpus.js";

export const OPEN_MARKER = "<m>";
export const CLOSE_MARKER = "</m>";
export const SEPARATOR = "<sep>";

export function tokenize(sentence: string): string[] {
  return sentence.split(/\s+/).filter(Boolean);
}

export function markTokens(mention: Mention): string[] {
  const tokens = tokenize(mention.sentence);
  const [start, end] = mention.token_span;
  if (!(0 <= start && start <= end && end < tokens.length)) {
    throw new Error(
      `mention ${mention.mention_id}: span [${start}, ${end}] out of range`,
    );
  }
  return [
    ...tokens.slice(0, start),
    OPEN_MARKER,
    ...tokens.slice(start, end + 1),
    CLOSE_MARKER,
    ...tokens.slice(end + 1),
  ];
}

/**
 * Keep at most maxTokens tokens, centered on the marked span. The
 * marker tokens themselves always survive truncation.
 */
export function centerTruncate(tokens: string[], maxTokens: number): string[] {
  if (maxTokens < 4) throw new Error(`maxTokens too small: ${maxTokens}`);
  if (tokens.length <= maxTokens) return tokens;
  const open = tokens.indexOf(OPEN_MARKER);
  const close = tokens.indexOf(CLOSE_MARKER);
  const mid = open >= 0 && close >= 0 ? Math.floor((open + close) / 2) : Math.floor(tokens.length / 2);
  let lo = mid - Math.floor(maxTokens / 2);
  lo = Math.max(0, Math.min(lo, tokens.length - maxTokens));
  const window = tokens.slice(lo, lo + maxTokens);
  // never cut the markers away from the trigger
  if (open >= 0 && close >= 0 && (open < lo || close >= lo + maxTokens)) {
    const span = tokens.slice(open, close + 1);
    if (span.length >= maxTokens) return span.slice(0, maxTokens);
    const pad = maxTokens - span.length;
    const before = tokens.slice(Math.max(0, open - Math.ceil(pad / 2)), open);
    const after = tokens.slice(close + 1, close + 1 + (pad - before.length));
    return [...before, ...span, ...after].slice(0, maxTokens);
  }
  return window;
}

export function markedWindow(mention: Mention, maxTokens: number): string[] {
  return centerTruncate(markTokens(mention), maxTokens);
}

/** Cross-encoding input: first sentence's window, separator, second's. */
export function crossSequence(
  first: Mention,
  second: Mention,
  maxTokens: number,
): { tokens: string[]; firstLength: number } {
  const a = markedWindow(first, maxTokens);
  const b = markedWindow(second, maxTokens);
  return { tokens: [...a, SEPARATOR, ...b], firstLength: a.length };
}
