import { describe, expect, it } from "vitest";

import { HashTextEncoder, HashVisionEncoder, makeTextEncoder } from "../src/encoders.js";

function norm(vec: Float32Array): number {
  let s = 0;
  for (const v of vec) s += v * v;
  return Math.sqrt(s);
}

describe("hash text encoder", () => {
  const encoder = new HashTextEncoder(16);

  it("is deterministic", () => {
    const a = encoder.encode(["the", "quake", "hit"]);
    const b = encoder.encode(["the", "quake", "hit"]);
    expect([...a]).toEqual([...b]);
  });

  it("is position sensitive", () => {
    const ab = encoder.encode(["alpha", "beta"]);
    const ba = encoder.encode(["beta", "alpha"]);
    expect([...ab]).not.toEqual([...ba]);
  });

  it("produces unit vectors", () => {
    const vec = encoder.encode(["one", "two", "three", "four"]);
    expect(norm(vec)).toBeCloseTo(1.0, 6);
  });

  it("splits segments of a joint pass", () => {
    const tokens = ["a1", "a2", "<sep>", "b1", "b2", "b3"];
    const [first, second] = encoder.encodeSegments(tokens, 2);
    expect(first).toHaveLength(16);
    expect(second).toHaveLength(16);
    expect(norm(first)).toBeCloseTo(1.0, 6);
    // second segment depends on absolute positions, so flipping the
    // order changes it
    const flipped = encoder.encodeSegments(["b1", "b2", "b3", "<sep>", "a1", "a2"], 3);
    expect([...flipped[0]]).not.toEqual([...second]);
  });

  it("rejects empty sequences", () => {
    expect(() => encoder.encode([])).toThrow(/empty/);
  });

  it("factory rejects unknown names", () => {
    expect(() => makeTextEncoder("longformer", 16)).toThrow(/unsupported/);
    expect(makeTextEncoder("hash", 8).dim).toBe(8);
  });
});

describe("hash vision encoder", () => {
  const encoder = new HashVisionEncoder(16, 4);

  it("is deterministic and content sensitive", () => {
    const pixels = new Float64Array(64).map((_, i) => (i % 7) / 7);
    const a = encoder.encode(pixels, 8, 8);
    const b = encoder.encode(pixels, 8, 8);
    expect([...a]).toEqual([...b]);

    const brighter = pixels.map((v) => Math.min(1, v + 0.3));
    const c = encoder.encode(brighter, 8, 8);
    expect([...c]).not.toEqual([...a]);
  });

  it("validates the pixel buffer size", () => {
    expect(() => encoder.encode(new Float64Array(10), 8, 8)).toThrow(/pixel buffer/);
  });
});
