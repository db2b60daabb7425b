import { describe, expect, it } from "vitest";

import { fnv1a, hashEncode, loadEncoder, mulberry32 } from "../src/backends.js";

describe("hash primitives", () => {
  it("fnv1a is stable for known strings", () => {
    expect(fnv1a("")).toBe(0x811c9dc5);
    expect(fnv1a("patient")).toBe(fnv1a("patient"));
    expect(fnv1a("patient")).not.toBe(fnv1a("patients"));
  });

  it("mulberry32 streams are deterministic and in [0, 1)", () => {
    const a = mulberry32(42);
    const b = mulberry32(42);
    for (let i = 0; i < 100; i++) {
      const x = a();
      expect(x).toBe(b());
      expect(x).toBeGreaterThanOrEqual(0);
      expect(x).toBeLessThan(1);
    }
  });
});

describe("hashEncode", () => {
  it("is deterministic per (text, pooling)", () => {
    const a = hashEncode("patient fall near simulator", "mean", 150);
    const b = hashEncode("patient fall near simulator", "mean", 150);
    expect(Array.from(a)).toEqual(Array.from(b));
  });

  it("produces unit-norm vectors of the fixed width", () => {
    for (const pooling of ["cls", "mean"] as const) {
      const v = hashEncode("dose deviation caught at review", pooling, 150);
      expect(v.length).toBe(384);
      const norm = Math.sqrt(Array.from(v).reduce((s, x) => s + x * x, 0));
      expect(norm).toBeCloseTo(1.0, 12);
    }
  });

  it("cls and mean pooling differ", () => {
    const text = "two token";
    expect(Array.from(hashEncode(text, "cls", 150))).not.toEqual(
      Array.from(hashEncode(text, "mean", 150)),
    );
  });

  it("truncates at max tokens instead of failing", () => {
    const tokens = Array.from({ length: 400 }, (_, i) => `tok${i}`);
    const full = hashEncode(tokens.join(" "), "mean", 150);
    const truncated = hashEncode(tokens.slice(0, 150).join(" "), "mean", 150);
    expect(Array.from(full)).toEqual(Array.from(truncated));
    const shorter = hashEncode(tokens.slice(0, 149).join(" "), "mean", 150);
    expect(Array.from(full)).not.toEqual(Array.from(shorter));
  });

  it("embeds empty text as the zero vector", () => {
    const v = hashEncode("   ", "mean", 150);
    expect(Array.from(v).every((x) => x === 0)).toBe(true);
  });

  it("word order matters for cls, not for mean", () => {
    const ab = hashEncode("alpha beta", "cls", 150);
    const ba = hashEncode("beta alpha", "cls", 150);
    expect(Array.from(ab)).not.toEqual(Array.from(ba));
    const mab = hashEncode("alpha beta", "mean", 150);
    const mba = hashEncode("beta alpha", "mean", 150);
    expect(Array.from(mab)).toEqual(Array.from(mba));
  });
});

describe("loadEncoder", () => {
  it("returns a 384-wide encoder for the hash model id", async () => {
    const enc = await loadEncoder("deterministic-hash");
    expect(enc.dim).toBe(384);
    const [v] = await enc.encodeBatch(["some text"], "cls", 150);
    expect(v!.length).toBe(384);
  });

  it("fails with a clear message when the transformer runtime is absent", async () => {
    let runtimeAvailable = true;
    try {
      await import("@xenova/transformers");
    } catch {
      runtimeAvailable = false;
    }
    if (runtimeAvailable) {
      // runtime present: loading still must either succeed or name the model
      await expect(
        loadEncoder("definitely/not-a-real-model-id"),
      ).rejects.toThrow(/not-a-real-model-id/);
    } else {
      await expect(loadEncoder("any/model")).rejects.toThrow(
        /model backend unavailable/,
      );
    }
  }, 60000);
});
