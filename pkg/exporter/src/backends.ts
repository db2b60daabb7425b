/**
 * Encoder backends.
 *
 * `deterministic-hash` is a dependency-free synthetic encoder: every token
 * maps to a pseudo-random unit-scale vector seeded by its hash, pooled by
 * MEAN (token average) or CLS (a vector seeded by the whole truncated
 * text). It is fully deterministic across runs and platforms and exists so
 * the export pipeline and its file contract can run and be tested offline.
 *
 * Any other model id is forwarded to a transformers.js feature-extraction
 * pipeline (dynamic import; inference runs in evaluation mode, so outputs
 * are deterministic for a fixed model). Loading fails with a clear error
 * when the runtime or the model weights are unavailable.
 */

export type Pooling = "cls" | "mean";

export interface Encoder {
  /** Embedding width; fixed per model. */
  dim: number;
  /** Human-readable tag recorded in the sidecar metadata. */
  describe: string;
  encodeBatch(texts: string[], pooling: Pooling, maxTokens: number): Promise<Float64Array[]>;
}

export const HASH_MODEL_ID = "deterministic-hash";
export const DEFAULT_MODEL_ID = "bionlp/bluebert_pubmed_mimic_uncased_L-12_H-768_A-12";

const HASH_DIM = 384;

/** FNV-1a over UTF-16 code units, 32-bit. */
export function fnv1a(text: string): number {
  let h = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193);
  }
  return h >>> 0;
}

/** mulberry32: tiny deterministic PRNG over a 32-bit seed. */
export function mulberry32(seed: number): () => number {
  let a = seed >>> 0;
  return () => {
    a = (a + 0x6d2b79f5) >>> 0;
    let t = a;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

function seededVector(seed: number, dim: number): Float64Array {
  const rng = mulberry32(seed);
  const v = new Float64Array(dim);
  for (let i = 0; i < dim; i++) v[i] = 2 * rng() - 1;
  return v;
}

function l2normalize(v: Float64Array): Float64Array {
  let norm = 0;
  for (const x of v) norm += x * x;
  norm = Math.sqrt(norm);
  if (norm > 0) {
    for (let i = 0; i < v.length; i++) v[i]! /= norm;
  }
  return v;
}

export function hashEncode(
  text: string,
  pooling: Pooling,
  maxTokens: number,
): Float64Array {
  const tokens = text.split(/\s+/).filter(Boolean).slice(0, maxTokens);
  if (tokens.length === 0) return new Float64Array(HASH_DIM);
  if (pooling === "cls") {
    return l2normalize(seededVector(fnv1a(tokens.join(" ")), HASH_DIM));
  }
  const acc = new Float64Array(HASH_DIM);
  for (const token of tokens) {
    const tv = seededVector(fnv1a(token), HASH_DIM);
    for (let i = 0; i < HASH_DIM; i++) acc[i]! += tv[i]!;
  }
  for (let i = 0; i < HASH_DIM; i++) acc[i]! /= tokens.length;
  return l2normalize(acc);
}

class HashEncoder implements Encoder {
  dim = HASH_DIM;
  describe = HASH_MODEL_ID;

  async encodeBatch(texts: string[], pooling: Pooling, maxTokens: number) {
    return texts.map((t) => hashEncode(t, pooling, maxTokens));
  }
}

class TransformerEncoder implements Encoder {
  constructor(
    private pipe: any,
    public dim: number,
    public describe: string,
  ) {}

  async encodeBatch(texts: string[], pooling: Pooling, maxTokens: number) {
    // the pipeline tokenizer truncates; overlong inputs never fail
    const out = await this.pipe(texts, {
      pooling,
      normalize: false,
      truncation: true,
      max_length: maxTokens,
    });
    const flat: number[] = Array.from(out.data as Iterable<number>);
    const rows: Float64Array[] = [];
    for (let i = 0; i < texts.length; i++) {
      rows.push(Float64Array.from(flat.slice(i * this.dim, (i + 1) * this.dim)));
    }
    return rows;
  }
}

export async function loadEncoder(modelId: string): Promise<Encoder> {
  if (modelId === HASH_MODEL_ID) {
    return new HashEncoder();
  }
  let pipelineFactory: any;
  try {
    // optional runtime dependency; resolved only when a real model is used
    const specifier = "@xenova/transformers";
    const mod: any = await import(/* @vite-ignore */ specifier);
    pipelineFactory = mod.pipeline;
  } catch (err) {
    throw new Error(
      `model backend unavailable: install @xenova/transformers to run ` +
        `model "${modelId}" (or use --model ${HASH_MODEL_ID}); ` +
        `import failed with: ${(err as Error).message}`,
    );
  }
  let pipe: any;
  try {
    pipe = await pipelineFactory("feature-extraction", modelId);
  } catch (err) {
    throw new Error(
      `failed to load model "${modelId}": ${(err as Error).message}`,
    );
  }
  const dim: number | undefined = pipe?.model?.config?.hidden_size;
  if (!dim || dim < 1) {
    throw new Error(`model "${modelId}" reports no hidden size`);
  }
  return new TransformerEncoder(pipe, dim, modelId);
}
