#!/usr/bin/env node
/**
 * export-embeddings --model <id> --pooling cls --input texts.tsv --output emb.txt
 *
 * Input is the `id<TAB>text` TSV written by `triage preprocess
 * --export-text`. Output is an embedv1 file the triage trainer reads
 * directly. `--model deterministic-hash` selects the offline synthetic
 * encoder; any other id loads a transformers.js feature-extraction model.
 *
 * Exit codes: 0 success, 1 usage error, 2 data or model error.
 */

import { realpathSync } from "node:fs";
import { pathToFileURL } from "node:url";

import { DEFAULT_MODEL_ID } from "./backends.js";
import { DEFAULTS, exportEmbeddings } from "./exporter.js";
import { readInputTsv } from "./tsv.js";

class UsageError extends Error {}

interface CliArgs {
  model: string;
  pooling: "cls" | "mean";
  maxTokens: number;
  batch: number;
  input: string;
  output: string;
}

export function parseArgs(argv: string[]): CliArgs {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i]!;
    if (!flag.startsWith("--")) {
      throw new UsageError(`unexpected argument: ${flag}`);
    }
    const value = argv[i + 1];
    if (value === undefined) {
      throw new UsageError(`missing value for ${flag}`);
    }
    values.set(flag.slice(2), value);
  }
  const known = new Set(["model", "pooling", "max-tokens", "batch", "input", "output"]);
  for (const key of values.keys()) {
    if (!known.has(key)) throw new UsageError(`unknown option --${key}`);
  }
  const input = values.get("input");
  const output = values.get("output");
  if (!input) throw new UsageError("missing required option --input");
  if (!output) throw new UsageError("missing required option --output");
  const pooling = values.get("pooling") ?? DEFAULTS.pooling;
  if (pooling !== "cls" && pooling !== "mean") {
    throw new UsageError(`--pooling must be cls or mean, got ${pooling}`);
  }
  const maxTokens = Number(values.get("max-tokens") ?? DEFAULTS.maxTokens);
  const batch = Number(values.get("batch") ?? DEFAULTS.batchSize);
  if (!Number.isInteger(maxTokens) || !Number.isInteger(batch)) {
    throw new UsageError("--max-tokens and --batch must be integers");
  }
  return {
    model: values.get("model") ?? DEFAULT_MODEL_ID,
    pooling,
    maxTokens,
    batch,
    input,
    output,
  };
}

export async function run(argv: string[]): Promise<number> {
  let args: CliArgs;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`usage error: ${(err as Error).message}\n`);
    return 1;
  }
  try {
    const reports = readInputTsv(args.input);
    const result = await exportEmbeddings(reports, {
      modelId: args.model,
      pooling: args.pooling,
      maxTokens: args.maxTokens,
      batchSize: args.batch,
      outputPath: args.output,
    });
    process.stdout.write(
      `exported ${result.nRows} embeddings of dim ${result.dim} ` +
        `(model ${result.model}) to ${args.output}\n`,
    );
    return 0;
  } catch (err) {
    process.stderr.write(`error: ${(err as Error).message}\n`);
    return 2;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
if (invokedDirectly) {
  run(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
