/**
 * Batch export: encode preprocessed reports with a frozen encoder and
 * write one embedv1 row per report, plus a small sidecar metadata file
 * recording the model, pooling, and truncation so a file's provenance is
 * never ambiguous.
 */

import { renameSync, writeFileSync } from "node:fs";

import { Encoder, Pooling, loadEncoder } from "./backends.js";
import { EmbeddingRow, writeEmbedFile } from "./embedv1.js";
import { InputReport } from "./tsv.js";

export interface ExportConfig {
  modelId: string;
  pooling: Pooling;
  maxTokens: number;
  batchSize: number;
  outputPath: string;
}

export const DEFAULTS = {
  pooling: "cls" as Pooling,
  maxTokens: 150,
  batchSize: 32,
};

export interface ExportResult {
  nRows: number;
  dim: number;
  model: string;
}

export async function exportEmbeddings(
  reports: InputReport[],
  cfg: ExportConfig,
): Promise<ExportResult> {
  if (reports.length === 0) {
    throw new Error("no input reports to embed");
  }
  if (cfg.maxTokens < 1) {
    throw new Error(`max tokens must be >= 1, got ${cfg.maxTokens}`);
  }
  if (cfg.batchSize < 1) {
    throw new Error(`batch size must be >= 1, got ${cfg.batchSize}`);
  }
  const encoder: Encoder = await loadEncoder(cfg.modelId);
  const rows: EmbeddingRow[] = [];
  for (let start = 0; start < reports.length; start += cfg.batchSize) {
    const batch = reports.slice(start, start + cfg.batchSize);
    const vectors = await encoder.encodeBatch(
      batch.map((r) => r.text),
      cfg.pooling,
      cfg.maxTokens,
    );
    batch.forEach((r, i) => rows.push({ id: r.id, vector: vectors[i]! }));
  }
  writeEmbedFile(cfg.outputPath, encoder.dim, rows);
  writeSidecar(cfg, encoder);
  return { nRows: rows.length, dim: encoder.dim, model: encoder.describe };
}

function writeSidecar(cfg: ExportConfig, encoder: Encoder): void {
  const meta =
    `model=${encoder.describe}\npooling=${cfg.pooling}\n` +
    `max_tokens=${cfg.maxTokens}\ndim=${encoder.dim}\n`;
  const path = `${cfg.outputPath}.meta`;
  writeFileSync(`${path}.tmp`, meta, "utf-8");
  renameSync(`${path}.tmp`, path);
}
