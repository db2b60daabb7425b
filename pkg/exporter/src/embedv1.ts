/**
 * embedv1 writer: the plain-text embedding interchange consumed by the
 * triage trainer.
 *
 * Line 1 is `embedv1 <dim> <n_rows>`; every following line is
 * `<report_id><TAB><v1> <v2> ... <vdim>` with space-separated decimals at
 * 17 significant digits (exact float64 round-trip). UTF-8, LF endings,
 * written atomically (temp file + rename).
 */

import { renameSync, writeFileSync } from "node:fs";

export interface EmbeddingRow {
  id: string;
  vector: Float64Array;
}

/** 17 significant digits: enough to reconstruct the exact float64. */
export function formatValue(v: number): string {
  if (!Number.isFinite(v)) {
    throw new Error(`non-finite embedding value: ${v}`);
  }
  return v.toPrecision(17);
}

export function formatFile(dim: number, rows: EmbeddingRow[]): string {
  const lines = [`embedv1 ${dim} ${rows.length}`];
  const seen = new Set<string>();
  for (const row of rows) {
    if (row.id.includes("\t") || row.id.includes("\n") || row.id === "") {
      throw new Error(`invalid report id: ${JSON.stringify(row.id)}`);
    }
    if (seen.has(row.id)) {
      throw new Error(`duplicate report id: ${row.id}`);
    }
    seen.add(row.id);
    if (row.vector.length !== dim) {
      throw new Error(
        `row ${row.id} has dimension ${row.vector.length}, expected ${dim}`,
      );
    }
    const cells = Array.from(row.vector, formatValue).join(" ");
    lines.push(`${row.id}\t${cells}`);
  }
  return lines.join("\n") + "\n";
}

export function writeEmbedFile(
  path: string,
  dim: number,
  rows: EmbeddingRow[],
): void {
  const tmp = `${path}.tmp`;
  writeFileSync(tmp, formatFile(dim, rows), { encoding: "utf-8" });
  renameSync(tmp, path);
}
