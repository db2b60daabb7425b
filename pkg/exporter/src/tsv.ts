/**
 * Reader for the `id<TAB>text` TSV produced by the primary CLI's
 * `triage preprocess --export-text` (text already expanded + lowercased,
 * internal tabs/newlines collapsed to spaces).
 */

import { readFileSync } from "node:fs";

export interface InputReport {
  id: string;
  text: string;
}

export function parseInputTsv(content: string, name = "<input>"): InputReport[] {
  const reports: InputReport[] = [];
  const seen = new Set<string>();
  const lines = content.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i]!;
    if (line === "" && i === lines.length - 1) continue; // trailing newline
    if (line.trim() === "") continue;
    const tab = line.indexOf("\t");
    if (tab < 0) {
      throw new Error(`${name} line ${i + 1}: expected id<TAB>text`);
    }
    const id = line.slice(0, tab);
    if (id === "") {
      throw new Error(`${name} line ${i + 1}: empty report id`);
    }
    if (seen.has(id)) {
      throw new Error(`${name} line ${i + 1}: duplicate report id ${id}`);
    }
    seen.add(id);
    reports.push({ id, text: line.slice(tab + 1) });
  }
  return reports;
}

export function readInputTsv(path: string): InputReport[] {
  return parseInputTsv(readFileSync(path, "utf-8"), path);
}
