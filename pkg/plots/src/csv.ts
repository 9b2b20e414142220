/** Minimal CSV reader for the benchmark outputs (no quoting, header row). */

import * as fs from "fs";

export interface Table {
  header: string[];
  rows: string[][];
}

export function readCsv(path: string): Table {
  const text = fs.readFileSync(path, "utf8").trim();
  if (text.length === 0) throw new Error(`${path}: empty file`);
  const lines = text.split(/\r?\n/);
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((l) => l.split(","));
  for (const r of rows) {
    if (r.length !== header.length) {
      throw new Error(`${path}: ragged row (${r.length} fields, expected ${header.length})`);
    }
  }
  return { header, rows };
}

export function requireColumns(t: Table, cols: string[], path: string): Map<string, number> {
  const idx = new Map<string, number>();
  for (const c of cols) {
    const i = t.header.indexOf(c);
    if (i < 0) throw new Error(`${path}: missing column '${c}' (have: ${t.header.join(",")})`);
    idx.set(c, i);
  }
  return idx;
}

export function numeric(value: string, column: string): number {
  const x = Number(value);
  if (!Number.isFinite(x)) throw new Error(`non-numeric value '${value}' in column '${column}'`);
  return x;
}
