/**
 * Reader for the experiment CSV dialect: UTF-8, `#`-prefixed metadata lines,
 * one header row, `.` decimal separator, complex values as `re+imi`.
 */

import { readFileSync } from "node:fs";

export interface CsvTable {
  /** metadata lines with the leading "# " stripped */
  meta: string[];
  columns: string[];
  /** raw string cells, row-major, aligned with `columns` */
  rows: string[][];
}

export class SchemaError extends Error {
  constructor(expected: string[], found: string[], path: string) {
    super(
      `${path}: missing column(s) [${expected
        .filter((c) => !found.includes(c))
        .join(", ")}]; expected [${expected.join(", ")}], found [${found.join(", ")}]`,
    );
    this.name = "SchemaError";
  }
}

export function parseCsv(text: string): CsvTable {
  const meta: string[] = [];
  const body: string[] = [];
  for (const line of text.split(/\r?\n/)) {
    if (line.startsWith("#")) {
      meta.push(line.replace(/^#\s?/, ""));
    } else if (line.trim() !== "") {
      body.push(line);
    }
  }
  if (body.length === 0) {
    throw new Error("CSV has no header row");
  }
  const columns = body[0].split(",");
  const rows = body.slice(1).map((line) => line.split(","));
  return { meta, columns, rows };
}

export function readCsv(path: string): CsvTable {
  return parseCsv(readFileSync(path, "utf-8"));
}

export function requireColumns(table: CsvTable, expected: string[], path: string): void {
  if (!expected.every((c) => table.columns.includes(c))) {
    throw new SchemaError(expected, table.columns, path);
  }
}

/** Parse a cell as a real number; `re+imi` complex cells yield their modulus. */
export function numeric(cell: string): number {
  if (cell === "") return NaN;
  const plain = Number(cell);
  if (!Number.isNaN(plain)) return plain;
  const complex = cell.match(/^([+-]?[\d.eE+-]+?)([+-][\d.eE]+(?:[+-]\d+)?)i$/);
  if (complex) {
    const re = Number(complex[1]);
    const im = Number(complex[2]);
    if (!Number.isNaN(re) && !Number.isNaN(im)) return Math.hypot(re, im);
  }
  return NaN;
}

/** Column vector of finite numbers with their row indices. */
export function column(table: CsvTable, name: string): number[] {
  const idx = table.columns.indexOf(name);
  return table.rows.map((row) => numeric(row[idx] ?? ""));
}

export function cell(table: CsvTable, row: number, name: string): string {
  return table.rows[row][table.columns.indexOf(name)] ?? "";
}
