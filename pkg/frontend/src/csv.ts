import { readFileSync } from "node:fs";
import Papa from "papaparse";

export const CSV_HEADER = [
  "time",
  "protocol",
  "unraveling",
  "mode",
  "quantity",
  "value",
  "ci_lo",
  "ci_hi",
  "shots",
  "seed",
] as const;

export interface ResultRow {
  time: number;
  protocol: string;
  unraveling: string;
  mode: string;
  quantity: string;
  value: number;
  ciLo: number | null;
  ciHi: number | null;
  shots: number | null;
  seed: number;
}

export class CsvSchemaError extends Error {}
export class EmptyDataError extends Error {}

function num(field: string, row: Record<string, string>): number {
  const v = Number(row[field]);
  if (!Number.isFinite(v)) {
    throw new CsvSchemaError(`non-numeric ${field} value: ${row[field]}`);
  }
  return v;
}

function optNum(field: string, row: Record<string, string>): number | null {
  const raw = row[field];
  if (raw === "" || raw === undefined) return null;
  const v = Number(raw);
  if (!Number.isFinite(v)) {
    throw new CsvSchemaError(`non-numeric ${field} value: ${raw}`);
  }
  return v;
}

export function parseResultCsv(text: string): ResultRow[] {
  const parsed = Papa.parse<Record<string, string>>(text.trim(), {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    throw new CsvSchemaError(`CSV parse failure: ${parsed.errors[0].message}`);
  }
  const fields = parsed.meta.fields ?? [];
  if (fields.join(",") !== CSV_HEADER.join(",")) {
    throw new CsvSchemaError(
      `unexpected CSV header: ${fields.join(",")} (expected ${CSV_HEADER.join(",")})`
    );
  }
  return parsed.data.map((row) => ({
    time: num("time", row),
    protocol: row.protocol,
    unraveling: row.unraveling,
    mode: row.mode,
    quantity: row.quantity,
    value: num("value", row),
    ciLo: optNum("ci_lo", row),
    ciHi: optNum("ci_hi", row),
    shots: optNum("shots", row),
    seed: num("seed", row),
  }));
}

export function readResultCsv(path: string): ResultRow[] {
  return parseResultCsv(readFileSync(path, "utf-8"));
}
