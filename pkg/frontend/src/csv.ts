/**
 * Reading the evidence CSV files.
 *
 * The producer writes plain comma-separated values with a header row,
 * LF line endings, and floats at 17 significant digits; nothing is
 * quoted.  Schema checks are strict: a figure kind names the exact
 * header it consumes, and any mismatch is reported with both column
 * lists so the wrong-file case is diagnosable from the message alone.
 */

import { readFileSync } from "node:fs";

export interface Table {
  header: string[];
  rows: string[][];
}

/** Raised for unreadable, empty, or wrongly shaped input files. */
export class SchemaError extends Error {}

export function parseCsv(text: string, context: string): Table {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${context}: file is empty`);
  }
  const split = (line: string) => line.replace(/\r$/, "").split(",");
  const header = split(lines[0]!);
  const rows = lines.slice(1).map(split);
  for (const [i, row] of rows.entries()) {
    if (row.length !== header.length) {
      throw new SchemaError(
        `${context}: row ${i + 1} has ${row.length} fields, ` +
          `header has ${header.length}`
      );
    }
  }
  return { header, rows };
}

export function readTable(path: string): Table {
  let text: string;
  try {
    text = readFileSync(path, "utf8");
  } catch (err) {
    throw new SchemaError(`cannot read '${path}': ${(err as Error).message}`);
  }
  return parseCsv(text, path);
}

/**
 * Require the exact header sequence; data rows must exist.  The error
 * message lists expected versus found columns.
 */
export function requireColumns(
  table: Table,
  expected: readonly string[],
  context: string
): void {
  const found = table.header;
  const matches =
    found.length === expected.length &&
    expected.every((name, i) => found[i] === name);
  if (!matches) {
    throw new SchemaError(
      `${context}: column mismatch; expected [${expected.join(", ")}], ` +
        `found [${found.join(", ")}]`
    );
  }
  if (table.rows.length === 0) {
    throw new SchemaError(`${context}: no data rows`);
  }
}

/** Parse one column as finite numbers. */
export function numericColumn(
  table: Table,
  name: string,
  context: string
): number[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new SchemaError(`${context}: missing column '${name}'`);
  }
  return table.rows.map((row, i) => {
    const value = Number(row[idx]);
    if (!Number.isFinite(value)) {
      throw new SchemaError(
        `${context}: row ${i + 1}, column '${name}': ` +
          `'${row[idx]}' is not a finite number`
      );
    }
    return value;
  });
}
