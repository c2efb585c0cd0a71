import { describe, expect, it } from "vitest";
import { SchemaError, parseCsv, requireColumns, numericColumn } from "../src/csv.js";

describe("parseCsv", () => {
  it("splits header and rows", () => {
    const t = parseCsv("a,b\n1,2\n3,4\n", "t");
    expect(t.header).toEqual(["a", "b"]);
    expect(t.rows).toEqual([
      ["1", "2"],
      ["3", "4"],
    ]);
  });

  it("tolerates CRLF and a missing final newline", () => {
    const t = parseCsv("a,b\r\n1,2", "t");
    expect(t.rows).toEqual([["1", "2"]]);
  });

  it("rejects an empty file", () => {
    expect(() => parseCsv("", "t")).toThrow(SchemaError);
    expect(() => parseCsv("", "t")).toThrow(/empty/);
  });

  it("rejects a ragged row by its data row number", () => {
    expect(() => parseCsv("a,b\n1,2\n3\n", "t")).toThrow(/row 2/);
  });
});

describe("requireColumns", () => {
  it("accepts the exact column sequence", () => {
    const t = parseCsv("a,b\n1,2\n", "t");
    expect(() => requireColumns(t, ["a", "b"], "t")).not.toThrow();
  });

  it("lists expected and found columns on mismatch", () => {
    const t = parseCsv("time,mass\n0,1\n", "t");
    let message = "";
    try {
      requireColumns(t, ["time", "mean_dist"], "t");
    } catch (err) {
      message = (err as Error).message;
    }
    expect(message).toContain("expected [time, mean_dist]");
    expect(message).toContain("found [time, mass]");
  });

  it("rejects a header-only table", () => {
    const t = parseCsv("a,b\n", "t");
    expect(() => requireColumns(t, ["a", "b"], "t")).toThrow(/no data rows/);
  });
});

describe("numericColumn", () => {
  it("parses scientific notation", () => {
    const t = parseCsv("x\n1e-3\n2.5\n", "t");
    expect(numericColumn(t, "x", "t")).toEqual([1e-3, 2.5]);
  });

  it("rejects non-numeric cells", () => {
    const t = parseCsv("x\noops\n", "t");
    expect(() => numericColumn(t, "x", "t")).toThrow(SchemaError);
  });
});
