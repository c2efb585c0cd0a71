import { existsSync, mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";
import { main } from "../src/cli.js";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));
const scratch = () => mkdtempSync(join(tmpdir(), "fluctlab-viz-"));

describe("main", () => {
  it("writes an SVG and returns 0 on success", () => {
    const out = join(scratch(), "entropy.svg");
    const rc = main([
      "--csv",
      join(FIXTURES, "entropy_series.csv"),
      "--kind",
      "entropy",
      "--out",
      out,
    ]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("returns 2 for an unknown kind and writes nothing", () => {
    const out = join(scratch(), "x.svg");
    const rc = main([
      "--csv",
      join(FIXTURES, "entropy_series.csv"),
      "--kind",
      "histogram",
      "--out",
      out,
    ]);
    expect(rc).toBe(2);
    expect(existsSync(out)).toBe(false);
  });

  it("returns 2 when required flags are missing", () => {
    expect(main([])).toBe(2);
    expect(main(["--csv", "x.csv"])).toBe(2);
    expect(main(["--csv", "x.csv", "--kind", "entropy"])).toBe(2);
  });

  it("returns 2 for an unreadable CSV path", () => {
    const out = join(scratch(), "x.svg");
    const rc = main([
      "--csv",
      join(FIXTURES, "does-not-exist.csv"),
      "--kind",
      "entropy",
      "--out",
      out,
    ]);
    expect(rc).toBe(2);
    expect(existsSync(out)).toBe(false);
  });

  it("returns 2 on schema mismatch and writes nothing", () => {
    const out = join(scratch(), "x.svg");
    const rc = main([
      "--csv",
      join(FIXTURES, "entropy_series.csv"),
      "--kind",
      "contraction",
      "--out",
      out,
    ]);
    expect(rc).toBe(2);
    expect(existsSync(out)).toBe(false);
  });

  it("honours --title", () => {
    const out = join(scratch(), "titled.svg");
    const rc = main([
      "--csv",
      join(FIXTURES, "cascade.csv"),
      "--kind",
      "cascade",
      "--out",
      out,
      "--title",
      "mollification ladder",
    ]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("mollification ladder");
  });
});
