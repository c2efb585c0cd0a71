#!/usr/bin/env node
/**
 * Command line entry: render one figure kind from one evidence CSV.
 *
 *   fluctlab-viz --csv <file> --kind <kind> --out <file.svg> [--title <t>]
 *
 * Exit codes follow the harness convention: 0 on success, 2 for
 * configuration problems (bad flags, unknown kind, unreadable or
 * mismatched CSV), 1 for anything unexpected.  The figure is rendered
 * before the output file is opened, so a failed render writes nothing.
 */

import { readFileSync, realpathSync, writeFileSync } from "node:fs";
import { pathToFileURL } from "node:url";
import { SchemaError } from "./csv.js";
import { FIGURE_KINDS, FigureKind, render } from "./figures.js";

const USAGE =
  "usage: fluctlab-viz --csv <file> --kind <kind> --out <file.svg>" +
  ` [--title <text>]\nkinds: ${FIGURE_KINDS.join(", ")}`;

interface Args {
  csv: string;
  kind: FigureKind;
  out: string;
  title?: string;
}

function parseArgs(argv: string[]): Args {
  const values = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i]!;
    if (!flag.startsWith("--")) {
      throw new SchemaError(`unexpected argument ${flag}\n${USAGE}`);
    }
    const name = flag.slice(2);
    if (!["csv", "kind", "out", "title"].includes(name)) {
      throw new SchemaError(`unknown flag ${flag}\n${USAGE}`);
    }
    const value = argv[i + 1];
    if (value === undefined) {
      throw new SchemaError(`${flag} needs a value\n${USAGE}`);
    }
    values.set(name, value);
  }
  for (const required of ["csv", "kind", "out"]) {
    if (!values.has(required)) {
      throw new SchemaError(`--${required} is required\n${USAGE}`);
    }
  }
  const kind = values.get("kind")!;
  if (!(FIGURE_KINDS as readonly string[]).includes(kind)) {
    throw new SchemaError(
      `unknown kind ${kind}; expected one of ${FIGURE_KINDS.join(", ")}`
    );
  }
  return {
    csv: values.get("csv")!,
    kind: kind as FigureKind,
    out: values.get("out")!,
    title: values.get("title"),
  };
}

export function main(argv: string[]): number {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    process.stderr.write(`${(err as Error).message}\n`);
    return 2;
  }
  try {
    const csvText = readFileSync(args.csv, "utf8");
    const svg = render({
      kind: args.kind,
      csvText,
      title: args.title ?? `${args.kind}: ${args.csv}`,
    });
    writeFileSync(args.out, svg);
  } catch (err) {
    if (err instanceof SchemaError) {
      process.stderr.write(`${err.message}\n`);
      return 2;
    }
    if ((err as NodeJS.ErrnoException).code === "ENOENT") {
      process.stderr.write(`${(err as Error).message}\n`);
      return 2;
    }
    process.stderr.write(`${(err as Error).stack ?? err}\n`);
    return 1;
  }
  return 0;
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(realpathSync(process.argv[1])).href;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
