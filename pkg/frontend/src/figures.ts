/**
 * Figure kinds over the evidence CSV files written by the fluctlab
 * harness.  Each kind names the exact column schema it consumes and
 * maps rows to a deterministic SVG scene; rendering is a pure
 * function of the CSV text and the figure spec.
 */

import {
  Table,
  SchemaError,
  parseCsv,
  requireColumns,
  numericColumn,
} from "./csv.js";
import { fitEnvelope, envelopeColumnRate } from "./fit.js";
import {
  PALETTE,
  LineFigure,
  renderLineFigure,
  renderHeatmap,
  fmt,
} from "./svg.js";

export const FIGURE_KINDS = [
  "contraction",
  "envelope-fit",
  "entropy",
  "kinetic-zero",
  "kinetic-infinity",
  "cascade",
  "field-snapshot",
] as const;

export type FigureKind = (typeof FIGURE_KINDS)[number];

export interface FigureSpec {
  kind: FigureKind;
  csvText: string;
  title?: string;
}

/** Relative agreement required between the envelope column rate and a
 *  fresh fit of the ratio column. */
export const ENVELOPE_REFIT_RTOL = 1e-6;

function contraction(table: Table, title: string): string {
  requireColumns(
    table,
    ["time", "mean_dist", "min_dist", "max_dist", "dist0"],
    "contraction"
  );
  const time = numericColumn(table, "time", "contraction");
  const dist0 = numericColumn(table, "dist0", "contraction");
  const fig: LineFigure = {
    title,
    xLabel: "time",
    yLabel: "coupling distance",
    series: [
      {
        label: "mean",
        x: time,
        y: numericColumn(table, "mean_dist", "contraction"),
        color: PALETTE[0],
      },
      {
        label: "min",
        x: time,
        y: numericColumn(table, "min_dist", "contraction"),
        color: PALETTE[2],
        dashed: true,
      },
      {
        label: "max",
        x: time,
        y: numericColumn(table, "max_dist", "contraction"),
        color: PALETTE[1],
        dashed: true,
      },
    ],
    refLines: [{ y: dist0[0]!, label: `dist(0) = ${fmt(dist0[0]!)}` }],
  };
  return renderLineFigure(fig);
}

function envelopeFit(table: Table, title: string): string {
  requireColumns(table, ["time", "ratio", "envelope"], "envelope-fit");
  const time = numericColumn(table, "time", "envelope-fit");
  const ratio = numericColumn(table, "ratio", "envelope-fit");
  const envelope = numericColumn(table, "envelope", "envelope-fit");

  const refit = fitEnvelope(time, ratio);
  const recorded = envelopeColumnRate(time, envelope);
  const scale = Math.max(Math.abs(refit.c), Math.abs(recorded), 1e-30);
  const gap = Math.abs(refit.c - recorded) / scale;
  if (gap > ENVELOPE_REFIT_RTOL) {
    throw new SchemaError(
      `envelope-fit: refit rate ${refit.c} disagrees with the envelope ` +
        `column rate ${recorded} (relative gap ${gap})`
    );
  }

  const fig: LineFigure = {
    title,
    xLabel: "time",
    yLabel: "moment ratio",
    logY: true,
    series: [
      { label: "ratio", x: time, y: ratio, color: PALETTE[0] },
      {
        label: "C exp(c t)",
        x: time,
        y: envelope,
        color: PALETTE[1],
        dashed: true,
      },
    ],
    annotations: [
      `refit c = ${fmt(refit.c)}`,
      `refit log C = ${fmt(refit.logC0)}`,
    ],
  };
  return renderLineFigure(fig);
}

function entropy(table: Table, title: string): string {
  requireColumns(table, ["time", "mean_entropy"], "entropy");
  const fig: LineFigure = {
    title,
    xLabel: "time",
    yLabel: "mean entropy",
    series: [
      {
        label: "mean entropy",
        x: numericColumn(table, "time", "entropy"),
        y: numericColumn(table, "mean_entropy", "entropy"),
        color: PALETTE[0],
      },
    ],
  };
  return renderLineFigure(fig);
}

function kineticZero(table: Table, title: string): string {
  requireColumns(table, ["beta", "normalized_mass"], "kinetic-zero");
  const fig: LineFigure = {
    title,
    xLabel: "beta",
    yLabel: "normalized mass below beta",
    logX: true,
    series: [
      {
        label: "mass fraction",
        x: numericColumn(table, "beta", "kinetic-zero"),
        y: numericColumn(table, "normalized_mass", "kinetic-zero"),
        color: PALETTE[0],
        markers: true,
      },
    ],
  };
  return renderLineFigure(fig);
}

function kineticInfinity(table: Table, title: string): string {
  requireColumns(table, ["window_start", "mass"], "kinetic-infinity");
  const fig: LineFigure = {
    title,
    xLabel: "window start",
    yLabel: "mass above window",
    series: [
      {
        label: "tail mass",
        x: numericColumn(table, "window_start", "kinetic-infinity"),
        y: numericColumn(table, "mass", "kinetic-infinity"),
        color: PALETTE[0],
        markers: true,
      },
    ],
  };
  return renderLineFigure(fig);
}

function cascade(table: Table, title: string): string {
  requireColumns(
    table,
    ["entry", "alpha", "mollify_n", "l1l1_distance", "metric_distance"],
    "cascade"
  );
  const entry = numericColumn(table, "entry", "cascade");
  const l1 = numericColumn(table, "l1l1_distance", "cascade");
  const metric = numericColumn(table, "metric_distance", "cascade");
  const logY = l1.concat(metric).every((v) => v > 0);
  const fig: LineFigure = {
    title,
    xLabel: "schedule entry",
    yLabel: "distance to previous level",
    logY,
    series: [
      { label: "L1 in time", x: entry, y: l1, color: PALETTE[0], markers: true },
      {
        label: "metric",
        x: entry,
        y: metric,
        color: PALETTE[1],
        markers: true,
      },
    ],
  };
  return renderLineFigure(fig);
}

function fieldSnapshot(table: Table, title: string): string {
  if (table.header.length === 3) {
    requireColumns(table, ["i", "j", "value"], "field-snapshot");
    const i = numericColumn(table, "i", "field-snapshot");
    const value = numericColumn(table, "value", "field-snapshot");
    const n = Math.round(Math.sqrt(value.length));
    if (n * n !== value.length) {
      throw new SchemaError(
        `field-snapshot: ${value.length} rows is not a square grid`
      );
    }
    const grid: number[][] = [];
    for (let r = 0; r < n; r++) {
      grid.push(value.slice(r * n, (r + 1) * n));
    }
    if (i[value.length - 1] !== n - 1) {
      throw new SchemaError("field-snapshot: rows are not in row-major order");
    }
    return renderHeatmap(title, grid, `${n} x ${n} field`);
  }
  requireColumns(table, ["i", "value"], "field-snapshot");
  const fig: LineFigure = {
    title,
    xLabel: "cell index",
    yLabel: "value",
    series: [
      {
        label: "field",
        x: numericColumn(table, "i", "field-snapshot"),
        y: numericColumn(table, "value", "field-snapshot"),
        color: PALETTE[0],
      },
    ],
  };
  return renderLineFigure(fig);
}

const BUILDERS: Record<FigureKind, (t: Table, title: string) => string> = {
  contraction,
  "envelope-fit": envelopeFit,
  entropy,
  "kinetic-zero": kineticZero,
  "kinetic-infinity": kineticInfinity,
  cascade,
  "field-snapshot": fieldSnapshot,
};

/** Render a figure kind from CSV text; throws SchemaError on any
 *  mismatch between the text and the kind's schema. */
export function render(spec: FigureSpec): string {
  const table = parseCsv(spec.csvText, spec.kind);
  const title = spec.title ?? spec.kind;
  return BUILDERS[spec.kind](table, title);
}
