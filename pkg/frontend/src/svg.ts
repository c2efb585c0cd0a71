/**
 * Deterministic SVG figure primitives.
 *
 * Figures are built by string assembly with fixed-precision
 * coordinates and no timestamps, so a rerun on the same input produces
 * the identical file.  Two layouts cover every figure kind: an x/y
 * line chart with optional log axes, reference lines, and corner
 * annotations, and a square cell heatmap for two-dimensional fields.
 */

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  dashed?: boolean;
  markers?: boolean;
}

export interface RefLine {
  y: number;
  label: string;
}

export interface LineFigure {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  refLines?: RefLine[];
  annotations?: string[];
  logX?: boolean;
  logY?: boolean;
}

export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"] as const;

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 68, right: 16, top: 34, bottom: 46 } as const;

/** Short deterministic number label. */
export function fmt(value: number): string {
  if (value === 0) return "0";
  return String(Number(value.toPrecision(6)));
}

const px = (value: number): string => value.toFixed(2);

function escapeText(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

interface Scale {
  (value: number): number;
  ticks: number[];
}

/** Classical 1-2-5 tick choice over a padded data range. */
function linearTicks(lo: number, hi: number, count: number): number[] {
  const span = hi - lo;
  const raw = span / Math.max(count - 1, 1);
  const mag = Math.pow(10, Math.floor(Math.log10(raw)));
  const norm = raw / mag;
  const step = (norm >= 5 ? 10 : norm >= 2 ? 5 : norm >= 1 ? 2 : 1) * mag;
  const first = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let v = first; v <= hi + step * 1e-9; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function makeScale(
  values: number[],
  pixelLo: number,
  pixelHi: number,
  log: boolean
): Scale {
  let transformed = values;
  if (log) {
    if (values.some((v) => !(v > 0))) {
      throw new Error("log axis requires strictly positive values");
    }
    transformed = values.map(Math.log10);
  }
  let lo = Math.min(...transformed);
  let hi = Math.max(...transformed);
  if (lo === hi) {
    const pad = lo === 0 ? 1 : Math.abs(lo) * 0.1;
    lo -= pad;
    hi += pad;
  } else {
    const pad = (hi - lo) * 0.04;
    lo -= pad;
    hi += pad;
  }
  const scale = ((value: number): number => {
    const t = log ? Math.log10(value) : value;
    return pixelLo + ((t - lo) / (hi - lo)) * (pixelHi - pixelLo);
  }) as Scale;
  if (log) {
    const decades: number[] = [];
    for (let k = Math.ceil(lo); k <= Math.floor(hi); k++) {
      decades.push(Math.pow(10, k));
    }
    scale.ticks =
      decades.length >= 2
        ? decades
        : linearTicks(lo, hi, 5).map((t) => Math.pow(10, t));
  } else {
    scale.ticks = linearTicks(lo, hi, 6);
  }
  return scale;
}

function seriesPath(s: Series, sx: Scale, sy: Scale): string {
  const parts: string[] = [];
  for (let i = 0; i < s.x.length; i++) {
    const cmd = i === 0 ? "M" : "L";
    parts.push(`${cmd}${px(sx(s.x[i]!))} ${px(sy(s.y[i]!))}`);
  }
  const dash = s.dashed ? ' stroke-dasharray="6 4"' : "";
  let out =
    `<path d="${parts.join(" ")}" fill="none" stroke="${s.color}"` +
    ` stroke-width="1.6"${dash}/>\n`;
  if (s.markers) {
    for (let i = 0; i < s.x.length; i++) {
      out +=
        `<circle cx="${px(sx(s.x[i]!))}" cy="${px(sy(s.y[i]!))}" r="3"` +
        ` fill="${s.color}"/>\n`;
    }
  }
  return out;
}

export function renderLineFigure(fig: LineFigure): string {
  if (fig.series.length === 0 || fig.series.every((s) => s.x.length === 0)) {
    throw new Error("figure has no data");
  }
  const xs = fig.series.flatMap((s) => s.x);
  const ys = fig.series
    .flatMap((s) => s.y)
    .concat((fig.refLines ?? []).map((r) => r.y));
  const sx = makeScale(xs, MARGIN.left, WIDTH - MARGIN.right, !!fig.logX);
  const sy = makeScale(ys, HEIGHT - MARGIN.bottom, MARGIN.top, !!fig.logY);

  let body = "";
  body += `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n`;
  for (const t of sx.ticks) {
    const x = px(sx(t));
    body +=
      `<line x1="${x}" y1="${MARGIN.top}" x2="${x}"` +
      ` y2="${HEIGHT - MARGIN.bottom}" stroke="#dddddd"/>\n`;
    body +=
      `<text x="${x}" y="${HEIGHT - MARGIN.bottom + 16}"` +
      ` text-anchor="middle">${fmt(t)}</text>\n`;
  }
  for (const t of sy.ticks) {
    const y = px(sy(t));
    body +=
      `<line x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}"` +
      ` y2="${y}" stroke="#dddddd"/>\n`;
    body +=
      `<text x="${MARGIN.left - 6}" y="${y}" text-anchor="end"` +
      ` dominant-baseline="middle">${fmt(t)}</text>\n`;
  }
  body +=
    `<rect x="${MARGIN.left}" y="${MARGIN.top}"` +
    ` width="${WIDTH - MARGIN.left - MARGIN.right}"` +
    ` height="${HEIGHT - MARGIN.top - MARGIN.bottom}"` +
    ` fill="none" stroke="#333333"/>\n`;

  for (const ref of fig.refLines ?? []) {
    const y = px(sy(ref.y));
    body +=
      `<line x1="${MARGIN.left}" y1="${y}" x2="${WIDTH - MARGIN.right}"` +
      ` y2="${y}" stroke="#555555" stroke-dasharray="2 3"/>\n`;
    body +=
      `<text x="${WIDTH - MARGIN.right - 4}" y="${px(sy(ref.y) - 4)}"` +
      ` text-anchor="end" fill="#555555">${escapeText(ref.label)}</text>\n`;
  }
  for (const s of fig.series) {
    body += seriesPath(s, sx, sy);
  }

  let legendY = MARGIN.top + 14;
  for (const s of fig.series) {
    body +=
      `<line x1="${MARGIN.left + 8}" y1="${legendY - 4}"` +
      ` x2="${MARGIN.left + 30}" y2="${legendY - 4}" stroke="${s.color}"` +
      ` stroke-width="1.6"${s.dashed ? ' stroke-dasharray="6 4"' : ""}/>\n`;
    body +=
      `<text x="${MARGIN.left + 34}" y="${legendY}">` +
      `${escapeText(s.label)}</text>\n`;
    legendY += 16;
  }
  for (const note of fig.annotations ?? []) {
    body +=
      `<text x="${WIDTH - MARGIN.right - 4}" y="${legendY}"` +
      ` text-anchor="end" fill="#333333">${escapeText(note)}</text>\n`;
    legendY += 16;
  }

  body +=
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle"` +
    ` font-size="14">${escapeText(fig.title)}</text>\n`;
  body +=
    `<text x="${WIDTH / 2}" y="${HEIGHT - 10}" text-anchor="middle">` +
    `${escapeText(fig.xLabel)}</text>\n`;
  body +=
    `<text x="16" y="${HEIGHT / 2}" text-anchor="middle"` +
    ` transform="rotate(-90 16 ${HEIGHT / 2})">` +
    `${escapeText(fig.yLabel)}</text>\n`;

  return wrap(body);
}

/** Two-color ramp from deep blue to yellow, byte-exact per value. */
function rampColor(t: number): string {
  const lerp = (a: number, b: number) => Math.round(a + (b - a) * t);
  const r = lerp(13, 253);
  const g = lerp(8, 231);
  const b = lerp(135, 37);
  const hex = (v: number) => v.toString(16).padStart(2, "0");
  return `#${hex(r)}${hex(g)}${hex(b)}`;
}

export function renderHeatmap(
  title: string,
  values: number[][],
  note: string
): string {
  const n = values.length;
  if (n === 0) {
    throw new Error("figure has no data");
  }
  const flat = values.flat();
  const lo = Math.min(...flat);
  const hi = Math.max(...flat);
  const span = hi - lo || 1;
  const side = 360;
  const cell = side / n;
  const x0 = (WIDTH - side) / 2;
  const y0 = 40;

  let body = `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>\n`;
  for (let i = 0; i < n; i++) {
    for (let j = 0; j < n; j++) {
      const t = (values[i]![j]! - lo) / span;
      body +=
        `<rect x="${px(x0 + j * cell)}" y="${px(y0 + i * cell)}"` +
        ` width="${px(cell + 0.5)}" height="${px(cell + 0.5)}"` +
        ` fill="${rampColor(t)}"/>\n`;
    }
  }
  body +=
    `<rect x="${px(x0)}" y="${y0}" width="${side}" height="${side}"` +
    ` fill="none" stroke="#333333"/>\n`;
  body +=
    `<text x="${WIDTH / 2}" y="20" text-anchor="middle"` +
    ` font-size="14">${escapeText(title)}</text>\n`;
  body +=
    `<text x="${WIDTH / 2}" y="${y0 + side + 24}" text-anchor="middle">` +
    `${escapeText(note)} (min ${fmt(lo)}, max ${fmt(hi)})</text>\n`;
  return wrap(body);
}

function wrap(body: string): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}"` +
    ` height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}"` +
    ` font-family="sans-serif" font-size="11">\n${body}</svg>\n`
  );
}
