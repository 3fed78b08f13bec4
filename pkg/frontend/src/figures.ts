/**
 * Figure construction from experiment CSVs.
 *
 * Four kinds are supported:
 *  - "loglog-convergence": relative errors against 1/h on log-log axes,
 *    with optional power-law reference lines (slope -1 by default);
 *  - "k-sweep": norms or errors against the wave number;
 *  - "critical-scatter": reciprocal critical mesh size against k per
 *    method, with the line/curve laws overlaid;
 *  - "trace": re/im parts of a sampled solution line, optionally overlaid
 *    with an exact-trace CSV.
 *
 * Reference lines are power laws y = coefficient * x^exponent; on log-log
 * axes a pure slope is anchored through the first data point.
 */

import { writeFileSync } from "node:fs";

import { CsvTable, cell, column, readCsv, requireColumns } from "./csv.js";
import { PALETTE, Series, renderSvg } from "./svg.js";

export type FigureKind = "loglog-convergence" | "k-sweep" | "critical-scatter" | "trace";

export interface ReferenceLine {
  /** y = coefficient * x^exponent; exponent defaults to the anchored slope */
  coefficient?: number;
  exponent: number;
  label?: string;
  /** anchor through the first point of the first data series */
  anchorToData?: boolean;
}

export interface FigureSpec {
  kind: FigureKind;
  csv: string[];
  out: string;
  title?: string;
  /** y columns (loglog-convergence, k-sweep) */
  columns?: string[];
  /** row filters, e.g. {"kh": "0.5"} (string comparison on raw cells) */
  filter?: Record<string, string>;
  /** split rows into one series per distinct value of this column */
  groupBy?: string;
  referenceLines?: ReferenceLine[];
}

const KIND_COLUMNS: Record<FigureKind, string[]> = {
  "loglog-convergence": ["h"],
  "k-sweep": ["k"],
  "critical-scatter": ["k", "method", "h_crit"],
  trace: ["x", "re", "im"],
};

export const CRITICAL_LAWS: ReferenceLine[] = [
  { coefficient: 1 / (Math.PI * Math.sqrt(3)), exponent: 1, label: "k/(pi sqrt(3))" },
  { coefficient: 1 / (1.35 * Math.PI), exponent: 1, label: "k/(1.35 pi)" },
  { coefficient: 1 / Math.sqrt(48), exponent: 1.5, label: "sqrt(k^3/48)" },
];

function defaultColumns(kind: FigureKind, table: CsvTable): string[] {
  if (kind === "loglog-convergence") {
    const known = ["rel_h1_interp", "rel_h1_dg", "rel_l2_dg", "rel_h1_fem", "rel_h1_dg"];
    const present = known.filter((c) => table.columns.includes(c));
    return present.length ? [...new Set(present)] : ["rel_h1_dg"];
  }
  if (kind === "k-sweep") {
    const known = ["dg_norm_1h_of_uh", "dg_h1_semi_of_uh", "fem_h1_semi", "exact_h1_semi"];
    const present = known.filter((c) => table.columns.includes(c));
    return present.length ? present : ["rel_h1_dg"];
  }
  return [];
}

function filteredRows(table: CsvTable, filter?: Record<string, string>): number[] {
  const rows: number[] = [];
  for (let r = 0; r < table.rows.length; r++) {
    let keep = true;
    for (const [col, want] of Object.entries(filter ?? {})) {
      if (!table.columns.includes(col) || cell(table, r, col) !== want) keep = false;
    }
    if (keep) rows.push(r);
  }
  return rows;
}

function pick(values: number[], rows: number[]): number[] {
  return rows.map((r) => values[r]);
}

interface Prepared {
  series: Series[];
  warnings: string[];
}

function referenceSeries(
  lines: ReferenceLine[],
  data: Series[],
  logAnchor: boolean,
): Series[] {
  const xs = data.flatMap((s) => s.x).filter((v) => Number.isFinite(v) && v > 0);
  if (xs.length === 0) return [];
  const lo = Math.min(...xs);
  const hi = Math.max(...xs);
  return lines.map((line, i) => {
    let coeff = line.coefficient;
    if (coeff === undefined || line.anchorToData) {
      // anchor through the first finite point of the first series
      const first = data
        .map((s) => s.x.map((x, j) => [x, s.y[j]] as const).find(([x, y]) => Number.isFinite(x) && Number.isFinite(y) && x > 0 && y > 0))
        .find((p) => p !== undefined);
      coeff = first ? first[1] / Math.pow(first[0], line.exponent) : 1.0;
    }
    const n = 32;
    const x: number[] = [];
    const y: number[] = [];
    for (let j = 0; j <= n; j++) {
      const v = logAnchor
        ? lo * Math.pow(hi / lo, j / n)
        : lo + ((hi - lo) * j) / n;
      x.push(v);
      y.push(coeff! * Math.pow(v, line.exponent));
    }
    return {
      label: line.label ?? `slope ${line.exponent}`,
      x,
      y,
      color: "#777777",
      dashed: true,
      tag: `ref:exponent=${line.exponent}:coefficient=${Number(coeff!.toPrecision(8))}`,
    } satisfies Series;
  });
}

function prepareConvergence(spec: FigureSpec, table: CsvTable, path: string): Prepared {
  const yCols = spec.columns ?? defaultColumns("loglog-convergence", table);
  requireColumns(table, ["h", ...yCols], path);
  const rows = filteredRows(table, spec.filter);
  const h = pick(column(table, "h"), rows);
  const invH = h.map((v) => 1 / v);
  const series: Series[] = yCols.map((name, i) => ({
    label: name,
    x: invH,
    y: pick(column(table, name), rows),
    color: PALETTE[i % PALETTE.length],
    marker: true,
  }));
  const refs = spec.referenceLines ?? [{ exponent: -1, anchorToData: true, label: "slope -1" }];
  series.push(...referenceSeries(refs, series, true));
  return { series, warnings: [] };
}

function prepareKSweep(spec: FigureSpec, table: CsvTable, path: string): Prepared {
  const yCols = spec.columns ?? defaultColumns("k-sweep", table);
  requireColumns(table, ["k", ...yCols], path);
  const series: Series[] = [];
  const k = column(table, "k");
  if (spec.groupBy) {
    requireColumns(table, [spec.groupBy], path);
    const groups = [...new Set(table.rows.map((_, r) => cell(table, r, spec.groupBy!)))];
    groups.forEach((g, gi) => {
      const rows = filteredRows(table, { ...(spec.filter ?? {}), [spec.groupBy!]: g });
      yCols.forEach((name, i) => {
        series.push({
          label: `${name} (${spec.groupBy}=${g})`,
          x: pick(k, rows),
          y: pick(column(table, name), rows),
          color: PALETTE[(gi * yCols.length + i) % PALETTE.length],
          marker: true,
        });
      });
    });
  } else {
    const rows = filteredRows(table, spec.filter);
    yCols.forEach((name, i) => {
      series.push({
        label: name,
        x: pick(k, rows),
        y: pick(column(table, name), rows),
        color: PALETTE[i % PALETTE.length],
        marker: true,
      });
    });
  }
  series.push(...referenceSeries(spec.referenceLines ?? [], series, false));
  return { series, warnings: [] };
}

function prepareCriticalScatter(spec: FigureSpec, table: CsvTable, path: string): Prepared {
  requireColumns(table, KIND_COLUMNS["critical-scatter"], path);
  const k = column(table, "k");
  const hCrit = column(table, "h_crit");
  const methods = [...new Set(table.rows.map((_, r) => cell(table, r, "method")))];
  const series: Series[] = methods.map((method, i) => {
    const rows = filteredRows(table, { ...(spec.filter ?? {}), method });
    return {
      label: method,
      x: pick(k, rows),
      y: pick(hCrit, rows).map((h) => 1 / h),
      color: PALETTE[i % PALETTE.length],
      marker: true,
    };
  });
  series.push(...referenceSeries(spec.referenceLines ?? CRITICAL_LAWS, series, false));
  return { series, warnings: [] };
}

function prepareTrace(spec: FigureSpec, tables: CsvTable[], paths: string[]): Prepared {
  const series: Series[] = [];
  tables.forEach((table, t) => {
    requireColumns(table, KIND_COLUMNS.trace, paths[t]);
    const rows = filteredRows(table, spec.filter);
    const x = pick(column(table, "x"), rows);
    const name = paths[t].replace(/^.*\//, "").replace(/\.csv$/, "");
    series.push({
      label: `${name} re`,
      x,
      y: pick(column(table, "re"), rows),
      color: PALETTE[(2 * t) % PALETTE.length],
      dashed: t > 0,
    });
    series.push({
      label: `${name} im`,
      x,
      y: pick(column(table, "im"), rows),
      color: PALETTE[(2 * t + 1) % PALETTE.length],
      dashed: t > 0,
    });
  });
  return { series, warnings: [] };
}

/** Render a figure spec to its SVG output path; returns the path. */
export function render(spec: FigureSpec): string {
  if (!spec.csv || spec.csv.length === 0) {
    throw new Error("figure spec needs at least one csv path");
  }
  if (!spec.out.endsWith(".svg")) {
    throw new Error(`output must be an .svg path, got ${spec.out}`);
  }
  const tables = spec.csv.map((p) => readCsv(p));
  const empty = tables.every((t) => t.rows.length === 0);
  let prepared: Prepared;
  if (empty) {
    // still validate the schema so broken pipelines fail loudly
    tables.forEach((t, i) => requireColumns(t, KIND_COLUMNS[spec.kind], spec.csv[i]));
    prepared = { series: [], warnings: ["no data rows"] };
    process.stderr.write(`warning: ${spec.csv.join(", ")}: no data rows, empty axes\n`);
  } else {
    switch (spec.kind) {
      case "loglog-convergence":
        prepared = prepareConvergence(spec, tables[0], spec.csv[0]);
        break;
      case "k-sweep":
        prepared = prepareKSweep(spec, tables[0], spec.csv[0]);
        break;
      case "critical-scatter":
        prepared = prepareCriticalScatter(spec, tables[0], spec.csv[0]);
        break;
      case "trace":
        prepared = prepareTrace(spec, tables, spec.csv);
        break;
      default:
        throw new Error(`unknown figure kind ${(spec as FigureSpec).kind}`);
    }
  }
  const axes = {
    "loglog-convergence": {
      title: spec.title ?? "Relative error vs 1/h",
      xLabel: "1/h",
      yLabel: "relative error",
      xScale: "log" as const,
      yScale: "log" as const,
    },
    "k-sweep": {
      title: spec.title ?? "Wave-number sweep",
      xLabel: "k",
      yLabel: "value",
      xScale: "linear" as const,
      yScale: "linear" as const,
    },
    "critical-scatter": {
      title: spec.title ?? "Reciprocal critical mesh size",
      xLabel: "k",
      yLabel: "1/h_crit",
      xScale: "linear" as const,
      yScale: "linear" as const,
    },
    trace: {
      title: spec.title ?? "Solution trace along the x axis",
      xLabel: "x",
      yLabel: "u",
      xScale: "linear" as const,
      yScale: "linear" as const,
    },
  }[spec.kind];
  const svg = renderSvg(axes, prepared.series, prepared.warnings);
  writeFileSync(spec.out, svg, "utf-8");
  return spec.out;
}
