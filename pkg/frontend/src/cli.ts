#!/usr/bin/env node
/**
 * helmdg-plot: render figures from experiment CSVs.
 *
 *   helmdg-plot --spec figures.json
 *   helmdg-plot <kind> --csv error.csv [--csv more.csv] --out fig.svg
 *               [--columns a,b] [--filter col=value] [--group-by col]
 *               [--title text]
 *
 * A spec file holds one figure object or an array of them; see FigureSpec.
 */

import { readFileSync } from "node:fs";

import { SchemaError } from "./csv.js";
import { FigureKind, FigureSpec, render } from "./figures.js";

const KINDS: FigureKind[] = ["loglog-convergence", "k-sweep", "critical-scatter", "trace"];

export function parseArgs(argv: string[]): FigureSpec[] {
  if (argv.length === 0 || argv.includes("--help") || argv.includes("-h")) {
    throw new UsageError(USAGE);
  }
  if (argv[0] === "--spec") {
    if (argv.length !== 2) throw new UsageError("--spec takes exactly one JSON path");
    const parsed = JSON.parse(readFileSync(argv[1], "utf-8"));
    const specs: FigureSpec[] = Array.isArray(parsed) ? parsed : [parsed];
    specs.forEach(validateSpec);
    return specs;
  }
  const kind = argv[0] as FigureKind;
  if (!KINDS.includes(kind)) {
    throw new UsageError(`unknown figure kind '${argv[0]}'; expected one of ${KINDS.join(", ")}`);
  }
  const spec: FigureSpec = { kind, csv: [], out: "" };
  for (let i = 1; i < argv.length; i++) {
    const flag = argv[i];
    const value = argv[++i];
    if (value === undefined) throw new UsageError(`flag ${flag} needs a value`);
    switch (flag) {
      case "--csv":
        spec.csv.push(value);
        break;
      case "--out":
        spec.out = value;
        break;
      case "--columns":
        spec.columns = value.split(",");
        break;
      case "--group-by":
        spec.groupBy = value;
        break;
      case "--title":
        spec.title = value;
        break;
      case "--filter": {
        const eq = value.indexOf("=");
        if (eq < 0) throw new UsageError("--filter expects col=value");
        spec.filter = { ...(spec.filter ?? {}), [value.slice(0, eq)]: value.slice(eq + 1) };
        break;
      }
      default:
        throw new UsageError(`unknown flag ${flag}`);
    }
  }
  validateSpec(spec);
  return [spec];
}

function validateSpec(spec: FigureSpec): void {
  if (!KINDS.includes(spec.kind)) {
    throw new UsageError(`spec kind '${spec.kind}' must be one of ${KINDS.join(", ")}`);
  }
  if (!spec.csv?.length) throw new UsageError("spec needs at least one csv path");
  if (!spec.out) throw new UsageError("spec needs an output path (--out)");
}

export class UsageError extends Error {}

const USAGE = `usage: helmdg-plot --spec figures.json
       helmdg-plot <kind> --csv FILE [--csv FILE] --out FIG.svg
                   [--columns a,b] [--filter col=value] [--group-by col] [--title text]
kinds: ${KINDS.join(", ")}`;

export function main(argv: string[]): number {
  let specs: FigureSpec[];
  try {
    specs = parseArgs(argv);
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(err.message + "\n");
      return 2;
    }
    throw err;
  }
  for (const spec of specs) {
    try {
      const out = render(spec);
      process.stdout.write(`wrote ${out}\n`);
    } catch (err) {
      if (err instanceof SchemaError) {
        process.stderr.write(`schema error: ${err.message}\n`);
        return 1;
      }
      process.stderr.write(`error: ${(err as Error).message}\n`);
      return 1;
    }
  }
  return 0;
}

if (process.argv[1] && import.meta.url.endsWith(process.argv[1].replace(/^.*\//, "/"))) {
  process.exit(main(process.argv.slice(2)));
}
