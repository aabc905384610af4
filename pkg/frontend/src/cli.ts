#!/usr/bin/env node
/**
 * render-figure --input fig1a.csv --panel fig1a --output fig1a.svg
 *
 * Exits 2 on bad arguments, 3 on a dataset/schema problem (the message
 * names the offending column), 1 on I/O failures.
 */

import { CsvError } from "./csv.js";
import { render, PANELS, Panel, FigureSpec } from "./render.js";

function parseArgs(argv: string[]): FigureSpec {
  const values: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const flag = argv[i];
    const value = argv[i + 1];
    if (!flag.startsWith("--") || value === undefined) {
      throw new UsageError(`unpaired argument: ${flag}`);
    }
    values[flag.slice(2)] = value;
  }
  const known = new Set(["input", "panel", "output"]);
  for (const key of Object.keys(values)) {
    if (!known.has(key)) {
      throw new UsageError(`unknown flag: --${key}`);
    }
  }
  for (const required of ["input", "panel", "output"]) {
    if (!(required in values)) {
      throw new UsageError(`missing required flag: --${required}`);
    }
  }
  if (!PANELS.includes(values.panel as Panel)) {
    throw new UsageError(`panel must be one of ${PANELS.join(", ")}, got ${values.panel}`);
  }
  return {
    input: values.input,
    output: values.output,
    panel: values.panel as Panel,
  };
}

class UsageError extends Error {}

export function main(argv: string[]): number {
  try {
    const spec = parseArgs(argv);
    const written = render(spec);
    console.log(`wrote ${written}`);
    return 0;
  } catch (error) {
    if (error instanceof UsageError) {
      console.error(`render-figure: ${error.message}`);
      console.error("usage: render-figure --input <sweep.csv> --panel <fig1a|fig1b|fig2a|fig2b> --output <out.svg>");
      return 2;
    }
    if (error instanceof CsvError) {
      console.error(`render-figure: dataset error: ${error.message}`);
      return 3;
    }
    console.error(`render-figure: ${(error as Error).message}`);
    return 1;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined &&
  (process.argv[1].endsWith("cli.js") || process.argv[1].endsWith("render-figure"));
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
