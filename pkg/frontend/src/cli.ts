#!/usr/bin/env node
/**
 * plotkit dh|cost --in sweep.csv --out figure.svg [--title TEXT]
 *
 * Exit status is nonzero on schema violations, unknown schemes, missing
 * files or empty inputs. NaN rows are skipped with a warning per row.
 */

import { readFileSync, writeFileSync } from "node:fs";
import { renderDhFigure } from "./dh.js";
import { renderCostFigure } from "./cost.js";

export interface CliOptions {
  mode: "dh" | "cost";
  input: string;
  output: string;
  title?: string;
}

export function parseArgs(argv: string[]): CliOptions {
  const [mode, ...rest] = argv;
  if (mode !== "dh" && mode !== "cost") {
    throw new Error("usage: plotkit dh|cost --in CSV --out IMG [--title TEXT]");
  }
  let input: string | undefined;
  let output: string | undefined;
  let title: string | undefined;
  for (let i = 0; i < rest.length; i += 2) {
    const flag = rest[i];
    const value = rest[i + 1];
    if (value === undefined) throw new Error(`missing value for ${flag}`);
    if (flag === "--in") input = value;
    else if (flag === "--out") output = value;
    else if (flag === "--title") title = value;
    else throw new Error(`unknown option ${flag}`);
  }
  if (!input || !output) {
    throw new Error("both --in and --out are required");
  }
  return { mode, input, output, title };
}

export function run(opts: CliOptions,
                    warn: (msg: string) => void = (m) => console.warn(m)): void {
  const text = readFileSync(opts.input, "utf-8");
  const render = opts.mode === "dh" ? renderDhFigure : renderCostFigure;
  const { svg, warnings } = opts.title !== undefined
    ? render(text, opts.input, opts.title)
    : render(text, opts.input);
  for (const w of warnings) warn(w);
  writeFileSync(opts.output, svg, "utf-8");
}

const entry = process.argv[1] ?? "";
if (entry.endsWith("cli.js") || entry.endsWith("plotkit")) {
  try {
    run(parseArgs(process.argv.slice(2)));
  } catch (err) {
    console.error(`plotkit: ${err instanceof Error ? err.message : err}`);
    process.exit(1);
  }
}
