#!/usr/bin/env node
/** CLI: render --kind <strategy|holdings|surface|regions> --in <csv> --out <svg>
 *
 * Exit codes: 0 on success, 1 on schema mismatch or I/O failure.
 */

import { readFileSync, writeFileSync } from "fs";

import { CsvError } from "./csv.js";
import { FigureKind, renderFigure } from "./figures.js";

const KINDS: FigureKind[] = ["strategy", "holdings", "surface", "regions"];

function parseArgs(argv: string[]): { kind: FigureKind; input: string; output: string } {
  const args = new Map<string, string>();
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key.startsWith("--") || value === undefined) {
      throw new Error(`usage: render --kind <${KINDS.join("|")}> --in <csv> --out <svg>`);
    }
    args.set(key.slice(2), value);
  }
  const kind = args.get("kind");
  const input = args.get("in");
  const output = args.get("out");
  if (!kind || !input || !output) {
    throw new Error(`usage: render --kind <${KINDS.join("|")}> --in <csv> --out <svg>`);
  }
  if (!KINDS.includes(kind as FigureKind)) {
    throw new Error(`unknown kind ${kind}; expected one of ${KINDS.join(", ")}`);
  }
  if (!output.endsWith(".svg")) {
    throw new Error("output must be an .svg path (raster output is not supported)");
  }
  return { kind: kind as FigureKind, input, output };
}

export function main(argv: string[]): number {
  let parsed;
  try {
    parsed = parseArgs(argv);
  } catch (err) {
    console.error((err as Error).message);
    return 1;
  }
  try {
    const csvText = readFileSync(parsed.input, "utf8");
    const svg = renderFigure(parsed.kind, csvText);
    writeFileSync(parsed.output, svg + "\n");
  } catch (err) {
    if (err instanceof CsvError) {
      console.error(`${parsed.input}: ${err.message}`);
    } else {
      console.error((err as Error).message);
    }
    return 1;
  }
  return 0;
}

const invokedDirectly = process.argv[1]?.endsWith("render.js") ?? false;
if (invokedDirectly) {
  process.exit(main(process.argv.slice(2)));
}
