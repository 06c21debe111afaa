#!/usr/bin/env node
import { writeFileSync } from "node:fs";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { CsvSchemaError, EmptyDataError, readResultCsv } from "./csv.js";
import { PANEL_KINDS, PanelKind, selectSeries } from "./panels.js";
import { renderPanelSvg } from "./svg.js";

export function run(argv: string[]): number {
  const args = yargs(argv)
    .command("$0 <panel>", "render one panel from a results CSV", (y) =>
      y.positional("panel", {
        choices: PANEL_KINDS,
        describe: "which panel to draw",
        type: "string",
      })
    )
    .option("in", { type: "string", demandOption: true, describe: "input results.csv" })
    .option("out", { type: "string", demandOption: true, describe: "output .svg path" })
    .option("t1", { type: "number", describe: "first intervention time" })
    .option("t2", { type: "number", describe: "second intervention time" })
    .option("title", { type: "string" })
    .strict()
    .exitProcess(false)
    .parseSync();

  try {
    const rows = readResultCsv(args.in);
    const series = selectSeries(rows, args.panel as PanelKind);
    const svg = renderPanelSvg(args.panel as PanelKind, series, {
      t1: args.t1,
      t2: args.t2,
      title: args.title,
    });
    writeFileSync(args.out, svg, "utf-8");
    console.log(`wrote ${args.out} (${series.length} series)`);
    return 0;
  } catch (err) {
    if (err instanceof CsvSchemaError) {
      console.error(`schema error: ${err.message}`);
      return 1;
    }
    if (err instanceof EmptyDataError) {
      console.error(`empty data: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(run(hideBin(process.argv)));
}
