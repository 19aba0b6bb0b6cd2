/**
 * CLI: render one CSV into its figure kind.
 *
 *   node dist/main.js <bifurcation|heatmap|surface|timeseries|phase> \
 *        <input.csv> <output.svg> [component]
 *
 * Exit codes: 0 rendered, 2 schema/usage error (the offending column is
 * named), 1 anything else.
 */

import { readFileSync, writeFileSync } from "fs";

import { SchemaError } from "./csv.js";
import {
  renderBifurcation,
  renderHeatmap,
  renderPhase,
  renderSurface,
  renderTimeseries,
} from "./figures.js";

const KINDS = ["bifurcation", "heatmap", "surface", "timeseries", "phase"] as const;
type Kind = (typeof KINDS)[number];

export function render(kind: Kind, inputText: string, component = "V"): string {
  switch (kind) {
    case "bifurcation":
      return renderBifurcation(inputText).svg;
    case "heatmap":
      return renderHeatmap(inputText);
    case "surface":
      return renderSurface(inputText);
    case "timeseries":
      return renderTimeseries(inputText, component);
    case "phase":
      return renderPhase(inputText);
  }
}

function main(argv: string[]): number {
  const [kind, input, output, component] = argv;
  if (!kind || !input || !output || !KINDS.includes(kind as Kind)) {
    console.error(
      `usage: render <${KINDS.join("|")}> <input.csv> <output.svg> [component]`,
    );
    return 2;
  }
  try {
    const svg = render(kind as Kind, readFileSync(input, "utf8"), component ?? "V");
    writeFileSync(output, svg);
  } catch (err) {
    if (err instanceof SchemaError) {
      console.error(`render ${kind}: ${err.message}`);
      return 2;
    }
    console.error(`render ${kind}: ${String(err)}`);
    return 1;
  }
  return 0;
}

if (process.argv[1] && import.meta.url.endsWith(process.argv[1].split("/").pop()!)) {
  process.exit(main(process.argv.slice(2)));
}
