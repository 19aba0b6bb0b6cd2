/**
 * Renderers, one per CSV schema:
 *
 *   sweep.csv   -> bifurcation diagram (stable branch solid, unstable
 *                  branch dashed, branch-change marker placed data-driven)
 *   field CSV   -> heatmap (site map) or surface (isometric height field)
 *   probes.csv  -> time series per probe site (solid/long/short dashes)
 *   phase.csv   -> virus vs target cells per series
 *
 * The renderers never smooth, rescale or reinterpret the numbers; every
 * coordinate comes straight from the file.
 */

import { interpolateViridis } from "d3";

import { FieldData, SchemaError, numericColumn, parseField, parseTable } from "./csv.js";
import { HEIGHT, MARGIN, WIDTH, axes, fmt, polyline, svgDoc, text } from "./svg.js";

const DASHES = ["", "12 5", "3 4"]; // solid, long, short

function linear(domain: [number, number], range: [number, number]) {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0 || 1;
  return (v: number) => r0 + ((v - d0) / span) * (r1 - r0);
}

function extent(vals: number[]): [number, number] {
  return [Math.min(...vals), Math.max(...vals)];
}

export interface BifurcationResult {
  svg: string;
  /** abscissa of the branch change, back-extrapolated from the data */
  branchChangeR0: number | null;
}

export function renderBifurcation(sweepText: string): BifurcationResult {
  const table = parseTable(sweepText, ["alpha", "r0", "lambda0", "branch", "mean_V"]);
  const r0 = numericColumn(table, "r0");
  const meanV = numericColumn(table, "mean_V");
  const branch = table.rows.map((r) => r.branch);
  for (const [i, b] of branch.entries()) {
    if (b !== "uninfected" && b !== "infected") {
      throw new SchemaError(`column 'branch', row ${i + 1}: unknown value '${b}'`);
    }
  }

  const x = linear(extent(r0), [MARGIN.left, WIDTH - MARGIN.right]);
  const vmax = Math.max(...meanV, 1);
  const y = linear([0, vmax], [HEIGHT - MARGIN.bottom, MARGIN.top]);

  // data-driven branch change: extrapolate the positive branch back to zero
  const inf = r0.map((v, i) => i).filter((i) => branch[i] === "infected");
  let change: number | null = null;
  if (inf.length >= 2) {
    const [i1, i2] = inf;
    const slope = (meanV[i2] - meanV[i1]) / (r0[i2] - r0[i1]);
    change = slope > 0 ? r0[i1] - meanV[i1] / slope : r0[i1];
  } else if (inf.length === 1) {
    change = r0[inf[0]];
  }

  const parts: string[] = [];
  parts.push(axes(x, y, extent(r0), [0, vmax], "reproductive ratio", "mean virus density"));
  // stable branch: the solved mean density (zero on the uninfected side)
  parts.push(polyline(r0.map((v, i) => [x(v), y(meanV[i])]), "#1a1a8c", "", 2));
  // unstable branch: the zero state persists but loses stability past the change
  if (change !== null) {
    const tail = r0.filter((v) => v >= (change as number));
    if (tail.length >= 2) {
      parts.push(polyline(tail.map((v) => [x(v), y(0)]), "#b22222", "7 5", 1.5));
    }
    parts.push(
      `<line x1="${x(change).toFixed(2)}" y1="${y(0).toFixed(2)}" x2="${x(change).toFixed(2)}" ` +
        `y2="${MARGIN.top}" stroke="#777" stroke-dasharray="4 4" data-r0="${change.toPrecision(8)}"/>`,
    );
    parts.push(text(x(change), MARGIN.top - 6, `branch change at ${fmt(change)}`, "middle"));
  }
  parts.push(text(WIDTH - MARGIN.right, MARGIN.top - 6, "solid: stable, dashed: unstable", "end"));
  return { svg: svgDoc(parts.join("\n")), branchChangeR0: change };
}

function colorScale(field: FieldData): { color: (v: number) => string; lo: number; hi: number } {
  let lo = Infinity;
  let hi = -Infinity;
  for (const row of field.values) {
    for (const v of row) {
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  const span = hi - lo || 1;
  return { color: (v) => interpolateViridis((v - lo) / span), lo, hi };
}

export function renderHeatmap(fieldText: string): string {
  const field = parseField(fieldText);
  const { color, lo, hi } = colorScale(field);
  const side = Math.min(WIDTH - MARGIN.left - MARGIN.right, HEIGHT - MARGIN.top - MARGIN.bottom);
  const cell = side / field.n;
  const parts: string[] = [];
  for (let i = 0; i < field.n; i++) {
    for (let j = 0; j < field.n; j++) {
      // row i is the y index; flip so y grows upward in the picture
      const px = MARGIN.left + j * cell;
      const py = MARGIN.top + (field.n - 1 - i) * cell;
      parts.push(
        `<rect x="${px.toFixed(2)}" y="${py.toFixed(2)}" width="${(cell + 0.05).toFixed(2)}" ` +
          `height="${(cell + 0.05).toFixed(2)}" fill="${color(field.values[i][j])}"/>`,
      );
    }
  }
  parts.push(text(MARGIN.left, HEIGHT - 14, `min ${fmt(lo)}  max ${fmt(hi)}  (n=${field.n}, ell=${fmt(field.ell)})`));
  return svgDoc(parts.join("\n"));
}

export function renderSurface(fieldText: string): string {
  const field = parseField(fieldText);
  const { color, lo, hi } = colorScale(field);
  const n = field.n;
  const span = hi - lo || 1;
  // isometric projection of the height field, far cells drawn first
  const sx = (i: number, j: number) => (j - i) * 0.866;
  const sy = (i: number, j: number, z: number) => (i + j) * 0.5 - z;
  const zOf = (v: number) => ((v - lo) / span) * 0.45 * n;
  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const [i, j, z] of [
    [0, 0, 0],
    [n, 0, 0],
    [0, n, 0],
    [n, n, 0],
    [n / 2, n / 2, 0.45 * n],
  ] as Array<[number, number, number]>) {
    const px = sx(i, j);
    const py = sy(i, j, z);
    xMin = Math.min(xMin, px);
    xMax = Math.max(xMax, px);
    yMin = Math.min(yMin, py);
    yMax = Math.max(yMax, py);
  }
  const scale = Math.min(
    (WIDTH - MARGIN.left - MARGIN.right) / (xMax - xMin),
    (HEIGHT - MARGIN.top - MARGIN.bottom) / (yMax - yMin),
  );
  const px = (i: number, j: number) => MARGIN.left + (sx(i, j) - xMin) * scale;
  const py = (i: number, j: number, z: number) => MARGIN.top + (sy(i, j, z) - yMin) * scale;

  const parts: string[] = [];
  for (let s = 0; s <= 2 * (n - 1); s++) {
    for (let i = Math.max(0, s - n + 1); i <= Math.min(n - 1, s); i++) {
      const j = s - i;
      const v = field.values[i][j];
      const z = zOf(v);
      const quad = [
        [px(i, j), py(i, j, z)],
        [px(i + 1, j), py(i + 1, j, z)],
        [px(i + 1, j + 1), py(i + 1, j + 1, z)],
        [px(i, j + 1), py(i, j + 1, z)],
      ]
        .map(([a, b]) => `${a.toFixed(2)},${b.toFixed(2)}`)
        .join(" ");
      parts.push(`<polygon points="${quad}" fill="${color(v)}" stroke="${color(v)}" stroke-width="0.4"/>`);
    }
  }
  parts.push(text(MARGIN.left, HEIGHT - 14, `min ${fmt(lo)}  max ${fmt(hi)}  (n=${n}, ell=${fmt(field.ell)})`));
  return svgDoc(parts.join("\n"));
}

export function renderTimeseries(probesText: string, component = "V"): string {
  const table = parseTable(probesText, ["t", "site", component]);
  const t = numericColumn(table, "t");
  const v = numericColumn(table, component);
  const sites = [...new Set(table.rows.map((r) => r.site))];
  const x = linear(extent(t), [MARGIN.left, WIDTH - MARGIN.right]);
  const [vLo, vHi] = extent(v);
  const y = linear([Math.min(vLo, 0), vHi || 1], [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const parts: string[] = [];
  parts.push(axes(x, y, extent(t), [Math.min(vLo, 0), vHi || 1], "t", component));
  sites.forEach((site, k) => {
    const pts: Array<[number, number]> = [];
    table.rows.forEach((row, idx) => {
      if (row.site === site) pts.push([x(t[idx]), y(v[idx])]);
    });
    parts.push(polyline(pts, "#1a1a8c", DASHES[k % DASHES.length]));
    parts.push(text(WIDTH - MARGIN.right, MARGIN.top + 14 * (k + 1), `site ${site}`, "end"));
  });
  return svgDoc(parts.join("\n"));
}

export function renderPhase(phaseText: string): string {
  const table = parseTable(phaseText, ["t", "series", "T", "V"]);
  const T = numericColumn(table, "T");
  const V = numericColumn(table, "V");
  const series = [...new Set(table.rows.map((r) => r.series))];
  const x = linear(extent(T), [MARGIN.left, WIDTH - MARGIN.right]);
  const y = linear(extent(V), [HEIGHT - MARGIN.bottom, MARGIN.top]);
  const parts: string[] = [];
  parts.push(axes(x, y, extent(T), extent(V), "target cells T", "virus V"));
  series.forEach((name, k) => {
    const pts: Array<[number, number]> = [];
    table.rows.forEach((row, idx) => {
      if (row.series === name) pts.push([x(T[idx]), y(V[idx])]);
    });
    const dash = name === "mean" ? "" : DASHES[1 + ((k - 1) % 2 + 2) % 2];
    parts.push(polyline(pts, name === "mean" ? "#1a1a8c" : "#b22222", dash));
    parts.push(text(WIDTH - MARGIN.right, MARGIN.top + 14 * (k + 1), name, "end"));
  });
  return svgDoc(parts.join("\n"));
}
