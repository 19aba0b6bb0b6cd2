/** Minimal deterministic SVG assembly (no DOM, fixed canvas, no timestamps). */

export const WIDTH = 640;
export const HEIGHT = 480;
export const MARGIN = { top: 36, right: 24, bottom: 48, left: 64 };

export function svgDoc(inner: string, width = WIDTH, height = HEIGHT): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">\n` +
    `<rect width="${width}" height="${height}" fill="white"/>\n` +
    inner +
    "\n</svg>\n"
  );
}

export function polyline(
  pts: Array<[number, number]>,
  stroke: string,
  dash = "",
  width = 1.5,
): string {
  const d = pts.map(([x, y]) => `${x.toFixed(2)},${y.toFixed(2)}`).join(" ");
  const dashAttr = dash ? ` stroke-dasharray="${dash}"` : "";
  return `<polyline points="${d}" fill="none" stroke="${stroke}" stroke-width="${width}"${dashAttr}/>`;
}

export function text(x: number, y: number, s: string, anchor = "start", extra = ""): string {
  return `<text x="${x.toFixed(1)}" y="${y.toFixed(1)}" text-anchor="${anchor}"${extra}>${s}</text>`;
}

/** Left + bottom axes with a handful of tick labels. */
export function axes(
  xScale: (v: number) => number,
  yScale: (v: number) => number,
  xDomain: [number, number],
  yDomain: [number, number],
  xLabel: string,
  yLabel: string,
): string {
  const [x0, x1] = xDomain;
  const [y0, y1] = yDomain;
  const parts: string[] = [];
  const bottom = yScale(y0);
  const left = xScale(x0);
  parts.push(polyline([[left, yScale(y1)], [left, bottom]], "black", "", 1));
  parts.push(polyline([[left, bottom], [xScale(x1), bottom]], "black", "", 1));
  const nticks = 5;
  for (let i = 0; i <= nticks; i++) {
    const xv = x0 + ((x1 - x0) * i) / nticks;
    const yv = y0 + ((y1 - y0) * i) / nticks;
    parts.push(polyline([[xScale(xv), bottom], [xScale(xv), bottom + 5]], "black", "", 1));
    parts.push(text(xScale(xv), bottom + 18, fmt(xv), "middle"));
    parts.push(polyline([[left - 5, yScale(yv)], [left, yScale(yv)]], "black", "", 1));
    parts.push(text(left - 8, yScale(yv) + 4, fmt(yv), "end"));
  }
  parts.push(text(xScale((x0 + x1) / 2), bottom + 36, xLabel, "middle"));
  parts.push(
    `<text x="16" y="${yScale((y0 + y1) / 2).toFixed(1)}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${yScale((y0 + y1) / 2).toFixed(1)})">${yLabel}</text>`,
  );
  return parts.join("\n");
}

export function fmt(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e4 || a < 1e-2) return v.toExponential(1);
  return Number(v.toPrecision(4)).toString();
}
