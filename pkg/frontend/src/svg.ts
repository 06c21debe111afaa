import { PanelKind, Series, panelTitle } from "./panels.js";

export interface RenderOptions {
  width?: number;
  height?: number;
  t1?: number;
  t2?: number;
  title?: string;
}

const MARGIN = { top: 40, right: 30, bottom: 45, left: 60 };

// Fixed palette keyed by quantity; the two unravelings share a color and
// differ by line style (solid projective, dashed kick) and marker.
const COLORS: Record<string, string> = {
  mu: "#1f77b4",
  var_traj: "#d62728",
  S_avg_state: "#9467bd",
  S_avg_reduced: "#2ca02c",
  S_traj_avg: "#1f77b4",
  S_semi_exp: "#ff7f0e",
};

function color(quantity: string): string {
  return COLORS[quantity] ?? "#7f7f7f";
}

function dashFor(unraveling: string): string | null {
  return unraveling === "kick" ? "6 4" : null;
}

function markerFor(unraveling: string): "diamond" | "triangle" | "circle" {
  if (unraveling === "projective") return "diamond";
  if (unraveling === "kick") return "triangle";
  return "circle";
}

interface Scale {
  (v: number): number;
}

function linearScale(d0: number, d1: number, r0: number, r1: number): Scale {
  const span = d1 - d0 || 1;
  return (v) => r0 + ((v - d0) / span) * (r1 - r0);
}

function niceTicks(lo: number, hi: number, n = 6): number[] {
  const span = hi - lo || 1;
  const rawStep = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(rawStep)));
  const step = [1, 2, 2.5, 5, 10].map((m) => m * mag).find((s) => span / s <= n)!;
  const ticks: number[] = [];
  for (let v = Math.ceil(lo / step) * step; v <= hi + 1e-12; v += step) {
    ticks.push(Math.abs(v) < step * 1e-9 ? 0 : v);
  }
  return ticks;
}

function fmt(v: number): string {
  return Number(v.toPrecision(6)).toString();
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function markerPath(kind: string, x: number, y: number, r: number): string {
  if (kind === "diamond") {
    return `M${fmt(x)} ${fmt(y - r)}L${fmt(x + r)} ${fmt(y)}L${fmt(x)} ${fmt(y + r)}L${fmt(x - r)} ${fmt(y)}Z`;
  }
  if (kind === "triangle") {
    return `M${fmt(x)} ${fmt(y - r)}L${fmt(x + r)} ${fmt(y + r)}L${fmt(x - r)} ${fmt(y + r)}Z`;
  }
  return (
    `M${fmt(x - r)} ${fmt(y)}` +
    `a${fmt(r)} ${fmt(r)} 0 1 0 ${fmt(2 * r)} 0` +
    `a${fmt(r)} ${fmt(r)} 0 1 0 ${fmt(-2 * r)} 0`
  );
}

export function renderPanelSvg(
  panel: PanelKind,
  seriesList: Series[],
  options: RenderOptions = {}
): string {
  const width = options.width ?? 720;
  const height = options.height ?? 440;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  const allT: number[] = [];
  const allV: number[] = [];
  for (const s of seriesList) {
    for (const p of s.points) {
      allT.push(p.t);
      allV.push(p.value);
      if (p.ciLo !== null) allV.push(p.ciLo);
      if (p.ciHi !== null) allV.push(p.ciHi);
    }
  }
  const tMin = Math.min(...allT);
  const tMax = Math.max(...allT);
  let vMin = Math.min(...allV);
  let vMax = Math.max(...allV);
  const pad = (vMax - vMin || 1) * 0.05;
  vMin -= pad;
  vMax += pad;

  const sx = linearScale(tMin, tMax, MARGIN.left, MARGIN.left + plotW);
  const sy = linearScale(vMin, vMax, MARGIN.top + plotH, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" viewBox="0 0 ${width} ${height}">`
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(
    `<text x="${width / 2}" y="22" text-anchor="middle" font-size="15" font-family="sans-serif">${esc(
      options.title ?? panelTitle(panel)
    )}</text>`
  );

  // Axes and ticks.
  const x0 = MARGIN.left;
  const y0 = MARGIN.top + plotH;
  parts.push(
    `<g class="axes" stroke="#333" fill="none">` +
      `<line x1="${x0}" y1="${y0}" x2="${x0 + plotW}" y2="${y0}"/>` +
      `<line x1="${x0}" y1="${MARGIN.top}" x2="${x0}" y2="${y0}"/>` +
      `</g>`
  );
  const tickParts: string[] = [];
  for (const t of niceTicks(tMin, tMax)) {
    const x = sx(t);
    tickParts.push(
      `<line x1="${fmt(x)}" y1="${y0}" x2="${fmt(x)}" y2="${y0 + 5}" stroke="#333"/>` +
        `<text x="${fmt(x)}" y="${y0 + 20}" text-anchor="middle" font-size="11" font-family="sans-serif">${fmt(t)}</text>`
    );
  }
  for (const v of niceTicks(vMin, vMax)) {
    const y = sy(v);
    tickParts.push(
      `<line x1="${x0 - 5}" y1="${fmt(y)}" x2="${x0}" y2="${fmt(y)}" stroke="#333"/>` +
        `<text x="${x0 - 9}" y="${fmt(y + 4)}" text-anchor="end" font-size="11" font-family="sans-serif">${fmt(v)}</text>`
    );
  }
  parts.push(`<g class="ticks">${tickParts.join("")}</g>`);
  parts.push(
    `<text x="${x0 + plotW / 2}" y="${height - 8}" text-anchor="middle" font-size="12" font-family="sans-serif">t</text>`
  );

  // Vertical dotted intervention lines.
  for (const [name, t] of [["t1", options.t1], ["t2", options.t2]] as const) {
    if (t === undefined || t < tMin || t > tMax) continue;
    const x = sx(t);
    parts.push(
      `<g class="intervention" data-name="${name}" data-t="${String(t)}">` +
        `<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" y2="${y0}" stroke="#555" stroke-dasharray="2 3"/>` +
        `<text x="${fmt(x)}" y="${MARGIN.top - 4}" text-anchor="middle" font-size="11" font-family="sans-serif">${name}</text>` +
        `</g>`
    );
  }

  // Data series. Each group carries the raw values so the plotted data
  // can be checked against the source CSV without inverting the scales.
  for (const s of seriesList) {
    const stroke = color(s.quantity);
    const dash = dashFor(s.unraveling);
    const pts = s.points.map((p) => `${fmt(sx(p.t))},${fmt(sy(p.value))}`).join(" ");
    const dataT = JSON.stringify(s.points.map((p) => p.t));
    const dataV = JSON.stringify(s.points.map((p) => p.value));
    const inner: string[] = [];
    inner.push(
      `<polyline points="${pts}" fill="none" stroke="${stroke}" stroke-width="1.5"${
        dash ? ` stroke-dasharray="${dash}"` : ""
      }/>`
    );
    const errorBars: string[] = [];
    for (const p of s.points) {
      if (p.ciLo === null || p.ciHi === null) continue;
      const x = sx(p.t);
      errorBars.push(
        `<line x1="${fmt(x)}" y1="${fmt(sy(p.ciLo))}" x2="${fmt(x)}" y2="${fmt(sy(p.ciHi))}" stroke="${stroke}" stroke-width="1"/>`
      );
    }
    if (errorBars.length > 0) {
      inner.push(`<g class="error-bars">${errorBars.join("")}</g>`);
    }
    const mk = markerFor(s.unraveling);
    const markers = s.points
      .map((p) => markerPath(mk, sx(p.t), sy(p.value), 3))
      .join("");
    inner.push(`<path class="markers" d="${markers}" fill="${stroke}" stroke="none"/>`);
    parts.push(
      `<g class="series" data-id="${esc(s.id)}" data-quantity="${esc(s.quantity)}" ` +
        `data-unraveling="${esc(s.unraveling)}" data-mode="${esc(s.mode)}" ` +
        `data-t='${dataT}' data-value='${dataV}'>${inner.join("")}</g>`
    );
  }

  // Legend.
  const legendParts: string[] = [];
  seriesList.forEach((s, i) => {
    const y = MARGIN.top + 14 + i * 16;
    const x = MARGIN.left + plotW - 180;
    const dash = dashFor(s.unraveling);
    legendParts.push(
      `<line x1="${x}" y1="${y}" x2="${x + 26}" y2="${y}" stroke="${color(s.quantity)}" stroke-width="1.5"${
        dash ? ` stroke-dasharray="${dash}"` : ""
      }/>` +
        `<text x="${x + 32}" y="${y + 4}" font-size="10" font-family="sans-serif">${esc(s.id)}</text>`
    );
  });
  parts.push(`<g class="legend">${legendParts.join("")}</g>`);

  parts.push("</svg>");
  return parts.join("\n");
}
