import { EmptyDataError, ResultRow } from "./csv.js";

export type PanelKind = "mean" | "variance" | "entropy" | "branches";

export const PANEL_KINDS: PanelKind[] = ["mean", "variance", "entropy", "branches"];

export interface SeriesPoint {
  t: number;
  value: number;
  ciLo: number | null;
  ciHi: number | null;
}

export interface Series {
  id: string;
  quantity: string;
  unraveling: string;
  mode: string;
  points: SeriesPoint[];
}

const PANEL_TITLES: Record<PanelKind, string> = {
  mean: "Mean final ⟨σz⟩",
  variance: "Across-trajectory variance",
  entropy: "Entropy curves (bits)",
  branches: "Finite-shot record statistics",
};

export function panelTitle(panel: PanelKind): string {
  return PANEL_TITLES[panel];
}

function matches(panel: PanelKind, row: ResultRow): boolean {
  switch (panel) {
    case "mean":
      return row.quantity === "mu";
    case "variance":
      return row.quantity === "var_traj";
    case "entropy":
      return row.quantity.startsWith("S_");
    case "branches":
      // The CSV carries no branch-resolved columns, so this panel shows
      // everything the finite-shot records determine, with error bars.
      return row.mode === "sampled";
  }
}

export function selectSeries(rows: ResultRow[], panel: PanelKind): Series[] {
  const groups = new Map<string, Series>();
  for (const row of rows) {
    if (!matches(panel, row)) continue;
    const id = `${row.quantity}/${row.unraveling}/${row.mode}`;
    let series = groups.get(id);
    if (!series) {
      series = {
        id,
        quantity: row.quantity,
        unraveling: row.unraveling,
        mode: row.mode,
        points: [],
      };
      groups.set(id, series);
    }
    series.points.push({
      t: row.time,
      value: row.value,
      ciLo: row.ciLo,
      ciHi: row.ciHi,
    });
  }
  const out = [...groups.values()];
  if (out.length === 0) {
    throw new EmptyDataError(`no rows match panel "${panel}"`);
  }
  for (const series of out) {
    series.points.sort((a, b) => a.t - b.t);
  }
  out.sort((a, b) => a.id.localeCompare(b.id));
  return out;
}
