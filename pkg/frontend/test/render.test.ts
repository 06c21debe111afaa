import { mkdtempSync, readFileSync, statSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { CsvSchemaError, EmptyDataError, parseResultCsv, readResultCsv } from "../src/csv.js";
import { selectSeries } from "../src/panels.js";
import { renderPanelSvg } from "../src/svg.js";
import { run } from "../src/cli.js";

const FIXTURES = join(__dirname, "fixtures");
const EXACT_1Q = join(FIXTURES, "exact_1q.csv");
const EXACT_2Q = join(FIXTURES, "exact_2q.csv");
const SAMPLED_1Q = join(FIXTURES, "sampled_1q.csv");

function seriesData(svg: string): Map<string, { t: number[]; value: number[] }> {
  const out = new Map<string, { t: number[]; value: number[] }>();
  const re = /<g class="series" data-id="([^"]+)"[^>]*data-t='([^']+)' data-value='([^']+)'/g;
  for (const m of svg.matchAll(re)) {
    out.set(m[1], { t: JSON.parse(m[2]), value: JSON.parse(m[3]) });
  }
  return out;
}

describe("csv parsing", () => {
  it("reads the exact fixture with the full schema", () => {
    const rows = readResultCsv(EXACT_1Q);
    expect(rows.length).toBe(408);
    expect(rows[0]).toHaveProperty("quantity");
    expect(rows.every((r) => Number.isFinite(r.value))).toBe(true);
  });

  it("rejects a wrong header", () => {
    expect(() => parseResultCsv("time,value\n0,1\n")).toThrow(CsvSchemaError);
  });

  it("keeps empty ci columns as null", () => {
    const rows = readResultCsv(EXACT_1Q);
    expect(rows[0].ciLo).toBeNull();
    const sampled = readResultCsv(SAMPLED_1Q);
    expect(sampled.some((r) => r.ciLo !== null)).toBe(true);
  });
});

describe("panel selection", () => {
  it("mean panel has one series per unraveling", () => {
    const series = selectSeries(readResultCsv(EXACT_1Q), "mean");
    expect(series.map((s) => s.unraveling).sort()).toEqual(["kick", "projective"]);
    expect(series.every((s) => s.quantity === "mu")).toBe(true);
  });

  it("entropy panel groups the full 2q curve families", () => {
    const series = selectSeries(readResultCsv(EXACT_2Q), "entropy");
    const quantities = new Set(series.map((s) => s.quantity));
    expect(quantities).toEqual(
      new Set(["S_avg_state", "S_avg_reduced", "S_traj_avg"])
    );
    expect(series.length).toBe(6); // three families x two unravelings
  });

  it("points are sorted by time", () => {
    for (const s of selectSeries(readResultCsv(EXACT_1Q), "variance")) {
      const ts = s.points.map((p) => p.t);
      expect(ts).toEqual([...ts].sort((a, b) => a - b));
    }
  });

  it("raises on an empty selection", () => {
    expect(() => selectSeries(readResultCsv(EXACT_1Q), "branches")).toThrow(
      EmptyDataError
    );
  });
});

describe("svg rendering", () => {
  it("mean panel: the two unravelings plot identical values", () => {
    const series = selectSeries(readResultCsv(EXACT_1Q), "mean");
    const svg = renderPanelSvg("mean", series);
    const data = seriesData(svg);
    const proj = data.get("mu/projective/exact")!;
    const kick = data.get("mu/kick/exact")!;
    expect(proj.t).toEqual(kick.t);
    proj.value.forEach((v, i) => expect(Math.abs(v - kick.value[i])).toBeLessThan(1e-12));
  });

  it("variance panel: curves separate after t1", () => {
    const series = selectSeries(readResultCsv(EXACT_1Q), "variance");
    const svg = renderPanelSvg("variance", series, { t1: 2.0, t2: 4.0 });
    const data = seriesData(svg);
    const proj = data.get("var_traj/projective/exact")!;
    const kick = data.get("var_traj/kick/exact")!;
    const gaps = proj.t
      .map((t, i) => (t > 2.0 ? Math.abs(proj.value[i] - kick.value[i]) : 0));
    expect(Math.max(...gaps)).toBeGreaterThan(0.01);
  });

  it("embedded series data matches the CSV exactly", () => {
    const rows = readResultCsv(EXACT_2Q);
    const series = selectSeries(rows, "entropy");
    const data = seriesData(renderPanelSvg("entropy", series));
    for (const s of series) {
      const plotted = data.get(s.id)!;
      const source = rows
        .filter(
          (r) =>
            r.quantity === s.quantity &&
            r.unraveling === s.unraveling &&
            r.mode === s.mode
        )
        .sort((a, b) => a.time - b.time);
      expect(plotted.t).toEqual(source.map((r) => r.time));
      expect(plotted.value).toEqual(source.map((r) => r.value));
    }
  });

  it("projective is solid, kick is dashed, with distinct markers", () => {
    const series = selectSeries(readResultCsv(EXACT_1Q), "mean");
    const svg = renderPanelSvg("mean", series);
    const proj = svg.match(/<g class="series" data-id="mu\/projective\/exact".*?<\/g>/s)![0];
    const kick = svg.match(/<g class="series" data-id="mu\/kick\/exact".*?<\/g>/s)![0];
    expect(proj).not.toContain('stroke-dasharray="6 4"');
    expect(kick).toContain('stroke-dasharray="6 4"');
    // diamond markers close with Z after four vertices; triangles after three
    expect(proj).toContain('class="markers"');
    expect(kick).toContain('class="markers"');
    expect(proj).not.toEqual(kick);
  });

  it("draws vertical intervention lines at t1 and t2", () => {
    const series = selectSeries(readResultCsv(EXACT_1Q), "mean");
    const svg = renderPanelSvg("mean", series, { t1: 2.0, t2: 4.0 });
    expect(svg).toContain('data-name="t1" data-t="2"');
    expect(svg).toContain('data-name="t2" data-t="4"');
    expect(svg.match(/stroke-dasharray="2 3"/g)!.length).toBe(2);
  });

  it("draws error bars from the ci columns", () => {
    const series = selectSeries(readResultCsv(SAMPLED_1Q), "branches");
    const svg = renderPanelSvg("branches", series);
    expect(svg).toContain('class="error-bars"');
  });

  it("same input renders the same bytes", () => {
    const series = selectSeries(readResultCsv(EXACT_1Q), "variance");
    const a = renderPanelSvg("variance", series, { t1: 2, t2: 4 });
    const b = renderPanelSvg("variance", series, { t1: 2, t2: 4 });
    expect(a).toEqual(b);
  });
});

describe("cli", () => {
  it("renders a panel end to end and leaves the input untouched", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotviz-"));
    const out = join(dir, "mean.svg");
    const before = readFileSync(EXACT_1Q, "utf-8");
    const mtime = statSync(EXACT_1Q).mtimeMs;
    const rc = run(["mean", "--in", EXACT_1Q, "--out", out, "--t1", "2", "--t2", "4"]);
    expect(rc).toBe(0);
    expect(readFileSync(out, "utf-8")).toContain("<svg");
    expect(readFileSync(EXACT_1Q, "utf-8")).toEqual(before);
    expect(statSync(EXACT_1Q).mtimeMs).toBe(mtime);
  });

  it("exits 1 on a schema error", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotviz-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "a,b\n1,2\n");
    expect(run(["mean", "--in", bad, "--out", join(dir, "x.svg")])).toBe(1);
  });

  it("exits 2 on an empty selection", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotviz-"));
    expect(run(["branches", "--in", EXACT_1Q, "--out", join(dir, "x.svg")])).toBe(2);
  });
});
