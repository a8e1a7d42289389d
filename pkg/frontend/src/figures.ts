/** Figure builders: one per CSV artifact kind.
 *
 * Numeric results are drawn as circle-marked dotted lines and closed-form
 * references as solid lines; the region map shades the three holdings bands
 * and overlays their analytic boundaries.
 */

import { CsvError, numericColumns, parseCsv, stringColumn, Table } from "./csv.js";
import { Chart, extentOf } from "./svg.js";

export type FigureKind = "strategy" | "holdings" | "surface" | "regions";

const NUMERIC_COLOR = "#1f4e9c";
const ANALYTIC_COLOR = "#c23b22";
const BAND_FILLS: Record<string, string> = {
  A: "#f4c7ab",
  B: "#d7e3c5",
  C: "#b8cfe8",
};

function pairs(x: (number | null)[], y: (number | null)[]): { x: number[]; y: number[] } {
  const outX: number[] = [];
  const outY: number[] = [];
  for (let i = 0; i < x.length; i += 1) {
    const xv = x[i];
    const yv = y[i];
    if (xv !== null && yv !== null) {
      outX.push(xv);
      outY.push(yv);
    }
  }
  return { x: outX, y: outY };
}

export function renderStrategy(table: Table): string {
  const cols = numericColumns(table, ["r", "zeta", "zeta_analytic"]);
  const numeric = pairs(cols.r, cols.zeta);
  const analytic = pairs(cols.r, cols.zeta_analytic);
  const chart = new Chart(
    extentOf(numeric.x.concat(analytic.x)),
    extentOf(numeric.y.concat(analytic.y, [0])),
    "Execution rate",
    "time r",
    "sell rate",
  );
  chart.addAxes();
  if (analytic.x.length > 0) {
    chart.addSeries({ ...analytic, stroke: ANALYTIC_COLOR, style: "solid", label: "closed form" });
  }
  chart.addSeries({ ...numeric, stroke: NUMERIC_COLOR, style: "dotted-marked", label: "numerical" });
  return chart.render();
}

export function renderHoldings(table: Table): string {
  const cols = numericColumns(table, ["r", "phi_r"]);
  const series = pairs(cols.r, cols.phi_r);
  const chart = new Chart(
    extentOf(series.x),
    extentOf(series.y.concat([0])),
    "Remaining holdings",
    "time r",
    "holdings",
  );
  chart.addAxes();
  chart.addSeries({ ...series, stroke: NUMERIC_COLOR, style: "dotted-marked" });
  return chart.render();
}

function uniqueSorted(values: number[]): number[] {
  return [...new Set(values)].sort((a, b) => a - b);
}

export function renderSurface(table: Table): string {
  const cols = numericColumns(table, ["t", "phi", "f"]);
  const t = cols.t as number[];
  const phi = cols.phi as number[];
  const f = cols.f as number[];
  const chart = new Chart(extentOf(t, 0), extentOf(phi, 0), "Per-share value surface", "horizon t", "holdings");
  const ts = uniqueSorted(t);
  const phis = uniqueSorted(phi);
  if (ts.length > 1 && phis.length > 1) {
    const fMax = Math.max(...f, 1e-12);
    const dt = ts[1] - ts[0];
    const dphi = phis[1] - phis[0];
    for (let i = 0; i < t.length; i += 1) {
      const level = Math.round(240 - 200 * (f[i] / fMax));
      chart.addCell(t[i], t[i] + dt, phi[i], phi[i] + dphi, `rgb(${level},${level},255)`);
    }
  }
  chart.addAxes();
  return chart.render();
}

export function renderRegions(table: Table): string {
  const cols = numericColumns(table, ["t", "phi", "boundary_a", "boundary_c"]);
  const labels = stringColumn(table, "region");
  const t = cols.t as number[];
  const phi = cols.phi as number[];
  const chart = new Chart(extentOf(t, 0), extentOf(phi, 0), "Holdings regions", "horizon t", "holdings");
  const ts = uniqueSorted(t);
  const phis = uniqueSorted(phi);
  if (ts.length > 1 && phis.length > 1) {
    const dt = ts[1] - ts[0];
    const dphi = phis[1] - phis[0];
    for (let i = 0; i < t.length; i += 1) {
      const fill = BAND_FILLS[labels[i]];
      if (fill === undefined) {
        throw new CsvError(`row ${i + 2}: unknown region label ${labels[i]}`);
      }
      chart.addCell(t[i] - dt / 2, t[i] + dt / 2, phi[i] - dphi / 2, phi[i] + dphi / 2, fill);
    }
    // analytic band boundaries, one point per t
    const phiMax = Math.max(...phi);
    const seen = new Map<number, { a: number; c: number }>();
    for (let i = 0; i < t.length; i += 1) {
      seen.set(t[i], { a: (cols.boundary_a as number[])[i], c: (cols.boundary_c as number[])[i] });
    }
    const xs = [...seen.keys()].sort((a, b) => a - b);
    const upper = xs.map((x) => Math.min(seen.get(x)!.a, phiMax));
    const lower = xs.map((x) => Math.min(seen.get(x)!.c, phiMax));
    chart.addSeries({ x: xs, y: upper, stroke: "black", style: "solid", label: "saturation boundary" });
    chart.addSeries({ x: xs, y: lower, stroke: "black", style: "solid", label: "early-finish boundary" });
  }
  chart.addAxes();
  return chart.render();
}

export function renderFigure(kind: FigureKind, csvText: string): string {
  const table = parseCsv(csvText);
  switch (kind) {
    case "strategy":
      return renderStrategy(table);
    case "holdings":
      return renderHoldings(table);
    case "surface":
      return renderSurface(table);
    case "regions":
      return renderRegions(table);
  }
}
