import { mkdtempSync, readFileSync, writeFileSync } from "fs";
import { tmpdir } from "os";
import { join } from "path";
import { describe, expect, it } from "vitest";

import { CsvError, numericColumns, parseCsv } from "../src/csv.js";
import { renderFigure, renderRegions, renderStrategy } from "../src/figures.js";
import { main } from "../src/render.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture(name: string): string {
  return readFileSync(join(FIXTURES, name), "utf8");
}

describe("csv parsing", () => {
  it("rejects empty files", () => {
    expect(() => parseCsv("")).toThrow(CsvError);
  });

  it("rejects ragged rows", () => {
    expect(() => parseCsv("a,b\n1,2,3\n")).toThrow(/row 2/);
  });

  it("maps blank cells to null", () => {
    const table = parseCsv("r,zeta,zeta_analytic\n0.0,1.5,\n");
    const cols = numericColumns(table, ["r", "zeta", "zeta_analytic"]);
    expect(cols.zeta[0]).toBe(1.5);
    expect(cols.zeta_analytic[0]).toBeNull();
  });

  it("fails loudly when a model column is missing", () => {
    const table = parseCsv("r,zeta\n0.0,1.5\n");
    expect(() => numericColumns(table, ["r", "zeta", "zeta_analytic"])).toThrow(
      /missing column\(s\) zeta_analytic/,
    );
  });
});

describe("strategy figures", () => {
  it("small holdings: constant closed-form rate, then zero", () => {
    const table = parseCsv(fixture("strategy_phi1.csv"));
    const cols = numericColumns(table, ["r", "zeta", "zeta_analytic"]);
    const analytic = cols.zeta_analytic.filter((v): v is number => v !== null);
    expect(analytic.length).toBeGreaterThan(10);
    const active = analytic.filter((v) => v > 0);
    const steady = active[0];
    expect(steady).toBeCloseTo(2.23607, 4);
    for (const v of active) {
      expect(v).toBeCloseTo(steady, 10); // constant while selling
    }
    expect(analytic[analytic.length - 1]).toBe(0); // switched off afterwards
    // the numerical rates reproduce the same shape (fixture grid is coarse,
    // so only a qualitative band is asserted here)
    const numeric = cols.zeta as number[];
    expect(Math.abs(numeric[0] - steady) / steady).toBeLessThan(0.15);
    expect(numeric[numeric.length - 1]).toBeLessThan(0.2 * steady); // tailing off
  });

  it("large holdings: rate increases toward the horizon", () => {
    const table = parseCsv(fixture("strategy_phi100.csv"));
    const cols = numericColumns(table, ["r", "zeta", "zeta_analytic"]);
    const analytic = cols.zeta_analytic.filter((v): v is number => v !== null);
    for (let i = 1; i < analytic.length; i += 1) {
      expect(analytic[i]).toBeGreaterThan(analytic[i - 1]);
    }
    const numeric = cols.zeta as number[];
    expect(numeric[Math.floor(numeric.length * 0.8)]).toBeGreaterThan(numeric[0]);
  });

  it("middle holdings: numeric only, no closed form", () => {
    const table = parseCsv(fixture("strategy_phi10.csv"));
    const cols = numericColumns(table, ["r", "zeta", "zeta_analytic"]);
    expect(cols.zeta_analytic.every((v) => v === null)).toBe(true);
    const svg = renderStrategy(table);
    expect(svg).toContain("circle"); // numeric series is marked
    expect(svg).not.toContain("closed form");
  });

  it("overlays numeric (marked dotted) and analytic (solid) series", () => {
    const svg = renderStrategy(parseCsv(fixture("strategy_phi1.csv")));
    expect(svg).toContain('stroke-dasharray="2,4"');
    expect(svg).toContain("circle");
    expect(svg).toContain("closed form");
    const solid = svg.split("\n").filter((l) => l.includes("polyline") && !l.includes("dasharray"));
    expect(solid.length).toBeGreaterThan(0);
  });

  it("renders an empty-but-valid file as empty axes", () => {
    const svg = renderFigure("strategy", "r,zeta,zeta_analytic\n");
    expect(svg).toContain("<svg");
    expect(svg).not.toContain("polyline");
  });
});

describe("holdings and surface figures", () => {
  it("holdings decrease over time", () => {
    const table = parseCsv(fixture("holdings_phi1.csv"));
    const cols = numericColumns(table, ["r", "phi_r"]);
    const phi = cols.phi_r as number[];
    expect(phi[0]).toBe(1);
    expect(phi[phi.length - 1]).toBeLessThan(0.05);
    expect(renderFigure("holdings", fixture("holdings_phi1.csv"))).toContain("<svg");
  });

  it("surface renders one cell per sample", () => {
    const svg = renderFigure("surface", fixture("f_surface.csv"));
    expect((svg.match(/<rect/g) ?? []).length).toBeGreaterThan(100);
  });
});

describe("region map", () => {
  it("shows three bands split by the analytic boundaries", () => {
    const table = parseCsv(fixture("regions.csv"));
    const labels = new Set(table.rows.map((r) => r[table.columns.indexOf("region")]));
    expect(labels).toEqual(new Set(["A", "B", "C"]));
    const svg = renderRegions(table);
    for (const fill of ["#f4c7ab", "#d7e3c5", "#b8cfe8"]) {
      expect(svg).toContain(fill);
    }
    expect(svg).toContain("saturation boundary");
    expect(svg).toContain("early-finish boundary");
  });

  it("rejects unknown labels", () => {
    const text = "t,phi,region,boundary_a,boundary_c,value_closed_form\n" +
      "0.5,1.0,X,2.0,1.0,\n0.5,2.0,X,2.0,1.0,\n1.0,1.0,X,2.0,1.0,\n1.0,2.0,X,2.0,1.0,\n";
    expect(() => renderFigure("regions", text)).toThrow(/unknown region label/);
  });
});

describe("render CLI", () => {
  it("writes an svg and returns 0", () => {
    const dir = mkdtempSync(join(tmpdir(), "optexec-render-"));
    const out = join(dir, "fig.svg");
    const code = main(["--kind", "strategy", "--in", join(FIXTURES, "strategy_phi1.csv"), "--out", out]);
    expect(code).toBe(0);
    expect(readFileSync(out, "utf8")).toContain("</svg>");
  });

  it("fails on a schema mismatch with a column diagnostic", () => {
    const dir = mkdtempSync(join(tmpdir(), "optexec-render-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "r,zeta\n0,1\n");
    const code = main(["--kind", "strategy", "--in", bad, "--out", join(dir, "fig.svg")]);
    expect(code).toBe(1);
  });

  it("rejects unknown kinds and non-svg outputs", () => {
    expect(main(["--kind", "pie", "--in", "x.csv", "--out", "y.svg"])).toBe(1);
    expect(main(["--kind", "strategy", "--in", "x.csv", "--out", "y.png"])).toBe(1);
  });
});
