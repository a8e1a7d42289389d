/** Minimal SVG chart builder: axes, polylines, markers, filled cells. */

export interface Extent {
  min: number;
  max: number;
}

export interface Series {
  x: number[];
  y: number[];
  stroke: string;
  /** solid line, dotted line, or dotted-with-circle-markers */
  style: "solid" | "dotted" | "dotted-marked";
  label?: string;
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { left: 62, right: 16, top: 30, bottom: 46 };

export function extentOf(values: number[], pad = 0.05): Extent {
  if (values.length === 0) {
    return { min: 0, max: 1 };
  }
  let min = Math.min(...values);
  let max = Math.max(...values);
  if (min === max) {
    min -= 0.5;
    max += 0.5;
  }
  const span = max - min;
  return { min: min - pad * span, max: max + pad * span };
}

export class Chart {
  private parts: string[] = [];
  constructor(
    private xExtent: Extent,
    private yExtent: Extent,
    private title: string,
    private xLabel: string,
    private yLabel: string,
  ) {}

  toX(x: number): number {
    const { min, max } = this.xExtent;
    return MARGIN.left + ((x - min) / (max - min)) * (WIDTH - MARGIN.left - MARGIN.right);
  }

  toY(y: number): number {
    const { min, max } = this.yExtent;
    return HEIGHT - MARGIN.bottom - ((y - min) / (max - min)) * (HEIGHT - MARGIN.top - MARGIN.bottom);
  }

  private ticks(extent: Extent, count = 5): number[] {
    const span = extent.max - extent.min;
    const step = Math.pow(10, Math.floor(Math.log10(span / count)));
    const candidates = [step, 2 * step, 5 * step, 10 * step];
    const chosen = candidates.find((c) => span / c <= count + 1) ?? 10 * step;
    const start = Math.ceil(extent.min / chosen) * chosen;
    const out: number[] = [];
    for (let v = start; v <= extent.max + 1e-12; v += chosen) {
      out.push(Number(v.toPrecision(12)));
    }
    return out;
  }

  addAxes(): void {
    const x0 = MARGIN.left;
    const x1 = WIDTH - MARGIN.right;
    const y0 = HEIGHT - MARGIN.bottom;
    const y1 = MARGIN.top;
    this.parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="black"/>`);
    this.parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="black"/>`);
    for (const t of this.ticks(this.xExtent)) {
      const px = this.toX(t);
      this.parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="black"/>`);
      this.parts.push(
        `<text x="${px}" y="${y0 + 20}" font-size="12" text-anchor="middle">${t}</text>`,
      );
    }
    for (const t of this.ticks(this.yExtent)) {
      const py = this.toY(t);
      this.parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="black"/>`);
      this.parts.push(
        `<text x="${x0 - 8}" y="${py + 4}" font-size="12" text-anchor="end">${t}</text>`,
      );
    }
    this.parts.push(
      `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 10}" font-size="13" text-anchor="middle">${this.xLabel}</text>`,
    );
    this.parts.push(
      `<text x="16" y="${(y0 + y1) / 2}" font-size="13" text-anchor="middle" transform="rotate(-90 16 ${(y0 + y1) / 2})">${this.yLabel}</text>`,
    );
    this.parts.push(
      `<text x="${(x0 + x1) / 2}" y="20" font-size="14" text-anchor="middle">${this.title}</text>`,
    );
  }

  addSeries(series: Series): void {
    const points = series.x.map((x, i) => [this.toX(x), this.toY(series.y[i])]);
    if (points.length === 0) {
      return;
    }
    const path = points.map(([px, py]) => `${px.toFixed(2)},${py.toFixed(2)}`).join(" ");
    const dash = series.style === "solid" ? "" : ' stroke-dasharray="2,4"';
    this.parts.push(
      `<polyline points="${path}" fill="none" stroke="${series.stroke}" stroke-width="1.6"${dash}/>`,
    );
    if (series.style === "dotted-marked") {
      const stride = Math.max(1, Math.floor(points.length / 60));
      for (let i = 0; i < points.length; i += stride) {
        const [px, py] = points[i];
        this.parts.push(
          `<circle cx="${px.toFixed(2)}" cy="${py.toFixed(2)}" r="2.5" fill="none" stroke="${series.stroke}"/>`,
        );
      }
    }
    if (series.label) {
      const [px, py] = points[Math.floor(points.length / 2)];
      this.parts.push(
        `<text x="${px + 6}" y="${py - 6}" font-size="12" fill="${series.stroke}">${series.label}</text>`,
      );
    }
  }

  /** Filled rectangle in data coordinates (used for heatmaps and region bands). */
  addCell(x0: number, x1: number, y0: number, y1: number, fill: string): void {
    const px = this.toX(x0);
    const pw = Math.max(this.toX(x1) - px, 0.1);
    const py = this.toY(y1);
    const ph = Math.max(this.toY(y0) - py, 0.1);
    this.parts.push(
      `<rect x="${px.toFixed(2)}" y="${py.toFixed(2)}" width="${pw.toFixed(2)}" height="${ph.toFixed(2)}" fill="${fill}" stroke="none"/>`,
    );
  }

  addText(x: number, y: number, text: string, fill = "black"): void {
    this.parts.push(
      `<text x="${this.toX(x)}" y="${this.toY(y)}" font-size="13" fill="${fill}">${text}</text>`,
    );
  }

  render(): string {
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" viewBox="0 0 ${WIDTH} ${HEIGHT}">`,
      `<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`,
      ...this.parts,
      "</svg>",
    ].join("\n");
  }
}
