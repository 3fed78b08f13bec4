/**
 * Minimal deterministic SVG plotting surface: linear/log scales, axes with
 * ticks, polylines, scatter markers and dashed reference lines.  Output is
 * plain text with fixed number formatting, so identical inputs give
 * byte-identical files.
 */

export type ScaleKind = "linear" | "log";

export interface Series {
  label: string;
  x: number[];
  y: number[];
  color: string;
  marker?: boolean;
  dashed?: boolean;
  /** machine-readable tag attached to the path element */
  tag?: string;
}

export interface AxesSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  xScale: ScaleKind;
  yScale: ScaleKind;
}

const WIDTH = 720;
const HEIGHT = 480;
const MARGIN = { left: 72, right: 24, top: 40, bottom: 56 };
export const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

function fmt(v: number): string {
  return Number(v.toPrecision(6)).toString();
}

function finitePairs(s: Series): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let i = 0; i < s.x.length; i++) {
    const x = s.x[i];
    const y = s.y[i];
    if (Number.isFinite(x) && Number.isFinite(y)) out.push([x, y]);
  }
  return out;
}

class Scale {
  constructor(
    readonly kind: ScaleKind,
    readonly lo: number,
    readonly hi: number,
    readonly pixLo: number,
    readonly pixHi: number,
  ) {}

  at(v: number): number {
    const t =
      this.kind === "log"
        ? (Math.log(v) - Math.log(this.lo)) / (Math.log(this.hi) - Math.log(this.lo))
        : (v - this.lo) / (this.hi - this.lo);
    return this.pixLo + t * (this.pixHi - this.pixLo);
  }

  ticks(): number[] {
    if (this.kind === "log") {
      const out: number[] = [];
      const lo = Math.ceil(Math.log10(this.lo) - 1e-9);
      const hi = Math.floor(Math.log10(this.hi) + 1e-9);
      for (let d = lo; d <= hi; d++) out.push(Math.pow(10, d));
      if (out.length < 2) out.push(this.lo, this.hi);
      return out;
    }
    const span = this.hi - this.lo;
    const base = Math.pow(10, Math.floor(Math.log10(span / 4)));
    const step = span / base > 8 ? 2 * base : base;
    const out: number[] = [];
    const first = Math.ceil(this.lo / step);
    for (let i = first; i * step <= this.hi + 1e-12 * span; i++) {
      const v = i * step;
      out.push(Math.abs(v) < 1e-12 * span ? 0 : v);
    }
    return out;
  }
}

function domain(values: number[], kind: ScaleKind): [number, number] {
  const finite = values.filter((v) => Number.isFinite(v) && (kind !== "log" || v > 0));
  if (finite.length === 0) return kind === "log" ? [0.1, 10] : [0, 1];
  let lo = Math.min(...finite);
  let hi = Math.max(...finite);
  if (lo === hi) {
    lo = kind === "log" ? lo / 2 : lo - 1;
    hi = kind === "log" ? hi * 2 : hi + 1;
  }
  if (kind === "log") return [lo / 1.3, hi * 1.3];
  const pad = 0.06 * (hi - lo);
  return [Math.min(lo, 0) === lo && lo >= 0 ? 0 : lo - pad, hi + pad];
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function renderSvg(spec: AxesSpec, series: Series[], warnings: string[] = []): string {
  const pairs = series.map(finitePairs);
  const xs = pairs.flat().map(([x]) => x);
  const ys = pairs.flat().map(([, y]) => y);
  const [xLo, xHi] = domain(xs, spec.xScale);
  const [yLo, yHi] = domain(ys, spec.yScale);
  const X = new Scale(spec.xScale, xLo, xHi, MARGIN.left, WIDTH - MARGIN.right);
  const Y = new Scale(spec.yScale, yLo, yHi, HEIGHT - MARGIN.bottom, MARGIN.top);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="Helvetica, Arial, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="white"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="22" text-anchor="middle" font-size="15">${escapeXml(spec.title)}</text>`,
  );

  // frame
  const x0 = MARGIN.left;
  const x1 = WIDTH - MARGIN.right;
  const y0 = HEIGHT - MARGIN.bottom;
  const y1 = MARGIN.top;
  parts.push(
    `<rect x="${x0}" y="${y1}" width="${x1 - x0}" height="${y0 - y1}" fill="none" stroke="#333"/>`,
  );

  for (const t of X.ticks()) {
    if (t < xLo || t > xHi) continue;
    const px = fmt(X.at(t));
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 5}" stroke="#333"/>`);
    parts.push(
      `<text x="${px}" y="${y0 + 20}" text-anchor="middle" font-size="11">${fmt(t)}</text>`,
    );
  }
  for (const t of Y.ticks()) {
    if (t < yLo || t > yHi) continue;
    const py = fmt(Y.at(t));
    parts.push(`<line x1="${x0 - 5}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333"/>`);
    parts.push(
      `<text x="${x0 - 8}" y="${py}" text-anchor="end" dominant-baseline="middle" ` +
        `font-size="11">${fmt(t)}</text>`,
    );
  }
  parts.push(
    `<text x="${(x0 + x1) / 2}" y="${HEIGHT - 12}" text-anchor="middle" font-size="13">` +
      `${escapeXml(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${(y0 + y1) / 2}" text-anchor="middle" font-size="13" ` +
      `transform="rotate(-90 18 ${(y0 + y1) / 2})">${escapeXml(spec.yLabel)}</text>`,
  );

  series.forEach((s, i) => {
    const pts = pairs[i];
    const attrs =
      `fill="none" stroke="${s.color}" stroke-width="1.5"` +
      (s.dashed ? ` stroke-dasharray="6 4"` : "") +
      (s.tag ? ` data-ref="${escapeXml(s.tag)}"` : "");
    if (pts.length > 1) {
      const d = pts.map(([x, y], j) => `${j ? "L" : "M"}${fmt(X.at(x))} ${fmt(Y.at(y))}`).join(" ");
      parts.push(`<path d="${d}" ${attrs}/>`);
    }
    if (s.marker || pts.length === 1) {
      for (const [x, y] of pts) {
        parts.push(
          `<circle cx="${fmt(X.at(x))}" cy="${fmt(Y.at(y))}" r="3" fill="${s.color}"` +
            (s.tag ? ` data-ref="${escapeXml(s.tag)}"` : "") +
            `/>`,
        );
      }
    }
    const ly = y1 + 16 + 16 * i;
    parts.push(
      `<line x1="${x1 - 150}" y1="${ly}" x2="${x1 - 120}" y2="${ly}" stroke="${s.color}" ` +
        `stroke-width="1.5"${s.dashed ? ` stroke-dasharray="6 4"` : ""}/>`,
    );
    parts.push(
      `<text x="${x1 - 114}" y="${ly + 4}" font-size="11">${escapeXml(s.label)}</text>`,
    );
  });

  warnings.forEach((w, i) => {
    parts.push(
      `<text x="${(x0 + x1) / 2}" y="${(y0 + y1) / 2 + 16 * i}" text-anchor="middle" ` +
        `font-size="13" fill="#a33">${escapeXml(w)}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
