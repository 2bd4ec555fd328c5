/**
 * Minimal deterministic SVG scene builder with log-log axes.
 *
 * Output depends only on the drawing calls (no timestamps, no randomness),
 * so rendered figures hash stably.
 */

export interface Viewport {
  width: number;
  height: number;
  margin: { left: number; right: number; top: number; bottom: number };
}

export const DEFAULT_VIEWPORT: Viewport = {
  width: 760,
  height: 520,
  margin: { left: 70, right: 160, top: 40, bottom: 55 },
};

const fmt = (v: number): string => {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
};

export class LogScale {
  constructor(
    readonly domainMin: number,
    readonly domainMax: number,
    readonly rangeMin: number,
    readonly rangeMax: number,
  ) {
    if (!(domainMin > 0) || !(domainMax > domainMin)) {
      throw new Error(`log scale needs 0 < min < max, got [${domainMin}, ${domainMax}]`);
    }
  }

  map(v: number): number {
    const t = (Math.log10(v) - Math.log10(this.domainMin))
      / (Math.log10(this.domainMax) - Math.log10(this.domainMin));
    return this.rangeMin + t * (this.rangeMax - this.rangeMin);
  }

  /** Powers of ten inside the domain (always at least the end points). */
  ticks(): number[] {
    const lo = Math.ceil(Math.log10(this.domainMin) - 1e-9);
    const hi = Math.floor(Math.log10(this.domainMax) + 1e-9);
    const out: number[] = [];
    for (let e = lo; e <= hi; e++) out.push(10 ** e);
    if (out.length === 0) out.push(this.domainMin, this.domainMax);
    return out;
  }
}

export function padLog(min: number, max: number, factor = 1.4): [number, number] {
  return [min / factor, max * factor];
}

const tickLabel = (v: number): string => {
  const e = Math.round(Math.log10(v));
  if (Math.abs(v - 10 ** e) / 10 ** e < 1e-9) return `1e${e}`;
  return v.toPrecision(3);
};

export class SvgScene {
  private parts: string[] = [];

  constructor(readonly vp: Viewport = DEFAULT_VIEWPORT) {}

  raw(el: string): void {
    this.parts.push(el);
  }

  line(x1: number, y1: number, x2: number, y2: number, stroke: string,
       width = 1, dash?: string): void {
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.raw(`<line x1="${fmt(x1)}" y1="${fmt(y1)}" x2="${fmt(x2)}" y2="${fmt(y2)}" `
      + `stroke="${stroke}" stroke-width="${width}"${d}/>`);
  }

  polyline(points: [number, number][], stroke: string, width = 1.5,
           dash?: string): void {
    const pts = points.map(([x, y]) => `${fmt(x)},${fmt(y)}`).join(" ");
    const d = dash ? ` stroke-dasharray="${dash}"` : "";
    this.raw(`<polyline points="${pts}" fill="none" stroke="${stroke}" `
      + `stroke-width="${width}"${d}/>`);
  }

  marker(x: number, y: number, kind: string, color: string, size = 4): void {
    const s = size;
    switch (kind) {
      case "square":
        this.raw(`<rect x="${fmt(x - s)}" y="${fmt(y - s)}" width="${fmt(2 * s)}" `
          + `height="${fmt(2 * s)}" fill="${color}"/>`);
        break;
      case "diamond":
        this.raw(`<path d="M ${fmt(x)} ${fmt(y - s * 1.3)} L ${fmt(x + s * 1.3)} ${fmt(y)} `
          + `L ${fmt(x)} ${fmt(y + s * 1.3)} L ${fmt(x - s * 1.3)} ${fmt(y)} Z" fill="${color}"/>`);
        break;
      case "triangle":
        this.raw(`<path d="M ${fmt(x)} ${fmt(y - s * 1.2)} L ${fmt(x + s * 1.2)} ${fmt(y + s)} `
          + `L ${fmt(x - s * 1.2)} ${fmt(y + s)} Z" fill="${color}"/>`);
        break;
      default:
        this.raw(`<circle cx="${fmt(x)}" cy="${fmt(y)}" r="${fmt(s)}" fill="${color}"/>`);
    }
  }

  text(x: number, y: number, content: string, opts: { size?: number; anchor?: string;
       color?: string; rotate?: number } = {}): void {
    const { size = 12, anchor = "start", color = "#222", rotate } = opts;
    const tr = rotate !== undefined ? ` transform="rotate(${rotate} ${fmt(x)} ${fmt(y)})"` : "";
    this.raw(`<text x="${fmt(x)}" y="${fmt(y)}" font-size="${size}" `
      + `text-anchor="${anchor}" fill="${color}" font-family="sans-serif"${tr}>`
      + escapeXml(content) + `</text>`);
  }

  axes(xs: LogScale, ys: LogScale, xLabel: string, yLabel: string): void {
    const { margin, width, height } = this.vp;
    const x0 = margin.left;
    const x1 = width - margin.right;
    const y0 = height - margin.bottom;
    const y1 = margin.top;
    this.line(x0, y0, x1, y0, "#000");
    this.line(x0, y0, x0, y1, "#000");
    for (const t of xs.ticks()) {
      const px = xs.map(t);
      this.line(px, y0, px, y0 + 5, "#000");
      this.line(px, y0, px, y1, "#ddd", 0.5);
      this.text(px, y0 + 18, tickLabel(t), { anchor: "middle", size: 11 });
    }
    for (const t of ys.ticks()) {
      const py = ys.map(t);
      this.line(x0 - 5, py, x0, py, "#000");
      this.line(x0, py, x1, py, "#ddd", 0.5);
      this.text(x0 - 8, py + 4, tickLabel(t), { anchor: "end", size: 11 });
    }
    this.text((x0 + x1) / 2, height - 12, xLabel, { anchor: "middle" });
    this.text(16, (y0 + y1) / 2, yLabel, { anchor: "middle", rotate: -90 });
  }

  render(title: string): string {
    const { width, height } = this.vp;
    return [
      `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" `
      + `viewBox="0 0 ${width} ${height}">`,
      `<rect width="${width}" height="${height}" fill="white"/>`,
      `<text x="${width / 2}" y="22" font-size="15" text-anchor="middle" `
      + `font-family="sans-serif">${escapeXml(title)}</text>`,
      ...this.parts,
      `</svg>`,
      "",
    ].join("\n");
  }
}

function escapeXml(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}
