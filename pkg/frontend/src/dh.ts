/**
 * Accuracy figure: mean |dH| versus step size, log-log, one curve per
 * scheme with standard-error bars and order-2 / order-4 slope guides.
 */

import { groupByScheme, parseSweepCsv } from "./csv.js";
import { styleOf } from "./styles.js";
import { DEFAULT_VIEWPORT, LogScale, SvgScene, padLog } from "./svg.js";

export interface RenderResult {
  svg: string;
  warnings: string[];
}

export function renderDhFigure(csvText: string, source = "<csv>",
                               title = "Energy error vs step size"): RenderResult {
  const { rows, skipped } = parseSweepCsv(csvText, source);
  const warnings = skipped.map(
    (s) => `${source}:${s.line}: skipping NaN row (scheme=${s.scheme}, h=${s.h})`);
  const usable = rows.filter((r) => r.meanAbsDh > 0);
  if (usable.length === 0) {
    throw new Error(`${source}: no rows with positive mean |dH| to plot`);
  }
  const groups = groupByScheme(usable, "h");
  for (const scheme of groups.keys()) styleOf(scheme);

  const hs = usable.map((r) => r.h);
  const ys = usable.map((r) => r.meanAbsDh);
  const [xMin, xMax] = padLog(Math.min(...hs), Math.max(...hs));
  const yLo = Math.min(...ys);
  const yHi = Math.max(...usable.map((r) => r.meanAbsDh + r.stderrDh));
  const [yMin, yMax] = padLog(yLo, yHi, 2.0);

  const vp = DEFAULT_VIEWPORT;
  const xs = new LogScale(xMin, xMax, vp.margin.left, vp.width - vp.margin.right);
  const yscale = new LogScale(yMin, yMax, vp.height - vp.margin.bottom, vp.margin.top);

  const scene = new SvgScene(vp);
  scene.axes(xs, yscale, "step size h", "mean |dH|");

  // order guides through the geometric center of the data cloud, clipped to
  // the plot box so they always draw
  const hMid = Math.sqrt(Math.min(...hs) * Math.max(...hs));
  const yMid = Math.sqrt(yLo * yHi);
  for (const order of [2, 4]) {
    const tLo = Math.max(xMin * 1.05, hMid * (yMin / yMid) ** (1 / order));
    const tHi = Math.min(xMax / 1.05, hMid * (yMax / yMid) ** (1 / order));
    if (!(tHi > tLo)) continue;
    const pts: [number, number][] = [tLo, tHi].map((t) => [
      xs.map(t), yscale.map(yMid * (t / hMid) ** order)]);
    scene.polyline(pts, "#999", 1, "6 4");
    const last = pts[1]!;
    scene.text(last[0] - 4, last[1] - 5, `slope ${order}`,
               { size: 10, color: "#777", anchor: "end" });
  }

  const legendX = vp.width - vp.margin.right + 12;
  let legendY = vp.margin.top + 8;
  for (const [scheme, list] of [...groups.entries()].sort()) {
    const style = styleOf(scheme);
    const pts: [number, number][] = list.map(
      (r) => [xs.map(r.h), yscale.map(r.meanAbsDh)]);
    scene.polyline(pts, style.color, 1.5, style.dash);
    for (const r of list) {
      const px = xs.map(r.h);
      scene.marker(px, yscale.map(r.meanAbsDh), style.marker, style.color);
      if (r.stderrDh > 0) {
        const hi = r.meanAbsDh + r.stderrDh;
        const lo = Math.max(r.meanAbsDh - r.stderrDh, yMin);
        scene.line(px, yscale.map(lo), px, yscale.map(hi), style.color, 1);
      }
    }
    scene.marker(legendX + 6, legendY - 4, style.marker, style.color);
    scene.text(legendX + 16, legendY, scheme, { size: 11 });
    legendY += 18;
  }
  return { svg: scene.render(title), warnings };
}
