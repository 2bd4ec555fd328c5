/**
 * Cost figure: inversions per trajectory (primary axis) and wall seconds
 * (secondary axis) versus achieved mean |dH|, log-log. The legend is ordered
 * by each scheme's cost at its most accurate (leftmost) point and the
 * cheapest scheme is annotated.
 */

import { groupByScheme, parseSweepCsv } from "./csv.js";
import { styleOf } from "./styles.js";
import { DEFAULT_VIEWPORT, LogScale, SvgScene, padLog } from "./svg.js";
import type { RenderResult } from "./dh.js";

export function renderCostFigure(csvText: string, source = "<csv>",
                                 title = "Cost vs achieved accuracy"): RenderResult {
  const { rows, skipped } = parseSweepCsv(csvText, source);
  const warnings = skipped.map(
    (s) => `${source}:${s.line}: skipping NaN row (scheme=${s.scheme}, h=${s.h})`);
  const usable = rows.filter((r) => r.meanAbsDh > 0 && r.invPerTraj > 0);
  if (usable.length === 0) {
    throw new Error(`${source}: no rows with positive accuracy and cost`);
  }
  const groups = groupByScheme(usable, "meanAbsDh");
  for (const scheme of groups.keys()) styleOf(scheme);

  const accs = usable.map((r) => r.meanAbsDh);
  const invs = usable.map((r) => r.invPerTraj);
  const walls = usable.map((r) => r.wallS).filter((w) => w > 0);
  const [xMin, xMax] = padLog(Math.min(...accs), Math.max(...accs));
  const [yMin, yMax] = padLog(Math.min(...invs), Math.max(...invs), 1.6);

  const vp = DEFAULT_VIEWPORT;
  const xs = new LogScale(xMin, xMax, vp.margin.left, vp.width - vp.margin.right);
  const yscale = new LogScale(yMin, yMax, vp.height - vp.margin.bottom, vp.margin.top);
  const scene = new SvgScene(vp);
  scene.axes(xs, yscale, "mean |dH|", "Dirac inversions per trajectory");

  // secondary wall-clock axis on the right edge of the plot area
  if (walls.length > 0) {
    const [wMin, wMax] = padLog(Math.min(...walls), Math.max(...walls), 1.6);
    const wscale = new LogScale(wMin, wMax, vp.height - vp.margin.bottom, vp.margin.top);
    const xRight = vp.width - vp.margin.right;
    scene.line(xRight, vp.margin.top, xRight, vp.height - vp.margin.bottom, "#888");
    for (const t of wscale.ticks()) {
      const py = wscale.map(t);
      scene.line(xRight, py, xRight + 5, py, "#888");
      scene.text(xRight + 8, py + 4, `1e${Math.round(Math.log10(t))}`,
                 { size: 10, color: "#888" });
    }
    scene.text(xRight + 40, vp.margin.top - 8, "wall s/traj", { size: 10, color: "#888" });
    for (const [scheme, list] of [...groups.entries()].sort()) {
      const style = styleOf(scheme);
      const pts: [number, number][] = list.filter((r) => r.wallS > 0)
        .map((r) => [xs.map(r.meanAbsDh), wscale.map(r.wallS)]);
      if (pts.length > 1) scene.polyline(pts, style.color, 0.6, "1 3");
    }
  }

  // legend entries sorted by cost at the scheme's leftmost point
  const order = [...groups.entries()]
    .map(([scheme, list]) => ({ scheme, left: list[0]! }))
    .sort((a, b) => a.left.invPerTraj - b.left.invPerTraj
      || a.scheme.localeCompare(b.scheme));

  const legendX = vp.width - vp.margin.right + 12;
  let legendY = vp.margin.top + 40;
  for (const { scheme } of order) {
    const style = styleOf(scheme);
    const list = groups.get(scheme)!;
    const pts: [number, number][] = list.map(
      (r) => [xs.map(r.meanAbsDh), yscale.map(r.invPerTraj)]);
    scene.polyline(pts, style.color, 1.5, style.dash);
    for (const r of list) {
      scene.marker(xs.map(r.meanAbsDh), yscale.map(r.invPerTraj),
                   style.marker, style.color);
    }
    scene.marker(legendX + 6, legendY - 4, style.marker, style.color);
    scene.text(legendX + 16, legendY, scheme, { size: 11 });
    legendY += 18;
  }

  const cheapest = order[0]!;
  const cx = xs.map(cheapest.left.meanAbsDh);
  const cy = yscale.map(cheapest.left.invPerTraj);
  scene.text(cx + 8, cy - 8, `cheapest: ${cheapest.scheme}`,
             { size: 11, color: "#333" });

  return { svg: scene.render(title), warnings };
}
