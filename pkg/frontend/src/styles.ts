/** Fixed scheme -> style map. Unknown schemes are a hard error so a typo in
 * a CSV can never silently drop a curve. */

export interface SchemeStyle {
  color: string;
  marker: "circle" | "square" | "diamond" | "triangle";
  dash?: string;
}

export const SCHEME_STYLES: Record<string, SchemeStyle> = {
  "leapfrog": { color: "#1f77b4", marker: "circle" },
  "5stage": { color: "#ff7f0e", marker: "square" },
  "5stage-fg": { color: "#2ca02c", marker: "diamond" },
  "fg-approx": { color: "#d62728", marker: "triangle" },
  "11stage": { color: "#9467bd", marker: "circle" },
  "nested-leapfrog": { color: "#1f77b4", marker: "circle", dash: "5 3" },
  "nested-5stage": { color: "#ff7f0e", marker: "square", dash: "5 3" },
  "nested-fg": { color: "#2ca02c", marker: "diamond", dash: "5 3" },
  "adapted-nested-fg": { color: "#8c564b", marker: "triangle", dash: "2 3" },
};

export class UnknownSchemeError extends Error {}

export function styleOf(scheme: string): SchemeStyle {
  const style = SCHEME_STYLES[scheme];
  if (style === undefined) {
    throw new UnknownSchemeError(
      `unknown scheme '${scheme}'; known: ${Object.keys(SCHEME_STYLES).join(", ")}`);
  }
  return style;
}
