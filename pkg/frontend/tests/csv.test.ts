import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { CsvSchemaError, groupByScheme, parseSweepCsv } from "../src/csv.js";

const fixture = (name: string) =>
  readFileSync(new URL(`../fixtures/${name}`, import.meta.url), "utf-8");

describe("parseSweepCsv", () => {
  it("parses the committed sweep fixture", () => {
    const { rows, skipped } = parseSweepCsv(fixture("sweep_sample.csv"), "sweep_sample.csv");
    expect(rows.length).toBeGreaterThan(20);
    const first = rows[0]!;
    expect(first.scheme).toBe("leapfrog");
    expect(first.h).toBeCloseTo(0.05);
    expect(first.invPerTraj).toBe(80);
    // the fixture contains one solver-failure row recorded as NaNs
    expect(skipped.length).toBe(1);
    expect(skipped[0]!.scheme).toBe("leapfrog");
  });

  it("ignores comment and blank lines", () => {
    const text = "# note\n\nscheme,h,M,mean_abs_dH,stderr_dH,inv_per_step,inv_per_traj,wall_s,acceptance\nleapfrog,0.1,0,1e-3,1e-4,4,80,0.1,0.99\n# slope,leapfrog,2.0\n";
    const { rows } = parseSweepCsv(text);
    expect(rows.length).toBe(1);
  });

  it("rejects an empty file naming the source", () => {
    expect(() => parseSweepCsv(fixture("empty.csv"), "empty.csv"))
      .toThrow(/empty\.csv.*empty CSV/);
  });

  it("rejects a wrong header", () => {
    expect(() => parseSweepCsv(fixture("bad_header.csv"), "bad_header.csv"))
      .toThrow(CsvSchemaError);
  });

  it("rejects rows with the wrong column count", () => {
    const text = "scheme,h,M,mean_abs_dH,stderr_dH,inv_per_step,inv_per_traj,wall_s,acceptance\nleapfrog,0.1,0,1e-3\n";
    expect(() => parseSweepCsv(text, "x.csv")).toThrow(/x\.csv:2.*columns/);
  });

  it("groups and sorts by the requested key", () => {
    const { rows } = parseSweepCsv(fixture("sweep_sample.csv"));
    const groups = groupByScheme(rows, "h");
    expect([...groups.get("5stage")!.map((r) => r.h)]).toEqual([0.05, 0.1, 0.2]);
  });
});
