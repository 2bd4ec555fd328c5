import { execFileSync } from "node:child_process";
import { existsSync, mkdtempSync, readFileSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";
import { parseArgs, run } from "../src/cli.js";

const fixturePath = (name: string) =>
  new URL(`../fixtures/${name}`, import.meta.url).pathname;

describe("parseArgs", () => {
  it("parses a full command line", () => {
    expect(parseArgs(["dh", "--in", "a.csv", "--out", "b.svg"])).toEqual(
      { mode: "dh", input: "a.csv", output: "b.svg", title: undefined });
  });

  it("rejects unknown modes and missing options", () => {
    expect(() => parseArgs(["scatter"])).toThrow(/usage/);
    expect(() => parseArgs(["dh", "--in", "a.csv"])).toThrow(/--out/);
    expect(() => parseArgs(["cost", "--frob", "x", "--out", "y"])).toThrow(/unknown option/);
  });
});

describe("run", () => {
  it("writes both figure kinds and reports NaN skips", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const warnings: string[] = [];
    run({ mode: "dh", input: fixturePath("sweep_sample.csv"),
          output: join(dir, "dh.svg") }, (m) => warnings.push(m));
    run({ mode: "cost", input: fixturePath("cost_sample.csv"),
          output: join(dir, "cost.svg") }, (m) => warnings.push(m));
    expect(existsSync(join(dir, "dh.svg"))).toBe(true);
    expect(existsSync(join(dir, "cost.svg"))).toBe(true);
    expect(warnings.some((w) => w.includes("NaN"))).toBe(true);
  });

  it("repeated runs produce identical bytes", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const out1 = join(dir, "a.svg");
    const out2 = join(dir, "b.svg");
    run({ mode: "dh", input: fixturePath("sweep_sample.csv"), output: out1 }, () => {});
    run({ mode: "dh", input: fixturePath("sweep_sample.csv"), output: out2 }, () => {});
    expect(readFileSync(out1, "utf-8")).toBe(readFileSync(out2, "utf-8"));
  });

  it("propagates schema errors", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    expect(() => run({ mode: "dh", input: fixturePath("bad_header.csv"),
                       output: join(dir, "x.svg") }, () => {}))
      .toThrow(/bad header/);
  });
});

describe("built executable", () => {
  const cliJs = new URL("../dist/cli.js", import.meta.url).pathname;

  it.skipIf(!existsSync(cliJs))("exits nonzero on schema violations", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "not,a,sweep\n1,2,3\n");
    let failed = false;
    try {
      execFileSync("node", [cliJs, "dh", "--in", bad, "--out", join(dir, "x.svg")],
                   { stdio: "pipe" });
    } catch (err: any) {
      failed = true;
      expect(String(err.stderr)).toMatch(/plotkit:.*bad header/);
    }
    expect(failed).toBe(true);
  });

  it.skipIf(!existsSync(cliJs))("renders the fixture end to end", () => {
    const dir = mkdtempSync(join(tmpdir(), "plotkit-"));
    const out = join(dir, "fig.svg");
    execFileSync("node", [cliJs, "cost", "--in", fixturePath("cost_sample.csv"),
                          "--out", out], { stdio: "pipe" });
    expect(readFileSync(out, "utf-8")).toContain("</svg>");
  });
});
