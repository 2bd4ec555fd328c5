/**
 * Parser for the frozen sweep CSV schema emitted by the simulation engine.
 *
 * Columns: scheme,h,M,mean_abs_dH,stderr_dH,inv_per_step,inv_per_traj,wall_s,acceptance
 * Lines starting with '#' are footers/comments and are ignored here.
 */

export const CSV_COLUMNS = [
  "scheme", "h", "M", "mean_abs_dH", "stderr_dH",
  "inv_per_step", "inv_per_traj", "wall_s", "acceptance",
] as const;

export interface SweepRow {
  scheme: string;
  h: number;
  m: number;
  meanAbsDh: number;
  stderrDh: number;
  invPerStep: number;
  invPerTraj: number;
  wallS: number;
  acceptance: number;
}

export class CsvSchemaError extends Error {}

export interface ParsedSweep {
  rows: SweepRow[];
  /** rows dropped because a numeric field was NaN (1-based line numbers) */
  skipped: { line: number; scheme: string; h: string }[];
}

export function parseSweepCsv(text: string, source = "<csv>"): ParsedSweep {
  const lines = text.split(/\r?\n/);
  const dataLines: { line: number; raw: string }[] = [];
  for (let i = 0; i < lines.length; i++) {
    const raw = (lines[i] ?? "").trim();
    if (raw.length === 0 || raw.startsWith("#")) continue;
    dataLines.push({ line: i + 1, raw });
  }
  if (dataLines.length === 0) {
    throw new CsvSchemaError(`${source}: empty CSV (no header)`);
  }
  const header = dataLines[0]!.raw.split(",");
  if (header.length !== CSV_COLUMNS.length ||
      !CSV_COLUMNS.every((c, i) => header[i] === c)) {
    throw new CsvSchemaError(
      `${source}: bad header, expected '${CSV_COLUMNS.join(",")}', got '${dataLines[0]!.raw}'`);
  }
  const rows: SweepRow[] = [];
  const skipped: ParsedSweep["skipped"] = [];
  for (const { line, raw } of dataLines.slice(1)) {
    const parts = raw.split(",");
    if (parts.length !== CSV_COLUMNS.length) {
      throw new CsvSchemaError(
        `${source}:${line}: expected ${CSV_COLUMNS.length} columns, got ${parts.length}`);
    }
    const scheme = parts[0]!;
    const nums = parts.slice(1).map(Number);
    if (nums.some((v) => Number.isNaN(v))) {
      skipped.push({ line, scheme, h: parts[1]! });
      continue;
    }
    rows.push({
      scheme,
      h: nums[0]!,
      m: nums[1]!,
      meanAbsDh: nums[2]!,
      stderrDh: nums[3]!,
      invPerStep: nums[4]!,
      invPerTraj: nums[5]!,
      wallS: nums[6]!,
      acceptance: nums[7]!,
    });
  }
  if (rows.length === 0) {
    throw new CsvSchemaError(`${source}: no usable data rows`);
  }
  return { rows, skipped };
}

/** Group rows by scheme, each group sorted by the given key. */
export function groupByScheme(
  rows: SweepRow[], sortKey: keyof SweepRow & string,
): Map<string, SweepRow[]> {
  const groups = new Map<string, SweepRow[]>();
  for (const row of rows) {
    const list = groups.get(row.scheme) ?? [];
    list.push(row);
    groups.set(row.scheme, list);
  }
  for (const list of groups.values()) {
    list.sort((a, b) => (a[sortKey] as number) - (b[sortKey] as number));
  }
  return groups;
}
