"""Experiment harness: thermalization, |dH| step-size sweeps, cost-vs-accuracy
benchmarks and acceptance-rate tuning, all emitting one fixed CSV schema.

CSV columns: scheme,h,M,mean_abs_dH,stderr_dH,inv_per_step,inv_per_traj,wall_s,acceptance
Lines starting with '#' are comments (slope footers, failure notes).
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import sys
from dataclasses import asdict, replace

import click
import numpy as np

from .config import HmcConfig, SweepPlan, desk_scale, format_config, parse_experiment_file
from .fermion import SolverError
from .hmc import measure_dh, thermalize
from .integrators import INVERSIONS_PER_STEP, IntegratorSpec
from .lattice import load_gauge_config, make_rng, save_gauge_config

log = logging.getLogger("schwinger")

CSV_HEADER = ["scheme", "h", "M", "mean_abs_dH", "stderr_dH",
              "inv_per_step", "inv_per_traj", "wall_s", "acceptance"]


def _load_setup(config_path, seed, paper_scale, micro_ratio):
    if config_path is not None:
        with open(config_path, "r", encoding="ascii") as fh:
            config, plan = parse_experiment_file(fh.read())
    else:
        config, plan = HmcConfig(), SweepPlan()
        if not paper_scale:
            config = desk_scale(config)
    if paper_scale:
        config = replace(config, L=32, T=32, n_samples=200)
    if seed is not None:
        config = replace(config, seed=seed)
    if micro_ratio is not None:
        config = replace(config, micro_ratio=micro_ratio)
    return config, plan


def _apply_gauge_meta(config: HmcConfig, meta: dict) -> HmcConfig:
    for key in ("L", "T", "beta", "m0"):
        if getattr(config, key) != meta[key]:
            log.warning("config %s=%r overridden by gauge file value %r",
                        key, getattr(config, key), meta[key])
    return replace(config, L=meta["L"], T=meta["T"], beta=meta["beta"], m0=meta["m0"])


def _resolved_m(config: HmcConfig, scheme: str, h: float) -> int:
    spec = IntegratorSpec(scheme, h, micro_per_call=config.micro_per_call,
                          micro_ratio=config.micro_ratio)
    return spec.micro_steps() if scheme.startswith(("nested", "adapted")) else 0


def _measure_cell(q0, config, scheme, h, stream):
    cfg = replace(config, scheme=scheme, h=h)
    rng = make_rng(cfg.seed, stream)
    return measure_dh(q0, cfg, rng)


class CsvSink:
    """Incremental CSV writer: every row and footer is flushed immediately so
    partial results survive a mid-run crash. Footers go out as '#' comments
    and are echoed to stderr."""

    def __init__(self, path):
        self._path = path
        self._fh = open(path, "w", encoding="ascii") if path else sys.stdout
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(CSV_HEADER)
        self._fh.flush()

    def row(self, values):
        self._writer.writerow(values)
        self._fh.flush()

    def footer(self, line):
        self._fh.write(f"# {line}\n")
        self._fh.flush()
        click.echo(line, err=True)

    def close(self):
        if self._path:
            self._fh.close()


def _fit_slope(cells):
    """Least-squares slope of log mean|dH| vs log h over valid cells."""
    pts = [(h, m) for h, m in cells if np.isfinite(m) and m > 0]
    if len(pts) < 2:
        return float("nan")
    hs, ms = zip(*pts)
    return float(np.polyfit(np.log(hs), np.log(ms), 1)[0])


def _sweep(config, plan, gauge_path, sink):
    """Measure every (scheme, h) cell, writing rows as they finish. Solver
    failures become NaN rows plus a footer note and the run continues."""
    if gauge_path is None:
        raise click.ClickException("no gauge_config set; run `schwinger thermalize` first")
    q0, meta = load_gauge_config(gauge_path)
    config = _apply_gauge_meta(config, meta)
    cells = {s: [] for s in plan.schemes}
    for idx, scheme in enumerate(plan.schemes):
        for jdx, h in enumerate(plan.h_grid):
            stream = idx * 1000 + jdx
            m_col = _resolved_m(config, scheme, h)
            try:
                m = _measure_cell(q0, config, scheme, h, stream)
            except SolverError as exc:
                log.error("cell (%s, h=%g) failed: %s", scheme, h, exc)
                sink.row([scheme, repr(h), m_col, "nan", "nan",
                          INVERSIONS_PER_STEP[scheme], "nan", "nan", "nan"])
                sink.footer(f"failed,{scheme},{h!r},{exc}")
                continue
            cells[scheme].append((h, m.mean_abs, m.inversions_per_traj))
            sink.row([scheme, repr(h), m_col, f"{m.mean_abs:.9e}",
                      f"{m.stderr:.3e}", INVERSIONS_PER_STEP[scheme],
                      m.inversions_per_traj, f"{m.wall_per_traj:.4f}",
                      f"{m.acceptance:.4f}"])
    for scheme in plan.schemes:
        sink.footer(f"slope,{scheme},"
                    f"{_fit_slope([(h, m) for h, m, _ in cells[scheme]]):.3f}")
    return cells


@click.group()
@click.option("--verbose", is_flag=True, help="log at INFO level")
def main(verbose):
    """Schwinger-model HMC experiments."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")


_common = [
    click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                 help="experiment file (flat key = value)"),
    click.option("--seed", type=int, default=None, help="override RNG seed"),
    click.option("--paper-scale", is_flag=True,
                 help="32x32 lattice, 200 samples (hours-scale runs)"),
    click.option("--micro-ratio", type=float, default=None,
                 help="micro step this many times smaller than h"),
    click.option("--out", "out_path", type=click.Path(), default=None),
]


def _with_common(fn):
    for opt in reversed(_common):
        fn = opt(fn)
    return fn


@main.command("thermalize")
@_with_common
def thermalize_cmd(config_path, seed, paper_scale, micro_ratio, out_path):
    """Generate and persist a thermalized gauge configuration."""
    config, _ = _load_setup(config_path, seed, paper_scale, micro_ratio)
    out_path = out_path or f"therm_{config.L}x{config.T}_seed{config.seed}.cfg"
    rng = make_rng(config.seed, 0)
    q, history = thermalize(config, rng)
    save_gauge_config(out_path, q, config.beta, config.m0, config.seed)
    sidecar = {
        "config": asdict(config),
        "config_hash": hashlib.sha256(format_config(config).encode()).hexdigest(),
        "seed": config.seed,
        "plaquette_history": history,
    }
    with open(out_path + ".json", "w", encoding="ascii") as fh:
        json.dump(sidecar, fh, indent=1)
    click.echo(f"wrote {out_path} (final plaquette {history[-1]:.5f})")


@main.command("sweep-dh")
@_with_common
def sweep_dh(config_path, seed, paper_scale, micro_ratio, out_path):
    """Mean |dH| versus step size for each scheme; CSV plus slope footer."""
    config, plan = _load_setup(config_path, seed, paper_scale, micro_ratio)
    sink = CsvSink(out_path)
    try:
        _sweep(config, plan, plan.gauge_config, sink)
    finally:
        sink.close()


@main.command("bench-cost")
@_with_common
def bench_cost(config_path, seed, paper_scale, micro_ratio, out_path):
    """Cost versus achieved accuracy; same cells as sweep-dh plus a ranking."""
    config, plan = _load_setup(config_path, seed, paper_scale, micro_ratio)
    sink = CsvSink(out_path)
    try:
        cells = _sweep(config, plan, plan.gauge_config, sink)
        # rank schemes by inversion cost interpolated at fixed accuracy targets
        for target in (1e-2, 1e-3, 1e-4):
            ranking = []
            for scheme, pts in cells.items():
                pts = sorted((m, inv) for _, m, inv in pts)
                if len(pts) >= 2 and pts[0][0] <= target <= pts[-1][0]:
                    accs = np.array([p[0] for p in pts])
                    invs = np.array([p[1] for p in pts], dtype=float)
                    cost = np.exp(np.interp(np.log(target), np.log(accs), np.log(invs)))
                    ranking.append((cost, scheme))
            if ranking:
                ranking.sort()
                pretty = ", ".join(f"{s} ({c:.0f})" for c, s in ranking)
                sink.footer(f"rank at |dH|={target:g}: {pretty}")
    finally:
        sink.close()


@main.command("tune-acceptance")
@_with_common
@click.option("--target", type=float, default=0.9, help="target acceptance rate")
def tune_acceptance(config_path, seed, paper_scale, micro_ratio, out_path, target):
    """Bisect the step size per scheme until acceptance matches the target."""
    config, plan = _load_setup(config_path, seed, paper_scale, micro_ratio)
    if plan.gauge_config is None:
        raise click.ClickException("no gauge_config set; run `schwinger thermalize` first")
    q0, meta = load_gauge_config(plan.gauge_config)
    config = _apply_gauge_meta(config, meta)
    sink = CsvSink(out_path)
    try:
        for idx, scheme in enumerate(plan.schemes):
            # common random numbers across h evaluations make acceptance(h)
            # deterministic and monotone enough to bisect
            def acc(h):
                return _measure_cell(q0, config, scheme, h, stream=idx)

            lo, hi = plan.h_min, plan.h_max
            m_lo, m_hi = acc(lo), acc(hi)
            if not (m_lo.acceptance >= target >= m_hi.acceptance):
                sink.footer(f"no-bracket,{scheme},acc({lo!r})={m_lo.acceptance:.3f},"
                            f"acc({hi!r})={m_hi.acceptance:.3f}")
                continue
            h_star, m_star = lo, m_lo
            for _ in range(30):
                mid = 0.5 * (lo + hi)
                m_mid = acc(mid)
                h_star, m_star = mid, m_mid
                if abs(m_mid.acceptance - target) <= 0.02:
                    break
                if m_mid.acceptance > target:
                    lo = mid
                else:
                    hi = mid
            sink.row([scheme, f"{h_star:.6f}", _resolved_m(config, scheme, h_star),
                      f"{m_star.mean_abs:.9e}", f"{m_star.stderr:.3e}",
                      INVERSIONS_PER_STEP[scheme], m_star.inversions_per_traj,
                      f"{m_star.wall_per_traj:.4f}", f"{m_star.acceptance:.4f}"])
    finally:
        sink.close()


if __name__ == "__main__":
    main()
