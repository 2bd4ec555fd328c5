"""The HMC update cycle: heatbaths, trajectory integration, Metropolis step,
thermalization, and the fixed-start |dH| measurement protocol."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, replace

import numpy as np

from .config import HmcConfig
from .fermion import (InversionCounter, WilsonDirac, fermion_action,
                      pseudofermion_heatbath)
from .gauge import avg_plaquette, gauge_action
from .integrators import (IntegratorSpec, MdState, integrate_trajectory)
from .lattice import LatticeGeom, cold_start, kinetic_energy, sample_momenta

log = logging.getLogger("schwinger")


@dataclass(frozen=True)
class TrajectoryStats:
    dh: float
    accepted: bool
    inversions: int
    n_steps: int
    wall_time: float


@dataclass(frozen=True)
class DhMeasurement:
    """|dH| statistics over independent trajectories from one configuration."""

    dh: np.ndarray
    mean_abs: float
    stderr: float
    acceptance: float        # estimator mean(min(1, exp(-dH))), no draws
    inversions_per_traj: int
    n_steps: int
    wall_per_traj: float


def hamiltonian(state: MdState):
    """H = (1/2) sum p^2 + S_G + S_F; costs one normal solve."""
    kin = kinetic_energy(state.p)
    s_g = gauge_action(state.q, state.beta)
    op = WilsonDirac(state.q, state.m0)
    s_f = fermion_action(op, state.eta, state.tol, counter=state.counter,
                         exact=state.exact_solves)
    return kin + s_g + s_f


def metropolis(dh: float, rng: np.random.Generator) -> bool:
    """Accept with probability min(1, exp(-dH)); draws only when dH > 0."""
    if not np.isfinite(dh):
        raise ValueError(f"non-finite energy change {dh}")
    if dh <= 0.0:
        return True
    return rng.random() < np.exp(-dh)


def _spec_of(config: HmcConfig) -> IntegratorSpec:
    return IntegratorSpec(scheme=config.scheme, h=config.h,
                          micro_per_call=config.micro_per_call,
                          micro_ratio=config.micro_ratio)


def hmc_update(q: np.ndarray, config: HmcConfig, rng: np.random.Generator,
               counter: InversionCounter | None = None):
    """One full HMC update; returns (new links, stats).

    On rejection the original array is handed back untouched. dH is recorded
    either way. The wall time covers the trajectory integration only.
    """
    counter = counter if counter is not None else InversionCounter()
    geom = LatticeGeom(config.L, config.T)
    p = sample_momenta(rng, geom)
    if config.quenched:
        eta = np.zeros(geom.spinor_shape(), dtype=np.complex128)
    else:
        eta = pseudofermion_heatbath(WilsonDirac(q, config.m0), rng)
    state = MdState(q=q.copy(), p=p, eta=eta, beta=config.beta, m0=config.m0,
                    tol=config.cg_tol, counter=counter)
    h_start = hamiltonian(state)
    t0 = time.perf_counter()
    result = integrate_trajectory(state, _spec_of(config), config.tau)
    wall = time.perf_counter() - t0
    h_end = hamiltonian(state)
    dh = float(h_end - h_start)
    accepted = metropolis(dh, rng)
    stats = TrajectoryStats(dh=dh, accepted=accepted,
                            inversions=result.inversions,
                            n_steps=result.n_steps, wall_time=wall)
    return (state.q if accepted else q), stats


def measure_dh(q0: np.ndarray, config: HmcConfig, rng: np.random.Generator,
               n_samples: int | None = None) -> DhMeasurement:
    """Mean |dH| over independent momentum/pseudofermion draws from a fixed
    starting configuration; no Metropolis step.

    The samples evolve as one batched state, so the per-sample inversion
    count is identical by construction and results are deterministic in
    (config, seed).
    """
    n = n_samples if n_samples is not None else config.n_samples
    geom = LatticeGeom(config.L, config.T)
    counter = InversionCounter()
    p = sample_momenta(rng, geom, batch=n)
    if config.quenched:
        eta = np.zeros(geom.spinor_shape(n), dtype=np.complex128)
    else:
        eta = pseudofermion_heatbath(WilsonDirac(q0, config.m0), rng, batch=n)
    q = np.broadcast_to(q0, (n,) + q0.shape).copy()
    state = MdState(q=q, p=p, eta=eta, beta=config.beta, m0=config.m0,
                    tol=config.cg_tol, counter=counter)
    h_start = hamiltonian(state)
    t0 = time.perf_counter()
    result = integrate_trajectory(state, _spec_of(config), config.tau)
    wall = time.perf_counter() - t0
    h_end = hamiltonian(state)
    dh = np.asarray(h_end - h_start, dtype=np.float64)
    mean_abs = float(np.mean(np.abs(dh)))
    stderr = float(np.std(np.abs(dh), ddof=1) / np.sqrt(n)) if n > 1 else 0.0
    acceptance = float(np.mean(np.minimum(1.0, np.exp(-dh))))
    return DhMeasurement(dh=dh, mean_abs=mean_abs, stderr=stderr,
                         acceptance=acceptance,
                         inversions_per_traj=result.inversions,
                         n_steps=result.n_steps, wall_per_traj=wall / n)


def thermalize(config: HmcConfig, rng: np.random.Generator):
    """Bring a cold start to equilibrium with n_thermalize leapfrog updates.

    The step size anneals downward whenever a block of updates falls under
    80% acceptance, so the routine is safe on any lattice size; the schedule
    is deterministic for a fixed seed. Returns (links, plaquette history).
    """
    geom = LatticeGeom(config.L, config.T)
    q = cold_start(geom)
    therm_cfg = replace(config, scheme="leapfrog", h=min(config.h, 0.1),
                        micro_per_call=None)
    block, accepted_in_block = 20, 0
    history = []
    for i in range(config.n_thermalize):
        q, stats = hmc_update(q, therm_cfg, rng)
        accepted_in_block += stats.accepted
        history.append(float(avg_plaquette(q)))
        if (i + 1) % block == 0:
            if accepted_in_block < 0.8 * block:
                therm_cfg = replace(therm_cfg, h=therm_cfg.h * 0.7)
                log.info("thermalize: lowering step size to %.4g", therm_cfg.h)
            accepted_in_block = 0
    return q, history
