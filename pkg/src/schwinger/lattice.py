"""Periodic 2D lattice geometry, field containers and elementary updates.

Conventions used throughout the package:

* link-type fields (gauge angles, momenta, forces) are float64 arrays with
  shape ``(..., 2, L, T)`` -- direction index first, then the x and t site
  axes; any leading axes are an independent-sample batch,
* spinor fields are complex128 arrays with shape ``(..., L, T, 2)``,
* direction 0 is space (x), direction 1 is time (t), both periodic,
* gauge links are stored as angles; the group element is ``exp(i*q)`` and the
  exponential update becomes exact angle addition, so the unit-modulus
  constraint can never drift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

# site axes of a link-type field / a spinor field, as negative offsets
LINK_X, LINK_T = -2, -1
SPIN_X, SPIN_T = -3, -2


def wrap_angles(q: np.ndarray) -> np.ndarray:
    """Reduce angles to the canonical branch [-pi, pi)."""
    return (q + np.pi) % TWO_PI - np.pi


@dataclass(frozen=True)
class LatticeGeom:
    """Lattice extents. ``L`` sites in space, ``T`` sites in time."""

    L: int
    T: int

    def __post_init__(self):
        if self.L < 2 or self.T < 2:
            raise ValueError(f"hopping stencils need L, T >= 2, got {self.L}x{self.T}")

    @property
    def volume(self) -> int:
        return self.L * self.T

    @property
    def n_links(self) -> int:
        return 2 * self.volume

    def site_index(self, x: int, t: int) -> int:
        """Linear site index, t-major: consecutive indices walk in x first."""
        return t * self.L + x

    def site_coords(self, idx: int) -> tuple[int, int]:
        return idx % self.L, idx // self.L

    def shift_site(self, site: tuple[int, int], mu: int, s: int) -> tuple[int, int]:
        """Periodic neighbor of ``site`` displaced by ``s`` steps along ``mu``."""
        x, t = site
        if mu == 0:
            return (x + s) % self.L, t
        if mu == 1:
            return x, (t + s) % self.T
        raise ValueError(f"direction must be 0 or 1, got {mu}")

    def links_shape(self, batch: int | None = None) -> tuple[int, ...]:
        shape = (2, self.L, self.T)
        return shape if batch is None else (batch,) + shape

    def spinor_shape(self, batch: int | None = None) -> tuple[int, ...]:
        shape = (self.L, self.T, 2)
        return shape if batch is None else (batch,) + shape


def geom_of(field: np.ndarray) -> LatticeGeom:
    """Geometry of a link-type field array."""
    return LatticeGeom(field.shape[-2], field.shape[-1])


# ---------------------------------------------------------------------------
# random stream handling
# ---------------------------------------------------------------------------

def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; identical (seed, stream) replays identically."""
    key = np.array([seed % 2**64, stream % 2**64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_momenta(rng: np.random.Generator, geom: LatticeGeom,
                   batch: int | None = None) -> np.ndarray:
    """Gaussian momentum heatbath, one standard-normal value per link."""
    return rng.standard_normal(geom.links_shape(batch))


def cold_start(geom: LatticeGeom, batch: int | None = None) -> np.ndarray:
    return np.zeros(geom.links_shape(batch))


def hot_start(rng: np.random.Generator, geom: LatticeGeom,
              batch: int | None = None) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, size=geom.links_shape(batch))


# ---------------------------------------------------------------------------
# elementary updates
# ---------------------------------------------------------------------------

def rotate_links(q: np.ndarray, p: np.ndarray, h: float) -> np.ndarray:
    """Group-exact link update q -> wrap(q + h*p).

    This realizes the exponential update of the links by the momenta for a
    time h; in the angle representation it is plain addition, re-wrapped so
    stored angles stay in [-pi, pi).
    """
    return wrap_angles(q + h * p)


def shift_momenta(p: np.ndarray, force: np.ndarray, h: float) -> np.ndarray:
    """Momentum kick p -> p - h*force."""
    if p.shape[-3:] != force.shape[-3:]:
        raise ValueError(f"shape mismatch: momenta {p.shape} vs force {force.shape}")
    return p - h * force


def kinetic_energy(p: np.ndarray) -> np.ndarray | float:
    """(1/2) sum p^2 over all links; batched inputs give one value per sample."""
    return 0.5 * np.sum(p * p, axis=(-3, -2, -1))


# ---------------------------------------------------------------------------
# gauge configuration files
# ---------------------------------------------------------------------------

_MAGIC = "schwinger-u1 v1"


def save_gauge_config(path, q: np.ndarray, beta: float, m0: float, seed: int) -> None:
    """Write a single configuration: ASCII header + 2V little-endian float64.

    Link order is site-major (t-major linear site index) with the two
    directions interleaved per site. Round-trips bit-exactly.
    """
    if q.ndim != 3:
        raise ValueError("config files hold a single (2, L, T) configuration")
    geom = geom_of(q)
    header = f"{_MAGIC} {geom.L} {geom.T} {beta!r} {m0!r} {seed}\n"
    # (2, L, T) -> (T, L, 2): site-major, direction fastest
    flat = np.ascontiguousarray(q.transpose(2, 1, 0), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(flat.tobytes())


def load_gauge_config(path) -> tuple[np.ndarray, dict]:
    """Read a configuration written by :func:`save_gauge_config`."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").strip()
        payload = fh.read()
    fields = header.split()
    if len(fields) != 7 or " ".join(fields[:2]) != _MAGIC:
        raise ValueError(f"{path}: not a schwinger-u1 v1 configuration (header {header!r})")
    L, T = int(fields[2]), int(fields[3])
    meta = {"L": L, "T": T, "beta": float(fields[4]), "m0": float(fields[5]),
            "seed": int(fields[6])}
    expected = 2 * L * T * 8
    if len(payload) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, got {len(payload)}")
    flat = np.frombuffer(payload, dtype="<f8").reshape(T, L, 2)
    return np.ascontiguousarray(flat.transpose(2, 1, 0)), meta
