import sys
from pathlib import Path

import pytest

import schwinger as sw

sys.path.insert(0, str(Path(__file__).parent))

FIXTURES = Path(__file__).parent / "fixtures"

BETA = 1.0
M0 = -0.231367
TOL = 1e-12


@pytest.fixture
def rng():
    return sw.make_rng(20240401, 0)


@pytest.fixture
def geom4():
    return sw.LatticeGeom(4, 4)


@pytest.fixture
def q4(rng, geom4):
    """Mild random 4x4 configuration (thermalized-like amplitude)."""
    return 0.3 * rng.standard_normal(geom4.links_shape())


@pytest.fixture
def eta4(rng, geom4):
    """Small random pseudofermion. The light bare mass makes (D^dag D)^{-1}
    strongly amplifying, so a unit-scale source would push the force-gradient
    fields to O(10^3) and drown the absolute finite-difference tolerances."""
    shape = geom4.spinor_shape()
    return 0.1 * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@pytest.fixture(scope="session")
def therm8():
    """Committed thermalized 8x8 configuration (beta=1, m0=-0.231367)."""
    q, meta = sw.load_gauge_config(FIXTURES / "therm_8x8.cfg")
    assert meta["beta"] == BETA and meta["m0"] == M0
    return q


def random_spinor(rng, geom, scale=1.0):
    shape = geom.spinor_shape()
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
