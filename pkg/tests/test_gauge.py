import numpy as np

from schwinger.gauge import (fg_gauge_gauge, gauge_action, gauge_force,
                             gauge_force_raw, gauge_hessian_dot,
                             oriented_plaquettes, plaquettes,
                             plaquette_stencil)
from conftest import BETA
from oracles import fd_gradient, fg_oracle


def explicit_plaquette(q, x, t):
    """Direct 4-factor complex product, no vectorization."""
    _, L, T = q.shape
    u = np.exp(1j * q)
    return (u[0, x, t] * u[1, (x + 1) % L, t]
            * np.conj(u[0, x, (t + 1) % T]) * np.conj(u[1, x, t]))


def test_plaquette_identity_field(geom4):
    q = np.zeros(geom4.links_shape())
    assert np.allclose(plaquettes(q), 1.0)


def test_plaquette_single_link(geom4):
    q = np.zeros(geom4.links_shape())
    q[0, 1, 2] = 0.8
    p = plaquettes(q)
    assert np.isclose(p[1, 2], np.exp(0.8j))


def test_plaquette_matches_explicit_product(q4):
    p = plaquettes(q4)
    for x in range(4):
        for t in range(4):
            assert abs(p[x, t] - explicit_plaquette(q4, x, t)) < 1e-14
    assert np.allclose(np.abs(p), 1.0, atol=1e-14)


def test_gauge_action_values(q4, geom4):
    assert gauge_action(np.zeros(geom4.links_shape()), BETA) == 0.0
    # a single excited link enters two plaquettes, once direct, once daggered
    q = np.zeros(geom4.links_shape())
    q[0, 2, 1] = 0.6
    assert np.isclose(gauge_action(q, BETA), 2 * BETA * (1 - np.cos(0.6)))
    s = gauge_action(q4, BETA)
    oracle = BETA * sum(1 - explicit_plaquette(q4, x, t).real
                        for x in range(4) for t in range(4))
    assert abs(s - oracle) < 1e-13 * max(1.0, abs(oracle))
    assert 0.0 <= s <= 2 * BETA * geom4.volume


def test_gauge_force_trivial_and_single_link(geom4):
    q = np.zeros(geom4.links_shape())
    assert np.all(gauge_force(q, BETA) == 0.0)
    q[0, 1, 1] = 0.5
    f = gauge_force(q, BETA)
    assert np.isclose(f[0, 1, 1], 2 * BETA * np.sin(0.5))
    # links not sharing a plaquette with the excited one feel nothing
    assert abs(f[0, 3, 3]) < 1e-15


def test_gauge_force_matches_fd(q4):
    f = gauge_force(q4, BETA)
    ref = fd_gradient(lambda x: gauge_action(x, BETA), q4, eps=1e-5)
    assert np.max(np.abs(f - ref)) < 1e-8


def test_gauge_force_beta_factorization(q4):
    assert np.allclose(gauge_force(q4, 1.7), 1.7 * gauge_force_raw(q4))


def test_oriented_plaquettes_conjugate_pair(q4):
    p = plaquettes(q4)
    o = oriented_plaquettes(q4)
    assert np.allclose(o[0], p)
    assert np.allclose(o[1], p.conj())


def test_plaquette_stencil_offsets(q4):
    """Each stencil entry is a 4-link product at the documented offset."""
    stencil = plaquette_stencil(q4)
    assert np.allclose(stencil[0], oriented_plaquettes(q4))
    offsets = {1: (0, -1), 2: (1, 0), 3: (0, 1), 4: (-1, 0),
               5: (-1, -1), 6: (0, -2), 7: (1, -1)}
    o = oriented_plaquettes(q4)
    for i, (dmu, dnu) in offsets.items():
        for mu in (0, 1):
            nu = 1 - mu
            shift = [0, 0]
            shift[mu], shift[nu] = dmu, dnu
            expect = np.roll(o[mu], (-shift[0], -shift[1]), axis=(0, 1))
            assert np.allclose(stencil[i, mu], expect), (i, mu)
    q0 = np.zeros_like(q4)
    assert np.allclose(plaquette_stencil(q0), 1.0)


def test_fg_gauge_gauge_trivial_and_scaling(q4, geom4):
    assert np.all(fg_gauge_gauge(np.zeros(geom4.links_shape()), BETA) == 0.0)
    assert np.allclose(fg_gauge_gauge(q4, 2 * BETA), 4.0 * fg_gauge_gauge(q4, BETA))


def test_fg_gauge_gauge_matches_oracle(q4):
    got = fg_gauge_gauge(q4, BETA)
    ref = fg_oracle(lambda x: gauge_force(x, BETA), q4, gauge_force(q4, BETA), eps=1e-5)
    assert np.max(np.abs(got - ref)) < 1e-6


def test_fg_gauge_gauge_equals_generic_contraction(q4):
    generic = gauge_hessian_dot(q4, BETA, gauge_force(q4, BETA))
    assert np.max(np.abs(fg_gauge_gauge(q4, BETA) - generic)) < 1e-12


def test_gauge_hessian_dot_linearity(q4, rng):
    w1 = rng.standard_normal(q4.shape)
    w2 = rng.standard_normal(q4.shape)
    lhs = gauge_hessian_dot(q4, BETA, w1 + w2)
    rhs = gauge_hessian_dot(q4, BETA, w1) + gauge_hessian_dot(q4, BETA, w2)
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    assert np.all(gauge_hessian_dot(q4, BETA, np.zeros_like(q4)) == 0.0)


def test_gauge_hessian_dot_matches_oracle(q4, rng):
    w = rng.standard_normal(q4.shape)
    got = gauge_hessian_dot(q4, BETA, w)
    ref = fg_oracle(lambda x: gauge_force(x, BETA), q4, w, eps=1e-5)
    assert np.max(np.abs(got - ref)) < 1e-6


def test_hessian_symmetry(q4, rng):
    """D_v(force) . w == D_w(force) . v for the gauge action."""
    v = rng.standard_normal(q4.shape)
    w = rng.standard_normal(q4.shape)
    eps = 1e-5
    dv = (gauge_force(q4 + eps * v, BETA) - gauge_force(q4 - eps * v, BETA)) / (2 * eps)
    dw = (gauge_force(q4 + eps * w, BETA) - gauge_force(q4 - eps * w, BETA)) / (2 * eps)
    assert abs(np.sum(dv * w) - np.sum(dw * v)) < 1e-6


def test_gauge_invariance(q4, rng, geom4):
    alpha = rng.standard_normal((geom4.L, geom4.T))
    q_star = q4.copy()
    q_star[0] += alpha - np.roll(alpha, -1, axis=0)
    q_star[1] += alpha - np.roll(alpha, -1, axis=1)
    assert abs(gauge_action(q_star, BETA) - gauge_action(q4, BETA)) < 1e-12


def test_translation_covariance(q4):
    shifted = np.roll(q4, (1, 1), axis=(-2, -1))
    for fn in (lambda x: gauge_force(x, BETA), lambda x: fg_gauge_gauge(x, BETA)):
        assert np.array_equal(fn(shifted), np.roll(fn(q4), (1, 1), axis=(-2, -1)))


def test_batched_matches_loop(q4, rng):
    batch = np.stack([q4, 0.5 * q4, rng.standard_normal(q4.shape)])
    assert np.allclose(gauge_action(batch, BETA),
                       [gauge_action(b, BETA) for b in batch])
    bf = gauge_force(batch, BETA)
    for k in range(3):
        assert np.allclose(bf[k], gauge_force(batch[k], BETA))
