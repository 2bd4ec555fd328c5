"""Pure-gauge sector: plaquettes, Wilson action, force and the two
force-gradient pieces whose Hessian comes from the gauge action.

The force-gradient pieces computed here are Hessian contractions

    2 * sum_{m,nu} w(m,nu) * d^2 S_G / (dq_nu(m) dq_mu(n)),

evaluated in closed form from translated plaquettes. With the gauge force as
weight this is the gauge-gauge piece; with the fermion force it is the
fermion-gauge piece. Both closed forms are validated against directional
finite differences of the gauge force in the test suite.
"""

from __future__ import annotations

import numpy as np

from .lattice import LINK_T, LINK_X


def plaq_angles(q: np.ndarray) -> np.ndarray:
    """Plaquette angle q0(n) + q1(n+x) - q0(n+t) - q1(n) per site."""
    q0, q1 = q[..., 0, :, :], q[..., 1, :, :]
    return (q0 + np.roll(q1, -1, axis=-2) - np.roll(q0, -1, axis=-1) - q1)


def plaquettes(q: np.ndarray) -> np.ndarray:
    """Complex plaquette values exp(i * plaq_angle); unit modulus by construction."""
    return np.exp(1j * plaq_angles(q))


def avg_plaquette(q: np.ndarray) -> np.ndarray | float:
    """Mean Re(P) over the lattice, the standard scalar observable."""
    return np.mean(np.cos(plaq_angles(q)), axis=(-2, -1))


def gauge_action(q: np.ndarray, beta: float) -> np.ndarray | float:
    """S_G = beta * sum_n (1 - Re P(n)). Non-negative, at most 2*beta*V."""
    theta = plaq_angles(q)
    return beta * np.sum(1.0 - np.cos(theta), axis=(-2, -1))


def gauge_force_raw(q: np.ndarray) -> np.ndarray:
    """dS_G/dq without the beta factor (the paper-style vector g).

    Per direction mu this is Im(P1(n) - P1(n - nu)) of the mu-oriented
    plaquette, which for the fixed orientation above means a relative sign
    between the two directions.
    """
    s = np.sin(plaq_angles(q))
    g = np.empty_like(q)
    g[..., 0, :, :] = s - np.roll(s, 1, axis=-1)     # P(n) - P(n - t)
    g[..., 1, :, :] = np.roll(s, 1, axis=-2) - s     # P(n - x) - P(n)
    return g


def gauge_force(q: np.ndarray, beta: float) -> np.ndarray:
    """Gauge force beta*g(n, mu) = dS_G/dq_mu(n)."""
    return beta * gauge_force_raw(q)


def oriented_plaquettes(q: np.ndarray) -> np.ndarray:
    """Per-direction plaquettes P1(n, mu): the plaquette traversed starting
    along mu, which is the fixed-orientation plaquette for mu=0 and its
    conjugate for mu=1. Shape (..., 2, L, T)."""
    p = plaquettes(q)
    return np.stack([p, p.conj()], axis=-3)


def plaquette_stencil(q: np.ndarray) -> np.ndarray:
    """The eight translated plaquettes P1..P8 entering the gauge-Hessian
    closed forms, shape (8, ..., 2, L, T); P_i[mu] is attached to link
    (n, mu) with nu the other direction.

    All eight are translates of the mu-oriented plaquette:
    P2 = P1(n-nu), P3 = P1(n+mu), P4 = P1(n+nu), P5 = P1(n-mu),
    P6 = P1(n-mu-nu), P7 = P1(n-2nu), P8 = P1(n-nu+mu).
    """
    p1 = oriented_plaquettes(q)
    out = np.empty((8,) + p1.shape, dtype=p1.dtype)
    for mu in range(2):
        # site axes of the sliced (..., L, T) arrays: x at -2, t at -1
        ax_mu = (LINK_X, LINK_T)[mu]
        ax_nu = (LINK_X, LINK_T)[1 - mu]
        base = p1[..., mu, :, :]
        out[0, ..., mu, :, :] = base
        out[1, ..., mu, :, :] = np.roll(base, 1, axis=ax_nu)
        out[2, ..., mu, :, :] = np.roll(base, -1, axis=ax_mu)
        out[3, ..., mu, :, :] = np.roll(base, -1, axis=ax_nu)
        out[4, ..., mu, :, :] = np.roll(base, 1, axis=ax_mu)
        out[5, ..., mu, :, :] = np.roll(base, (1, 1), axis=(ax_mu, ax_nu))
        out[6, ..., mu, :, :] = np.roll(base, 2, axis=ax_nu)
        out[7, ..., mu, :, :] = np.roll(base, (-1, 1), axis=(ax_mu, ax_nu))
    return out


def fg_gauge_gauge(q: np.ndarray, beta: float) -> np.ndarray:
    """Gauge-gauge force-gradient piece, closed plaquette form:

    2*beta^2 * [Im(4P1 - P2 - P3 - P4 - P5) Re P1
                - Im(4P2 - P1 - P6 - P7 - P8) Re P2]   per link.
    """
    p = plaquette_stencil(q)
    p1, p2, p3, p4, p5, p6, p7, p8 = p
    out = (np.imag(4.0 * p1 - p2 - p3 - p4 - p5) * np.real(p1)
           - np.imag(4.0 * p2 - p1 - p6 - p7 - p8) * np.real(p2))
    return 2.0 * beta * beta * out


def gauge_hessian_dot(q: np.ndarray, beta: float, w: np.ndarray) -> np.ndarray:
    """Contraction 2 * sum w * Hess(S_G) for an arbitrary link field w.

    Closed form per link (nu the other direction):

    2*beta * [(w(n,mu) + w(n+mu,nu) - w(n+nu,mu) - w(n,nu)) Re P1
              + (w(n,mu) - w(n+mu-nu,nu) - w(n-nu,mu) + w(n-nu,nu)) Re P2].

    Linear in w; with w = fermion force this is the fermion-gauge piece.
    """
    if q.shape[-3:] != w.shape[-3:]:
        raise ValueError(f"shape mismatch: links {q.shape} vs weight {w.shape}")
    re_p = np.cos(plaq_angles(q))          # Re P is orientation-independent
    out = np.empty(np.broadcast_shapes(q.shape, w.shape), dtype=np.float64)
    for mu in range(2):
        nu = 1 - mu
        ax_mu = (LINK_X, LINK_T)[mu]
        ax_nu = (LINK_X, LINK_T)[nu]
        wm, wn = w[..., mu, :, :], w[..., nu, :, :]
        re_p1 = re_p
        re_p2 = np.roll(re_p, 1, axis=ax_nu)
        t1 = (wm + np.roll(wn, -1, axis=ax_mu)
              - np.roll(wm, -1, axis=ax_nu) - wn)
        t2 = (wm - np.roll(wn, (-1, 1), axis=(ax_mu, ax_nu))
              - np.roll(wm, 1, axis=ax_nu) + np.roll(wn, 1, axis=ax_nu))
        out[..., mu, :, :] = 2.0 * beta * (t1 * re_p1 + t2 * re_p2)
    return out


def fg_fermion_gauge(q: np.ndarray, beta: float, fermion_force: np.ndarray) -> np.ndarray:
    """Fermion-gauge force-gradient piece: gauge Hessian contracted with the
    fermion force."""
    return gauge_hessian_dot(q, beta, fermion_force)
