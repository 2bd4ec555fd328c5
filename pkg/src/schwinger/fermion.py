"""Wilson-Dirac operator, conjugate-gradient inversion with inversion
accounting, pseudofermion action/force, and the force-gradient pieces whose
Hessian comes from the fermion action.

Spinor fields have shape (..., L, T, 2). The operator is

    (D psi)(n) = (2 + m0) psi(n)
                 - 1/2 sum_mu [ (1 - s_mu) U_mu(n)      psi(n + mu)
                              + (1 + s_mu) U*_mu(n - mu) psi(n - mu) ],

with s_1, s_2 the first two Pauli matrices and periodic boundaries in both
directions. The projectors (1 -+ s_mu) have rank one, so every hopping term
reduces to one scalar field per direction ("w" below) plus a fixed expansion
factor for the second spinor component.

Inversion accounting follows the convention that one application of an
inverse of D or of D^dag counts as one inversion: a normal-equation solve
represents two (it realizes both factors of (D^dag D)^{-1}), a lone D- or
D^dag-solve represents one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_TOL = 1e-12
DEFAULT_MAXITER = 10_000

SIGMA = (
    np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
)

# rank-1 projector data: (1 -+ sigma_mu) v = (w, e * w) with w a single
# complex combination of the spinor components
_EXPAND_MINUS = (-1.0, -1.0j)
_EXPAND_PLUS = (1.0, 1.0j)


def _w_minus(psi, mu):
    if mu == 0:
        return psi[..., 0] - psi[..., 1]
    return psi[..., 0] + 1.0j * psi[..., 1]


def _w_plus(psi, mu):
    if mu == 0:
        return psi[..., 0] + psi[..., 1]
    return psi[..., 0] - 1.0j * psi[..., 1]


def spinor_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray | complex:
    """Conjugate-symmetric inner product, summed over sites and spin."""
    return np.sum(np.conj(a) * b, axis=(-3, -2, -1))


def spinor_norm(a: np.ndarray) -> np.ndarray | float:
    return np.sqrt(np.real(spinor_dot(a, a)))


class SolverError(RuntimeError):
    """Raised when the Krylov solver hits its iteration cap."""

    def __init__(self, message, best_residual):
        super().__init__(f"{message} (best relative residual {best_residual:.3e})")
        self.best_residual = best_residual


class InversionCounter:
    """Monotonic tally of Dirac-operator inversions."""

    def __init__(self):
        self.count = 0

    def add(self, n: int):
        self.count += n


@dataclass
class SolveReport:
    iterations: int
    rel_residual: float
    inversions: int


class WilsonDirac:
    """Wilson-Dirac operator bound to one gauge configuration (batchable)."""

    def __init__(self, q: np.ndarray, m0: float):
        self.q = q
        self.m0 = m0
        self.U = np.exp(1j * q)
        self._dense = None

    @property
    def geom_shape(self):
        return self.q.shape[-2:]

    def _hops(self, psi, dagger):
        """The two per-direction hopping contributions as component pairs."""
        out0 = out1 = 0.0
        for mu in (0, 1):
            ax = (-2, -1)[mu]
            u = self.U[..., mu, :, :]
            if not dagger:
                wf, ef = _w_minus(psi, mu), _EXPAND_MINUS[mu]
                wb, eb = _w_plus(psi, mu), _EXPAND_PLUS[mu]
            else:
                wf, ef = _w_plus(psi, mu), _EXPAND_PLUS[mu]
                wb, eb = _w_minus(psi, mu), _EXPAND_MINUS[mu]
            hf = u * np.roll(wf, -1, axis=ax)
            hb = np.roll(np.conj(u) * wb, 1, axis=ax)
            out0 = out0 + hf + hb
            out1 = out1 + ef * hf + eb * hb
        return out0, out1

    def apply(self, psi: np.ndarray) -> np.ndarray:
        h0, h1 = self._hops(psi, dagger=False)
        return np.stack([(2.0 + self.m0) * psi[..., 0] - 0.5 * h0,
                         (2.0 + self.m0) * psi[..., 1] - 0.5 * h1], axis=-1)

    def apply_dag(self, psi: np.ndarray) -> np.ndarray:
        h0, h1 = self._hops(psi, dagger=True)
        return np.stack([(2.0 + self.m0) * psi[..., 0] - 0.5 * h0,
                         (2.0 + self.m0) * psi[..., 1] - 0.5 * h1], axis=-1)

    def normal(self, psi: np.ndarray) -> np.ndarray:
        """(D^dag D) psi."""
        return self.apply_dag(self.apply(psi))

    # -- dense fallback for tiny lattices ---------------------------------
    def dense_matrix(self) -> np.ndarray:
        """Materialize D as a (2V, 2V) matrix by applying it to basis vectors."""
        if self.q.ndim != 3:
            raise ValueError("dense path needs an unbatched configuration")
        L, T = self.geom_shape
        dim = 2 * L * T
        cols = np.empty((dim, dim), dtype=np.complex128)
        basis = np.zeros((L, T, 2), dtype=np.complex128)
        for k in range(dim):
            basis.flat[k] = 1.0
            cols[:, k] = self.apply(basis).ravel()
            basis.flat[k] = 0.0
        return cols

    def _dense_normal(self):
        if self._dense is None:
            d = self.dense_matrix()
            self._dense = (d, d.conj().T @ d)
        return self._dense

    def solve_normal_dense(self, b: np.ndarray) -> np.ndarray:
        _, ndag = self._dense_normal()
        if b.ndim == 3:
            return np.linalg.solve(ndag, b.ravel()).reshape(b.shape)
        flat = b.reshape(b.shape[:-3] + (-1,))
        out = np.linalg.solve(ndag, flat[..., None])[..., 0]
        return out.reshape(b.shape)


# ---------------------------------------------------------------------------
# conjugate gradient on the normal equations
# ---------------------------------------------------------------------------

def _bshape(scalar):
    return np.asarray(scalar)[..., None, None, None]


def cg_normal(op: WilsonDirac, b: np.ndarray, tol: float,
              maxiter: int = DEFAULT_MAXITER, x0: np.ndarray | None = None):
    """CG for (D^dag D) x = b, batch-aware.

    Stops when every sample satisfies ||D^dag D x - b|| <= tol * ||b||, with
    the true residual recomputed periodically and at convergence. Returns
    (x, iterations, worst relative residual).
    """
    normb = spinor_norm(b)
    target = tol * normb
    if np.all(normb == 0.0):
        return np.zeros_like(b), 0, 0.0

    if x0 is None:
        x = np.zeros_like(b)
        r = b.copy()
    else:
        x = x0.astype(np.complex128, copy=True)
        r = b - op.normal(x)
    p = r.copy()
    rs = np.real(spinor_dot(r, r))
    best = np.inf

    for it in range(1, maxiter + 1):
        ap = op.normal(p)
        denom = np.real(spinor_dot(p, ap))
        alpha = np.where(denom > 0.0, rs / np.where(denom > 0.0, denom, 1.0), 0.0)
        x = x + _bshape(alpha) * p
        if it % 50 == 0:
            r = b - op.normal(x)
        else:
            r = r - _bshape(alpha) * ap
        rs_new = np.real(spinor_dot(r, r))
        if np.all(np.sqrt(rs_new) <= target):
            true_r = b - op.normal(x)
            true_norm = spinor_norm(true_r)
            best = float(np.max(np.where(normb > 0, true_norm / np.where(normb > 0, normb, 1.0), 0.0)))
            if np.all(true_norm <= target):
                return x, it, best
            r = true_r
            rs_new = np.real(spinor_dot(r, r))
        beta = np.where(rs > 0.0, rs_new / np.where(rs > 0.0, rs, 1.0), 0.0)
        p = r + _bshape(beta) * p
        rs = rs_new

    rel = np.max(np.sqrt(rs) / np.where(normb > 0, normb, 1.0))
    raise SolverError(f"CG exceeded {maxiter} iterations", min(best, float(rel)))


def _rel_residual(residual: np.ndarray, b: np.ndarray) -> float:
    normb = spinor_norm(b)
    safe = np.where(normb > 0, normb, 1.0)
    return float(np.max(np.where(normb > 0, spinor_norm(residual) / safe, 0.0)))


def _finish_report(op, b, x, iters, counter, ninv):
    if counter is not None:
        counter.add(ninv)
    rel = _rel_residual(b - op.normal(x), b)
    return SolveReport(iterations=iters, rel_residual=rel, inversions=ninv)


def solve_normal(op: WilsonDirac, b: np.ndarray, tol: float = DEFAULT_TOL,
                 counter: InversionCounter | None = None,
                 x0: np.ndarray | None = None, maxiter: int = DEFAULT_MAXITER,
                 exact: bool = False):
    """x = (D^dag D)^{-1} b. Counts as two inversions (D and D^dag)."""
    if exact:
        x, iters = op.solve_normal_dense(b), 0
    else:
        x, iters, _ = cg_normal(op, b, tol, maxiter=maxiter, x0=x0)
    return x, _finish_report(op, b, x, iters, counter, ninv=2)


def solve_dirac(op: WilsonDirac, b: np.ndarray, tol: float = DEFAULT_TOL,
                counter: InversionCounter | None = None,
                x0: np.ndarray | None = None, maxiter: int = DEFAULT_MAXITER,
                exact: bool = False):
    """x = D^{-1} b via the normal equations; one inversion."""
    rhs = op.apply_dag(b)
    if exact:
        x, iters = op.solve_normal_dense(rhs), 0
    else:
        x, iters, _ = cg_normal(op, rhs, tol, maxiter=maxiter, x0=x0)
    if counter is not None:
        counter.add(1)
    return x, SolveReport(iterations=iters,
                          rel_residual=_rel_residual(b - op.apply(x), b),
                          inversions=1)


def solve_dirac_dagger(op: WilsonDirac, b: np.ndarray, tol: float = DEFAULT_TOL,
                       counter: InversionCounter | None = None,
                       x0: np.ndarray | None = None, maxiter: int = DEFAULT_MAXITER,
                       exact: bool = False):
    """x = D^{-dag} b via x = D (D^dag D)^{-1} b; one inversion."""
    if exact:
        y, iters = op.solve_normal_dense(b), 0
    else:
        y, iters, _ = cg_normal(op, b, tol, maxiter=maxiter, x0=x0)
    x = op.apply(y)
    if counter is not None:
        counter.add(1)
    return x, SolveReport(iterations=iters,
                          rel_residual=_rel_residual(b - op.apply_dag(x), b),
                          inversions=1)


# ---------------------------------------------------------------------------
# pseudofermions
# ---------------------------------------------------------------------------

def pseudofermion_heatbath(op: WilsonDirac, rng: np.random.Generator,
                           batch: int | None = None) -> np.ndarray:
    """Draw eta = D^dag phi with phi standard complex normal, so that the
    pseudofermion action equals |phi|^2 and is chi^2-distributed."""
    L, T = op.geom_shape
    shape = (L, T, 2) if batch is None else (batch, L, T, 2)
    phi = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return op.apply_dag(phi)


def fermion_action(op: WilsonDirac, eta: np.ndarray, tol: float = DEFAULT_TOL,
                   counter: InversionCounter | None = None, exact: bool = False):
    """S_F = eta^dag (D^dag D)^{-1} eta >= 0. One normal solve."""
    x, _ = solve_normal(op, eta, tol, counter=counter, exact=exact)
    return np.real(spinor_dot(eta, x))


def chi_xi(op: WilsonDirac, eta: np.ndarray, tol: float = DEFAULT_TOL,
           counter: InversionCounter | None = None,
           x0: np.ndarray | None = None, exact: bool = False):
    """The solver pair chi = D^{-dag} eta, xi = (D^dag D)^{-1} eta.

    Both come out of a single normal solve (xi), with chi = D xi, so the
    fermion force costs exactly two inversions.
    """
    xi, report = solve_normal(op, eta, tol, counter=counter, x0=x0, exact=exact)
    chi = op.apply(xi)
    return chi, xi, report


# ---------------------------------------------------------------------------
# force and force-gradient building blocks
# ---------------------------------------------------------------------------

def link_bilinears(op: WilsonDirac, mu: int, a: np.ndarray, b: np.ndarray):
    """The two hopping contractions attached to link (n, mu):

    A(n) = a(n)^dag (1 - s_mu) U_mu(n) b(n + mu)
    B(n) = a(n + mu)^dag (1 + s_mu) U*_mu(n) b(n)
    """
    ax = (-2, -1)[mu]
    u = op.U[..., mu, :, :]
    bil_a = np.conj(_w_minus(a, mu)) * u * np.roll(_w_minus(b, mu), -1, axis=ax)
    bil_b = np.conj(np.roll(_w_plus(a, mu), -1, axis=ax)) * np.conj(u) * _w_plus(b, mu)
    return bil_a, bil_b


def fermion_force(op: WilsonDirac, chi: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """f(n,mu) = -Im[A - B] with the bilinears above; equals dS_F/dq_mu(n)."""
    comps = []
    for mu in (0, 1):
        bil_a, bil_b = link_bilinears(op, mu, chi, xi)
        comps.append(-np.imag(bil_a - bil_b))
    return np.stack(comps, axis=-3)


def w_vectors(op: WilsonDirac, site: tuple[int, int], nu: int,
              chi: np.ndarray, xi: np.ndarray):
    """The two derivative stencil vectors for a single link (site, nu), as
    full spinor fields supported on {site, site + nu}. Test- and
    derivation-facing; production code uses the aggregated sums below."""
    if chi.ndim != 3:
        raise ValueError("w_vectors is defined for unbatched fields")
    L, T = op.geom_shape
    x, t = site
    nxt = ((x + 1) % L, t) if nu == 0 else (x, (t + 1) % T)
    u = op.U[nu, x, t]
    eye = np.eye(2, dtype=np.complex128)
    pm = eye - SIGMA[nu]
    pp = eye + SIGMA[nu]
    w1 = np.zeros_like(chi)
    w2 = np.zeros_like(xi)
    w1[nxt] += 0.5j * pm @ (np.conj(u) * chi[site])
    w1[site] += -0.5j * pp @ (u * chi[nxt])
    w2[site] += -0.5j * pm @ (u * xi[nxt])
    w2[nxt] += 0.5j * pp @ (np.conj(u) * xi[site])
    return w1, w2


def weighted_w_sums(op: WilsonDirac, weight: np.ndarray,
                    chi: np.ndarray, xi: np.ndarray):
    """sum_{m,nu} weight(m,nu) * w_{1,m,nu} and ... * w_{2,m,nu} as spinor
    fields, so the two Z solves can be done once instead of O(V) times."""
    out1 = np.zeros(np.broadcast_shapes(chi.shape, xi.shape), dtype=np.complex128)
    out2 = np.zeros_like(out1)
    for nu in (0, 1):
        ax = (-2, -1)[nu]
        u = op.U[..., nu, :, :]
        wview = weight[..., nu, :, :]
        em, ep = _EXPAND_MINUS[nu], _EXPAND_PLUS[nu]

        t1 = 0.5j * np.roll(wview * np.conj(u) * _w_minus(chi, nu), 1, axis=ax)
        t2 = -0.5j * wview * u * np.roll(_w_plus(chi, nu), -1, axis=ax)
        out1[..., 0] += t1 + t2
        out1[..., 1] += em * t1 + ep * t2

        t3 = -0.5j * wview * u * np.roll(_w_minus(xi, nu), -1, axis=ax)
        t4 = 0.5j * np.roll(wview * np.conj(u) * _w_plus(xi, nu), 1, axis=ax)
        out2[..., 0] += t3 + t4
        out2[..., 1] += em * t3 + ep * t4
    return out1, out2


def z_pair(op: WilsonDirac, weight: np.ndarray, chi: np.ndarray, xi: np.ndarray,
           tol: float = DEFAULT_TOL, counter: InversionCounter | None = None,
           exact: bool = False):
    """Aggregated auxiliary solves Z1 = D^{-dag} sum(w1*weight) and
    Z2 = D^{-1} (sum(w2*weight) + Z1); exactly two inversions."""
    b1, b2 = weighted_w_sums(op, weight, chi, xi)
    z1, _ = solve_dirac_dagger(op, b1, tol, counter=counter, exact=exact)
    z2, _ = solve_dirac(op, b2 + z1, tol, counter=counter, exact=exact)
    return z1, z2


def fg_fermion_hessian_dot(op: WilsonDirac, chi: np.ndarray, xi: np.ndarray,
                           weight: np.ndarray, tol: float = DEFAULT_TOL,
                           counter: InversionCounter | None = None,
                           exact: bool = False) -> np.ndarray:
    """Contraction 2 * sum weight * Hess(S_F) per link via the Z trick:

    4 Re[Z1^dag w_{2,n,mu} + w_{1,n,mu}^dag Z2] - 4 Re[chi^dag D'' xi] * weight

    where D'' is the (same-link) second derivative of the operator, the
    hopping stencil picked up by two derivative factors of +-i.
    """
    z1, z2 = z_pair(op, weight, chi, xi, tol, counter=counter, exact=exact)
    comps = []
    for mu in (0, 1):
        a_z1, b_z1 = link_bilinears(op, mu, z1, xi)
        a_z2, b_z2 = link_bilinears(op, mu, chi, z2)
        a_cx, b_cx = link_bilinears(op, mu, chi, xi)
        comps.append(2.0 * np.imag(a_z1 - b_z1)
                     + 2.0 * np.imag(a_z2 - b_z2)
                     - 2.0 * np.real(a_cx + b_cx) * weight[..., mu, :, :])
    return np.stack(comps, axis=-3)


def fg_fermion_fermion(op: WilsonDirac, eta: np.ndarray, tol: float = DEFAULT_TOL,
                       counter: InversionCounter | None = None,
                       exact: bool = False) -> np.ndarray:
    """Fermion-fermion force-gradient piece from scratch (solves included)."""
    chi, xi, _ = chi_xi(op, eta, tol, counter=counter, exact=exact)
    f = fermion_force(op, chi, xi)
    return fg_fermion_hessian_dot(op, chi, xi, f, tol, counter=counter, exact=exact)


def fg_gauge_fermion(op: WilsonDirac, eta: np.ndarray, beta: float,
                     tol: float = DEFAULT_TOL,
                     counter: InversionCounter | None = None,
                     exact: bool = False) -> np.ndarray:
    """Gauge-fermion force-gradient piece: fermion Hessian contracted with
    the gauge force (its own Z-solve pair)."""
    from .gauge import gauge_force

    chi, xi, _ = chi_xi(op, eta, tol, counter=counter, exact=exact)
    weight = gauge_force(op.q, beta)
    return fg_fermion_hessian_dot(op, chi, xi, weight, tol, counter=counter, exact=exact)
