import numpy as np
import pytest

import schwinger as sw
from schwinger.fermion import (InversionCounter, SolverError, WilsonDirac,
                               chi_xi, fermion_action, fermion_force,
                               fg_fermion_hessian_dot, pseudofermion_heatbath,
                               solve_dirac, solve_dirac_dagger, solve_normal,
                               spinor_dot, w_vectors, weighted_w_sums, z_pair)
from schwinger.gauge import gauge_force
from conftest import BETA, M0, TOL, random_spinor
from oracles import dense_dirac_matrix, dense_normal_solve, fd_gradient, fg_oracle


def fermion_grad(q, m0, eta, tol=TOL):
    op = WilsonDirac(q, m0)
    chi, xi, _ = chi_xi(op, eta, tol)
    return fermion_force(op, chi, xi)


# ---------------------------------------------------------------------------
# operator application
# ---------------------------------------------------------------------------

def test_apply_free_constant_mode(geom4):
    q = np.zeros(geom4.links_shape())
    op = WilsonDirac(q, M0)
    psi = np.ones(geom4.spinor_shape(), dtype=np.complex128)
    psi[..., 1] = 0.3 - 0.2j
    assert np.allclose(op.apply(psi), M0 * psi, atol=1e-14)
    assert np.allclose(op.apply_dag(psi), M0 * psi, atol=1e-14)


def test_apply_point_source_stencil(geom4):
    q = np.zeros(geom4.links_shape())
    op = WilsonDirac(q, 0.0)
    psi = np.zeros(geom4.spinor_shape(), dtype=np.complex128)
    psi[1, 1, 0] = 1.0
    out = op.apply(psi)
    assert np.isclose(out[1, 1, 0], 2.0)                  # (2 + m0) with m0 = 0
    # backward neighbors receive -(1 - sigma_mu)/2, forward ones -(1 + sigma_mu)/2
    assert np.isclose(out[0, 1, 0], -0.5) and np.isclose(out[0, 1, 1], 0.5)
    assert np.isclose(out[2, 1, 0], -0.5) and np.isclose(out[2, 1, 1], -0.5)
    assert np.isclose(out[1, 0, 0], -0.5) and np.isclose(out[1, 0, 1], 0.5j)
    assert np.isclose(out[1, 2, 0], -0.5) and np.isclose(out[1, 2, 1], -0.5j)
    mask = np.ones((4, 4), dtype=bool)
    mask[[1, 2, 0, 1, 1], [1, 1, 1, 2, 0]] = False
    assert np.all(out[mask] == 0.0)


def test_apply_matches_dense(q4, rng, geom4):
    op = WilsonDirac(q4, M0)
    dense = dense_dirac_matrix(q4, M0)
    psi = random_spinor(rng, geom4)
    assert np.max(np.abs(op.apply(psi).ravel() - dense @ psi.ravel())) < 1e-13
    assert np.max(np.abs(op.apply_dag(psi).ravel() - dense.conj().T @ psi.ravel())) < 1e-13


def test_adjoint_identity(q4, rng, geom4):
    op = WilsonDirac(q4, M0)
    phi, psi = random_spinor(rng, geom4), random_spinor(rng, geom4)
    lhs = spinor_dot(phi, op.apply(psi))
    rhs = spinor_dot(op.apply_dag(phi), psi)
    assert abs(lhs - rhs) < 1e-12 * abs(lhs)


def test_gamma5_hermiticity(q4, rng, geom4):
    op = WilsonDirac(q4, M0)
    psi = random_spinor(rng, geom4)
    s3 = np.array([1.0, -1.0])
    assert np.max(np.abs(s3 * op.apply(s3 * psi) - op.apply_dag(psi))) < 1e-13


def test_batched_apply(q4, rng, geom4):
    qb = np.stack([q4, 0.7 * q4])
    opb = WilsonDirac(qb, M0)
    psib = np.stack([random_spinor(rng, geom4), random_spinor(rng, geom4)])
    out = opb.apply(psib)
    for k in range(2):
        assert np.allclose(out[k], WilsonDirac(qb[k], M0).apply(psib[k]))


# ---------------------------------------------------------------------------
# solver
# ---------------------------------------------------------------------------

def test_solve_zero_rhs(q4, geom4):
    op = WilsonDirac(q4, M0)
    counter = InversionCounter()
    x, report = solve_normal(op, np.zeros(geom4.spinor_shape(), complex),
                             TOL, counter=counter)
    assert np.all(x == 0.0) and report.iterations == 0
    assert counter.count == 2


def test_solve_matches_dense(q4, rng, geom4):
    op = WilsonDirac(q4, M0)
    b = random_spinor(rng, geom4)
    x, report = solve_normal(op, b, TOL)
    assert report.rel_residual <= 2 * TOL
    assert np.max(np.abs(x - dense_normal_solve(q4, M0, b))) < 1e-9


def test_solve_single_inversions(q4, rng, geom4):
    op = WilsonDirac(q4, M0)
    dense = dense_dirac_matrix(q4, M0)
    b = random_spinor(rng, geom4)
    counter = InversionCounter()
    x, _ = solve_dirac(op, b, TOL, counter=counter)
    assert counter.count == 1
    assert np.max(np.abs(x.ravel() - np.linalg.solve(dense, b.ravel()))) < 1e-9
    y, _ = solve_dirac_dagger(op, b, TOL, counter=counter)
    assert counter.count == 2
    assert np.max(np.abs(y.ravel() - np.linalg.solve(dense.conj().T, b.ravel()))) < 1e-9


def test_solver_cap_is_loud(q4, rng, geom4):
    op = WilsonDirac(q4, M0)
    b = random_spinor(rng, geom4)
    with pytest.raises(SolverError) as err:
        solve_normal(op, b, TOL, maxiter=2)
    assert err.value.best_residual > 0


def test_exact_solves_agree_with_cg(q4, rng, geom4):
    op = WilsonDirac(q4, M0)
    b = random_spinor(rng, geom4)
    x_cg, _ = solve_normal(op, b, TOL)
    x_dn, _ = solve_normal(op, b, TOL, exact=True)
    assert np.max(np.abs(x_cg - x_dn)) < 1e-9


def test_normal_matrix_positive_definite(q4):
    dense = dense_dirac_matrix(q4, M0)
    evals = np.linalg.eigvalsh(dense.conj().T @ dense)
    assert evals[0] > 0


def test_cg_converges_on_thermalized_field(therm8):
    op = WilsonDirac(therm8, M0)
    rng = sw.make_rng(17, 0)
    b = random_spinor(rng, sw.LatticeGeom(8, 8))
    x, report = solve_normal(op, b, TOL)
    assert report.rel_residual <= 2 * TOL
    assert report.iterations < 5000


# ---------------------------------------------------------------------------
# pseudofermions
# ---------------------------------------------------------------------------

def test_heatbath_action_identity(q4, rng, geom4):
    """With eta = D^dag phi the pseudofermion action collapses to |phi|^2."""
    op = WilsonDirac(q4, M0)
    phi = random_spinor(rng, geom4)
    eta = op.apply_dag(phi)
    s = fermion_action(op, eta, TOL)
    norm_phi = float(np.real(spinor_dot(phi, phi)))
    assert abs(s - norm_phi) < 1e-10 * norm_phi


def test_heatbath_chi_square_mean(q4):
    op = WilsonDirac(q4, M0)
    rng = sw.make_rng(23, 0)
    n = 4000
    eta = pseudofermion_heatbath(op, rng, batch=n)
    s = fermion_action(op, eta, 1e-10)
    two_v = 2 * 16
    # S_F = |phi|^2 is a sum of 2V unit-mean exponentials: var = 2V per draw
    assert abs(np.mean(s) - two_v) < 4.0 * np.sqrt(two_v / n)


def test_heatbath_deterministic(q4):
    op = WilsonDirac(q4, M0)
    a = pseudofermion_heatbath(op, sw.make_rng(9, 1))
    b = pseudofermion_heatbath(op, sw.make_rng(9, 1))
    assert np.array_equal(a, b)


def test_fermion_action_nonnegative_and_zero(q4, eta4, geom4):
    op = WilsonDirac(q4, M0)
    assert fermion_action(op, np.zeros(geom4.spinor_shape(), complex), TOL) == 0.0
    assert fermion_action(op, eta4, TOL) > 0.0


def test_fermion_action_matches_dense(q4, eta4):
    op = WilsonDirac(q4, M0)
    s = fermion_action(op, eta4, TOL)
    x = dense_normal_solve(q4, M0, eta4)
    oracle = float(np.real(np.vdot(eta4.ravel(), x.ravel())))
    assert abs(s - oracle) < 1e-9 * abs(oracle)


# ---------------------------------------------------------------------------
# chi/xi and forces
# ---------------------------------------------------------------------------

def test_chi_xi_defining_equations(q4, eta4):
    op = WilsonDirac(q4, M0)
    counter = InversionCounter()
    chi, xi, _ = chi_xi(op, eta4, TOL, counter=counter)
    assert counter.count == 2
    norm = np.max(np.abs(eta4))
    assert np.max(np.abs(op.apply_dag(chi) - eta4)) < 10 * TOL * norm
    assert np.max(np.abs(op.apply(xi) - chi)) < 10 * TOL * norm


def test_chi_xi_free_constant_mode(geom4):
    q = np.zeros(geom4.links_shape())
    op = WilsonDirac(q, M0)
    eta = np.full(geom4.spinor_shape(), 0.5 + 0.0j)
    chi, xi, _ = chi_xi(op, eta, TOL)
    assert np.max(np.abs(chi - eta / M0)) < 1e-10
    assert np.max(np.abs(xi - eta / M0**2)) < 1e-10


def test_chi_xi_matches_dense(q4, eta4):
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    dense = dense_dirac_matrix(q4, M0)
    xi_d = dense_normal_solve(q4, M0, eta4)
    chi_d = (dense @ xi_d.ravel()).reshape(eta4.shape)
    assert np.max(np.abs(xi - xi_d)) < 1e-9
    assert np.max(np.abs(chi - chi_d)) < 1e-9


def test_fermion_force_zero_without_pseudofermion(q4, geom4):
    op = WilsonDirac(q4, M0)
    zero = np.zeros(geom4.spinor_shape(), complex)
    assert np.all(fermion_force(op, zero, zero) == 0.0)


def test_fermion_force_matches_fd(q4, eta4):
    force = fermion_grad(q4, M0, eta4)
    ref = fd_gradient(lambda x: fermion_action(WilsonDirac(x, M0), eta4, TOL),
                      q4, eps=1e-5)
    assert np.max(np.abs(force - ref)) < 1e-6


def test_fermion_force_is_real_gradient_of_dense(q4, eta4):
    """Cross-check against the gradient computed from dense inverses."""
    force = fermion_grad(q4, M0, eta4)
    ref = fd_gradient(lambda x: float(np.real(np.vdot(
        eta4.ravel(), dense_normal_solve(x, M0, eta4).ravel()))), q4, eps=1e-5)
    assert np.max(np.abs(force - ref)) < 1e-6


# ---------------------------------------------------------------------------
# w vectors, Z solves, force-gradient pieces
# ---------------------------------------------------------------------------

def test_w_vectors_support(q4, eta4, geom4):
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    w1, w2 = w_vectors(op, (1, 2), 0, chi, xi)
    mask = np.zeros((4, 4), dtype=bool)
    mask[1, 2] = mask[2, 2] = True
    assert np.all(w1[~mask] == 0.0) and np.all(w2[~mask] == 0.0)
    zero = np.zeros_like(chi)
    z1, z2 = w_vectors(op, (1, 2), 0, zero, zero)
    assert np.all(z1 == 0.0) and np.all(z2 == 0.0)


def test_w_vectors_match_dense_derivative(q4, eta4):
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    eps = 1e-6
    for site, nu in (((0, 0), 0), ((2, 1), 1), ((3, 3), 0)):
        qp, qm = q4.copy(), q4.copy()
        qp[(nu,) + site] += eps
        qm[(nu,) + site] -= eps
        d_dense = (dense_dirac_matrix(qp, M0) - dense_dirac_matrix(qm, M0)) / (2 * eps)
        w1, w2 = w_vectors(op, site, nu, chi, xi)
        assert np.max(np.abs(w2.ravel() - d_dense @ xi.ravel())) < 1e-7
        assert np.max(np.abs(w1.ravel() - d_dense.conj().T @ chi.ravel())) < 1e-7


def test_weighted_w_sums_match_per_link_accumulation(q4, eta4, rng):
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    w = rng.standard_normal(q4.shape)
    s1 = np.zeros_like(chi)
    s2 = np.zeros_like(xi)
    for x in range(4):
        for t in range(4):
            for nu in (0, 1):
                w1, w2 = w_vectors(op, (x, t), nu, chi, xi)
                s1 += w[nu, x, t] * w1
                s2 += w[nu, x, t] * w2
    b1, b2 = weighted_w_sums(op, w, chi, xi)
    assert np.max(np.abs(b1 - s1)) < 1e-13
    assert np.max(np.abs(b2 - s2)) < 1e-13


def test_z_pair_contract_and_dense(q4, eta4, rng):
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    w = rng.standard_normal(q4.shape)
    counter = InversionCounter()
    z1, z2 = z_pair(op, w, chi, xi, TOL, counter=counter)
    assert counter.count == 2
    b1, b2 = weighted_w_sums(op, w, chi, xi)
    assert np.max(np.abs(op.apply_dag(z1) - b1)) < 1e-10
    assert np.max(np.abs(op.apply(z2) - (b2 + z1))) < 1e-10
    dense = dense_dirac_matrix(q4, M0)
    z1_d = np.linalg.solve(dense.conj().T, b1.ravel())
    z2_d = np.linalg.solve(dense, b2.ravel() + z1_d)
    assert np.max(np.abs(z1.ravel() - z1_d)) < 1e-8
    assert np.max(np.abs(z2.ravel() - z2_d)) < 1e-8
    zz1, zz2 = z_pair(op, np.zeros_like(w), chi, xi, TOL)
    assert np.all(zz1 == 0.0) and np.all(zz2 == 0.0)


def test_fg_fermion_fermion_matches_oracle(q4, eta4):
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    f = fermion_force(op, chi, xi)
    got = fg_fermion_hessian_dot(op, chi, xi, f, TOL)
    ref = fg_oracle(lambda x: fermion_grad(x, M0, eta4), q4, f, eps=1e-4)
    assert np.max(np.abs(got - ref)) < 1e-5
    zero = np.zeros_like(eta4)
    assert np.all(fg_fermion_hessian_dot(op, zero, zero,
                                         np.zeros_like(f), TOL) == 0.0)


def test_fg_gauge_fermion_matches_oracle(q4, eta4):
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    weight = gauge_force(q4, BETA)
    got = fg_fermion_hessian_dot(op, chi, xi, weight, TOL)
    ref = fg_oracle(lambda x: fermion_grad(x, M0, eta4), q4, weight, eps=1e-4)
    assert np.max(np.abs(got - ref)) < 1e-5


def test_fg_fermion_scaling_in_eta(q4, eta4):
    """eta -> c*eta scales the force by c^2 and the ff piece by c^4."""
    c = 1.6
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    f = fermion_force(op, chi, xi)
    cff = fg_fermion_hessian_dot(op, chi, xi, f, TOL)
    chi2, xi2, _ = chi_xi(op, c * eta4, TOL)
    f2 = fermion_force(op, chi2, xi2)
    assert np.max(np.abs(f2 - c**2 * f)) < 1e-9 * np.max(np.abs(f))
    cff2 = fg_fermion_hessian_dot(op, chi2, xi2, f2, TOL)
    assert np.max(np.abs(cff2 - c**4 * cff)) < 1e-8 * max(1.0, np.max(np.abs(cff)))


def test_fg_weight_linearity(q4, eta4):
    """The contraction is linear in the weight, so doubling beta doubles the
    gauge-fermion piece."""
    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    g1 = fg_fermion_hessian_dot(op, chi, xi, gauge_force(q4, BETA), TOL)
    g2 = fg_fermion_hessian_dot(op, chi, xi, gauge_force(q4, 2 * BETA), TOL)
    assert np.max(np.abs(g2 - 2.0 * g1)) < 1e-9 * max(1.0, np.max(np.abs(g1)))


def test_full_force_gradient_consistency(q4, eta4):
    """Sum of the four pieces equals the Hessian contraction of the full
    action with the full force."""
    from schwinger.gauge import fg_gauge_gauge, gauge_hessian_dot

    op = WilsonDirac(q4, M0)
    chi, xi, _ = chi_xi(op, eta4, TOL)
    f = fermion_force(op, chi, xi)
    g = gauge_force(q4, BETA)
    total = (fg_gauge_gauge(q4, BETA) + gauge_hessian_dot(q4, BETA, f)
             + fg_fermion_hessian_dot(op, chi, xi, g, TOL)
             + fg_fermion_hessian_dot(op, chi, xi, f, TOL))

    def grad_full(x):
        return gauge_force(x, BETA) + fermion_grad(x, M0, eta4)

    ref = fg_oracle(grad_full, q4, g + f, eps=1e-4)
    assert np.max(np.abs(total - ref)) < 1e-5
