"""Re-derive the 11-stage composition coefficients.

The palindrome
    B(s) A(e) B(l) A(t) B(w/2) A(c) B(w/2) A(t) B(l) A(e) B(s)
with w = 1 - 2(l+s), c = 1 - 2(t+e) is fourth-order accurate iff two cubic
conditions in (s, e, l, t) vanish. This script derives those conditions from
the exact 2x2 one-step matrix of the harmonic oscillator (whose h^3 defect
spans the two independent weight-3 error directions), Newton-polishes the
frozen production values onto the condition manifold, and reports the
fifth-order defect so alternative points on the two-parameter solution
family can be compared.

Run: python tools/derive_11stage.py
"""

import numpy as np
import sympy as sp
from scipy.optimize import fsolve

from schwinger.integrators import (ELEVEN_ETA, ELEVEN_LAM, ELEVEN_SIGMA,
                                   ELEVEN_THETA, fourth_order_defect)


def derive_conditions():
    """Symbolic derivation of the two order-4 conditions."""
    h, s, e, l, t = sp.symbols("h s e l t")
    w = 1 - 2 * (l + s)
    c = 1 - 2 * (t + e)

    def kick(b):
        return sp.Matrix([[1, 0], [-b * h, 1]])

    def drift(a):
        return sp.Matrix([[1, a * h], [0, 1]])

    m = (kick(s) * drift(e) * kick(l) * drift(t) * kick(w / 2) * drift(c)
         * kick(w / 2) * drift(t) * kick(l) * drift(e) * kick(s))
    exact = sp.Matrix([[1 - h**2 / 2 + h**4 / 24, h - h**3 / 6],
                       [-(h - h**3 / 6), 1 - h**2 / 2 + h**4 / 24]])
    conds = []
    for i in range(2):
        for j in range(2):
            poly = sp.Poly(sp.expand(m[i, j] - exact[i, j]), h)
            for k in range(5):
                coeff = sp.simplify(poly.coeff_monomial(h**k))
                if coeff != 0:
                    conds.append(((i, j), k, sp.factor(coeff)))
    return conds


def h5_defect(params, hval=0.05):
    """Norm of the h^5 coefficient of the oscillator one-step defect."""
    s, e, l, t = params
    w = 1 - 2 * (l + s)
    c = 1 - 2 * (t + e)

    def step(h):
        def kick(b):
            return np.array([[1, 0], [-b * h, 1]])

        def drift(a):
            return np.array([[1, a * h], [0, 1]])

        m = np.eye(2)
        for factor in (kick(s), drift(e), kick(l), drift(t), kick(w / 2),
                       drift(c), kick(w / 2), drift(t), kick(l), drift(e),
                       kick(s)):
            m = m @ factor
        exact = np.array([[np.cos(h), np.sin(h)], [-np.sin(h), np.cos(h)]])
        return m - exact

    # defect = a5 h^5 + a7 h^7; eliminate a7 by Richardson
    d1, d2 = step(hval), step(hval / 2)
    return float(np.linalg.norm((128 * d2 - d1) / (3 * hval**5)))


def main():
    print("order conditions (coefficient of h^k in entry (i,j) must vanish):")
    for (i, j), k, coeff in derive_conditions():
        print(f"  entry {(i, j)}, h^{k}: {coeff}")

    frozen = (ELEVEN_SIGMA, ELEVEN_ETA, ELEVEN_LAM, ELEVEN_THETA)
    print("\nfrozen production values:", frozen)
    print("condition residuals:", fourth_order_defect(*frozen))
    print("h^5 defect:", h5_defect(frozen))

    # Newton polish of (lam, theta) with (sigma, eta) held fixed confirms the
    # frozen point sits on the manifold to machine precision.
    def residual(lt):
        return fourth_order_defect(frozen[0], frozen[1], lt[0], lt[1])

    polished = fsolve(residual, (frozen[2], frozen[3]), xtol=1e-15)
    print("polished (lam, theta):", tuple(polished))
    print("shift from frozen:", (polished[0] - frozen[2], polished[1] - frozen[3]))


if __name__ == "__main__":
    main()
