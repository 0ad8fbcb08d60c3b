"""Independent reference solutions used only by the tests."""

import numpy as np


def riemann_osher(psi, UL, UR, xi, n=40001):
    """Self-similar entropy solution U(x/t) of a scalar Riemann problem.

    Osher's formula: for UL <= UR, U(xi) minimizes psi(u) - xi u over [UL, UR];
    for UL > UR it maximizes the same quantity over [UR, UL].  Brute force
    over a fine u-grid; independent of any convex-hull bookkeeping.
    """
    lo, hi = min(UL, UR), max(UL, UR)
    u = np.linspace(lo, hi, n)
    f = psi(u)
    xi = np.atleast_1d(xi)
    g = f[None, :] - xi[:, None] * u[None, :]
    idx = np.argmin(g, axis=1) if UL <= UR else np.argmax(g, axis=1)
    return u[idx]


def mu_quadrature(d, sigma, t1):
    """mu_{d,sigma}(t1) straight from its defining integral over [0, 1]^(d-1)."""
    from scipy import integrate

    if d == 1:
        return 1.0
    f = lambda *ts: t1 ** (1 + sigma) / (t1 + sum(ts)) ** (d + sigma)
    opts = {"epsabs": 1e-14, "epsrel": 1e-12, "limit": 200}
    if d == 2:
        return integrate.quad(f, 0, 1, points=[min(t1, 0.5)], **opts)[0]
    return integrate.nquad(f, [[0, 1]] * (d - 1), opts=[opts] * (d - 1))[0]


def seminorm_window_bruteforce(v, s, p, A, period=1.0, center=0.0, kappa=None):
    """1-D tilde semi-norm by direct summation over the x-window.

    The samples v_i sit at x = i period / N.  P(H_j) sums over every sample
    cell met by [center - A, center + A] with its exact overlap, without
    using periodicity to fold the window.  The H-integral runs interval by
    interval with adaptive quadrature of the linear interpolant; below
    |H| = 1/N the power model P(h1) (H / h1)^kappa is used.
    """
    from scipy import integrate

    v = np.asarray(v, dtype=float)
    N = len(v)
    kappa = p if kappa is None else kappa
    sp = s * p
    B, X0 = A / period, center / period
    lo, hi = X0 - B, X0 + B
    cells = np.arange(int(np.floor(lo * N)) - 1, int(np.ceil(hi * N)) + 2)
    w = np.clip(np.minimum((cells + 0.5) / N, hi) - np.maximum((cells - 0.5) / N, lo), 0, None)
    cells, w = cells[w > 0], w[w > 0]
    J = int(np.ceil(B * N))
    js = np.arange(-J, J + 1)
    P = np.array([np.sum(w * np.abs(v[(cells + j) % N] - v[cells % N]) ** p) for j in js])
    H = js / N
    total = 0.0
    for sign in (1, -1):
        h1 = 1.0 / N
        P1 = P[J + sign]
        b0 = min(h1, B)
        total += P1 * h1 ** (-kappa) * b0 ** (kappa - sp) / (kappa - sp)
        for j in range(1, J):
            a, b = j / N, min((j + 1) / N, B)
            if a >= B:
                break
            fa, fb = P[J + sign * j], P[J + sign * (j + 1)]
            lin = lambda x: (fa + (fb - fa) * (x - a) * N) * x ** (-1 - sp)
            total += integrate.quad(lin, a, b, epsabs=0, epsrel=1e-12)[0]
    return (period ** (1 - sp) * total) ** (1.0 / p)
