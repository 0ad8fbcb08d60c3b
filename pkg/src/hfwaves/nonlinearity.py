"""Nonlinearity index d_F of a smooth flux and the degeneracy exponent alpha.

d_F[u] is the smallest k with rank{a'(u), ..., a^(k)(u)} = d (a = F'), d_F
is its supremum over [-M, M] and alpha_sup = 1/d_F.  The empirical side
measures the sets W_delta(tau, xi) = {|v| <= M : |tau + a(v).xi| <= delta}
and fits their worst-case size against delta.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .fitting import ScalingFit, loglog_fit
from .flux import Call, Expr, FluxExpr, eval_jet, velocity, velocity_derivatives

INF = math.inf
DEFAULT_RANK_TOL = 1e-9


def default_kmax(d: int) -> int:
    return 2 * d + 6


# -- the index d_F ------------------------------------------------------------


def _ranks(rows: np.ndarray, tol: float) -> np.ndarray:
    """rows: (kmax, n, d) stacked a^(1..kmax).  Returns d_F[u] per point (float, inf if none)."""
    kmax, n, d = rows.shape
    out = np.full(n, INF)
    pending = np.ones(n, dtype=bool)
    for k in range(1, kmax + 1):
        if not pending.any():
            break
        if k < d:
            continue
        mats = np.moveaxis(rows[:k, pending], 0, 1)  # (m, k, d)
        s = np.linalg.svd(mats, compute_uv=False)
        top = s[:, :1]
        rank = np.sum((s > tol * top) & (top > 0), axis=1)
        idx = np.flatnonzero(pending)
        hit = rank >= d
        out[idx[hit]] = k
        pending[idx[hit]] = False
    return out


def d_F_at(flux: FluxExpr, u: float, kmax: int | None = None, rank_tol: float = DEFAULT_RANK_TOL):
    """Nonlinearity index at one state; returns an int, or math.inf if no k <= kmax works."""
    kmax = default_kmax(flux.d) if kmax is None else kmax
    if kmax < flux.d:
        raise ValueError(f"kmax={kmax} is below the dimension d={flux.d}")
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    rows = velocity_derivatives(flux, np.array([float(u)]), kmax)[1:]
    val = _ranks(rows, rank_tol)[0]
    return val if math.isinf(val) else int(val)


def _d_F_many(flux, us, kmax, tol):
    rows = velocity_derivatives(flux, np.asarray(us, dtype=float), kmax)[1:]
    return _ranks(rows, tol)


@dataclass
class NonlinearityReport:
    flux: str
    d: int
    M: float
    d_F: float  # int-valued, or inf
    u_bar: float
    alpha_sup: float
    alpha_sup_exact: str
    kmax: int
    rank_tol: float
    samples: list[tuple[float, float]] = field(default_factory=list)

    @property
    def finite(self) -> bool:
        return not math.isinf(self.d_F)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["d_F"] = "inf" if math.isinf(self.d_F) else int(self.d_F)
        out["samples"] = [[u, "inf" if math.isinf(k) else int(k)] for u, k in self.samples]
        return out


def _degeneracy_score(flux, us, k, tol):
    """sigma_d of [a'(u) .. a^(k)(u)], unnormalized; zero where d_F[u] > k."""
    rows = velocity_derivatives(flux, np.atleast_1d(np.asarray(us, dtype=float)), k)[1:]
    mats = np.moveaxis(rows, 0, 1)
    s = np.linalg.svd(mats, compute_uv=False)
    return s[:, flux.d - 1]


def d_F_global(
    flux: FluxExpr,
    M: float,
    kmax: int | None = None,
    grid_size: int = 65,
    rank_tol: float = DEFAULT_RANK_TOL,
    refine_passes: int = 3,
) -> NonlinearityReport:
    """d_F = sup over [-M, M] of d_F[u].

    The grid maximum is refined around every local minimum of the d-th
    singular value of [a' .. a^(k*)] (the only places where d_F[u] can jump
    above the current maximum k*, by upper semi-continuity).
    """
    if M <= 0:
        raise ValueError("M must be positive")
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    kmax = default_kmax(flux.d) if kmax is None else kmax
    us = np.linspace(-M, M, grid_size)
    vals = _d_F_many(flux, us, kmax, rank_tol)
    samples = list(zip(us.tolist(), vals.tolist()))
    best = int(np.argmax(vals))
    kstar, ubar = vals[best], float(us[best])

    for _ in range(refine_passes):
        if math.isinf(kstar):
            break
        k = int(kstar)
        score = _degeneracy_score(flux, us, k, rank_tol)
        scale = float(np.max(score)) or 1.0
        h = score / scale
        improved = False
        for i in range(len(us)):
            lo, hi = max(i - 1, 0), min(i + 1, len(us) - 1)
            if h[i] > h[lo] or h[i] > h[hi]:
                continue
            if h[i] > 0.5:
                continue
            cand = _golden_min(lambda x: float(_degeneracy_score(flux, x, k, rank_tol)[0]), us[lo], us[hi])
            val = d_F_at(flux, cand, kmax, rank_tol)
            samples.append((cand, float(val)))
            if val > kstar:
                kstar, ubar, improved = val, cand, True
        if not improved:
            break

    samples.sort()
    alpha, alpha_exact = _alpha(kstar)
    return NonlinearityReport(
        flux=str(flux.name or flux),
        d=flux.d,
        M=float(M),
        d_F=float(kstar),
        u_bar=ubar,
        alpha_sup=float(alpha),
        alpha_sup_exact=str(alpha_exact),
        kmax=kmax,
        rank_tol=rank_tol,
        samples=samples,
    )


def _golden_min(fun, a: float, b: float, iters: int = 100) -> float:
    """Golden-section search to float resolution (Brent's tolerance floor is too coarse here)."""
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if b - a <= 4 * np.spacing(max(abs(a), abs(b), 1e-300)):
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return c if fc <= fd else d


def _alpha(dF) -> tuple[float, Fraction]:
    if math.isinf(dF):
        return 0.0, Fraction(0)
    fr = Fraction(1, int(dF))
    return float(fr), fr


def alpha_sup(report: NonlinearityReport) -> tuple[Fraction, float]:
    """(exact rational, float) value of 1/d_F, or 0 when d_F is infinite."""
    val, fr = _alpha(report.d_F)
    return fr, val


# -- degeneracy sets ----------------------------------------------------------


@dataclass
class DegeneracyMeasurement:
    tau: float
    xi: list[float]
    delta: float
    measure: float
    N: int
    degenerate: bool = False


class DegeneracyGrid:
    """Precomputed a(v) on a half-cell grid of [-M, M] for repeated measurements."""

    def __init__(self, flux: FluxExpr, M: float, N: int):
        if N < 1000:
            raise ValueError("need at least 1000 cells")
        self.flux, self.M, self.N = flux, float(M), int(N)
        self.x = np.linspace(-M, M, 2 * N + 1)  # cell edges and midpoints
        self.A = velocity(flux, self.x)  # (2N+1, d)

    def measure(self, tau: float, xi, delta: float, iters: int = 0) -> float:
        """|W_delta(tau, xi)|.

        Half-cells with both ends inside count fully; a boundary crossing is
        located by linear interpolation of |phi| - delta (error O(h^2)) or,
        with ``iters`` > 0, by bisection on the exact flux.
        """
        xi = np.asarray(xi, dtype=float)
        phi = tau + self.A @ xi
        g = np.abs(phi) - delta
        inside = g <= 0
        a_in, b_in = inside[:-1], inside[1:]
        width = self.x[1] - self.x[0]
        total = width * np.count_nonzero(a_in & b_in)
        cross = np.flatnonzero(a_in != b_in)
        if cross.size:
            x0, x1 = self.x[cross], self.x[cross + 1]
            lo_in = a_in[cross]
            if iters:
                lo, hi = x0.copy(), x1.copy()
                for _ in range(iters):
                    mid = 0.5 * (lo + hi)
                    gm = np.abs(tau + velocity(self.flux, mid) @ xi) - delta
                    same = (gm <= 0) == lo_in
                    lo = np.where(same, mid, lo)
                    hi = np.where(same, hi, mid)
                root = 0.5 * (lo + hi)
            else:
                # phi has one sign on a half-cell unless it crosses zero, where |phi| < delta anyway
                p0, p1 = phi[cross], phi[cross + 1]
                s = np.where(np.abs(p0) > np.abs(p1), np.sign(p0), np.sign(p1))
                g0, g1 = s * p0 - delta, s * p1 - delta
                root = x0 + (x1 - x0) * g0 / (g0 - g1)
            part = np.where(lo_in, root - x0, x1 - root)
            total += float(np.sum(part))
        return float(min(total, 2 * self.M))


def degeneracy_measure(
    flux: FluxExpr, M: float, tau: float, xi, delta: float, N: int = 200_000, grid: DegeneracyGrid | None = None
) -> DegeneracyMeasurement:
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    if xi.shape != (flux.d,):
        raise ValueError(f"xi must have {flux.d} components")
    if abs(tau**2 + xi @ xi - 1.0) > 1e-9:
        raise ValueError("(tau, xi) must lie on the unit sphere")
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not np.any(xi) and abs(tau) <= delta:
        return DegeneracyMeasurement(float(tau), xi.tolist(), delta, 2.0 * M, N, degenerate=True)
    grid = grid if grid is not None else DegeneracyGrid(flux, M, N)
    return DegeneracyMeasurement(float(tau), xi.tolist(), delta, grid.measure(tau, xi, delta), grid.N)


def worst_direction(flux: FluxExpr, u_bar: float, d_F, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Unit (tau, xi) with xi orthogonal to a'(u_bar) .. a^(d_F-1)(u_bar) and tau + a(u_bar).xi = 0.

    Within the admissible null space, xi is the projection of a^(d_F)(u_bar),
    so phi(v) = tau + a(v).xi vanishes to order exactly d_F at u_bar.
    """
    if math.isinf(d_F):
        raise ValueError("worst direction needs a finite d_F")
    d_F = int(d_F)
    rows = velocity_derivatives(flux, np.array([float(u_bar)]), d_F)[:, 0, :]  # a^(0..d_F)
    d = flux.d
    if d_F > 1:
        constraint = rows[1:d_F]
        _, s, vt = np.linalg.svd(constraint, full_matrices=True)
        rank = int(np.sum(s > rank_tol * s[0])) if s.size and s[0] > 0 else 0
        null = vt[rank:]
    else:
        null = np.eye(d)
    if null.shape[0] == 0:
        raise ValueError("no direction orthogonal to the first d_F-1 derivatives")
    xi = null.T @ (null @ rows[d_F])
    if np.linalg.norm(xi) <= rank_tol * max(np.linalg.norm(rows[d_F]), 1.0):
        raise ValueError("inconsistent d_F: a^(d_F) is orthogonal to the admissible null space")
    tau = -float(rows[0] @ xi)
    w = np.concatenate([[tau], xi])
    w /= np.linalg.norm(w)
    lead = w[1:][np.flatnonzero(np.abs(w[1:]) > 1e-14)]
    if lead.size and lead[0] < 0:
        w = -w
    return w


def sphere_directions(d: int, seed: int = 0, count: int | None = None) -> np.ndarray:
    """Sample directions (tau, xi) on the unit sphere of R^(1+d); rows are unit vectors."""
    if d == 1:
        n = count or 720
        ang = 2 * np.pi * np.arange(n) / n
        return np.column_stack([np.cos(ang), np.sin(ang)])
    if d == 2:
        n = count or 2000
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        r = np.sqrt(1 - z * z)
        phi = np.pi * (1 + 5**0.5) * i
        return np.column_stack([z, r * np.cos(phi), r * np.sin(phi)])
    n = count or 5000
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, d + 1))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _local_ascent(fun, w0, h0=0.05, hmin=1e-7, max_evals=250):
    """Compass search on the sphere maximizing fun(w)."""
    w = w0 / np.linalg.norm(w0)
    best = fun(w)
    h = h0
    evals = 1
    while h > hmin and evals < max_evals:
        q, _ = np.linalg.qr(np.column_stack([w, np.eye(len(w))]))
        tangent = q[:, 1:].T
        moved = False
        for t in tangent:
            for sgn in (1.0, -1.0):
                cand = w + sgn * h * t
                cand /= np.linalg.norm(cand)
                val = fun(cand)
                evals += 1
                if val > best:
                    w, best, moved = cand, val, True
                    break
            if moved:
                break
        if not moved:
            h *= 0.5
    return w, best


def geometric_deltas(hi: float = 1e-1, lo: float = 1e-4, n: int = 8) -> np.ndarray:
    return np.geomspace(hi, lo, n)


def fit_alpha_empirical(
    flux: FluxExpr,
    M: float,
    deltas: Sequence[float] | None = None,
    directions: np.ndarray | None = None,
    N: int = 200_000,
    screen_N: int = 8192,
    top: int = 3,
    seed: int = 0,
    refine: bool = True,
    kmax: int | None = None,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> ScalingFit:
    """Fit log max_dir |W_delta| against log delta; the slope estimates alpha_sup.

    Every direction is screened on a coarse grid, the best few per delta
    (always including the analytic worst direction) are re-measured at full
    resolution and, if ``refine``, improved by a local compass search on the
    sphere so the sup over directions is not limited by the sample spacing.
    """
    deltas = np.asarray(geometric_deltas() if deltas is None else deltas, dtype=float)
    if deltas.size < 5:
        raise ValueError("need at least 5 delta values")
    report = d_F_global(flux, M, kmax=kmax, rank_tol=rank_tol)
    dirs = [] if directions is None else [np.asarray(w, dtype=float) for w in directions]
    worst_idx = None
    if report.finite:
        worst_idx = 0
        dirs = [worst_direction(flux, report.u_bar, report.d_F, rank_tol)] + dirs
    if directions is None:
        dirs += list(sphere_directions(flux.d, seed))
    W = np.array(dirs)
    W /= np.linalg.norm(W, axis=1, keepdims=True)

    # coarse screening: sorted |phi| at midpoints gives the measure for every delta at once
    h = 2 * M / screen_N
    mids = -M + h * (np.arange(screen_N) + 0.5)
    A = velocity(flux, mids)
    coarse = np.empty((len(deltas), len(W)))
    for start in range(0, len(W), 512):
        blk = W[start : start + 512]
        phi = np.sort(np.abs(blk[:, 0][None, :] + A @ blk[:, 1:].T), axis=0)
        for j, dlt in enumerate(deltas):
            coarse[j, start : start + 512] = h * np.array(
                [np.searchsorted(phi[:, c], dlt, side="right") for c in range(phi.shape[1])]
            )

    grid = DegeneracyGrid(flux, M, N)
    coarse_grid = DegeneracyGrid(flux, M, min(N, 16384))
    ys, table = [], []
    for j, dlt in enumerate(deltas):
        order = np.argsort(-coarse[j], kind="stable")[:top]
        cand = sorted(set(order.tolist()) | ({worst_idx} if worst_idx is not None else set()))
        best = 0.0
        for c in cand:
            w = W[c]
            if not np.any(w[1:]) and abs(w[0]) <= dlt:
                m = 2 * M
            else:
                m = grid.measure(w[0], w[1:], dlt)
            if refine and np.any(w[1:]):
                z, _ = _local_ascent(lambda z: coarse_grid.measure(z[0], z[1:], dlt), w, hmin=max(1e-7, 0.01 * dlt))
                m = max(m, grid.measure(z[0], z[1:], dlt))
            table.append((float(dlt), int(c), float(m)))
            best = max(best, m)
        ys.append(best)
    ys = np.array(ys)
    if not np.any(ys > 0):
        fit = loglog_fit(deltas, ys, note="all measures zero")
    else:
        fit = loglog_fit(deltas, ys)
    fit.extra = {
        "deltas": deltas.tolist(),
        "max_measure": ys.tolist(),
        "table": table,
        "n_directions": int(len(W)),
        "d_F": report.to_dict()["d_F"],
        "fitted_range": [float(deltas.min()), float(deltas.max())],
    }
    return fit


# -- measure bound with phi-independent constants -----------------------------


def stein_constant(k: int) -> float:
    """c_1 = 2, c_k = 4 (c_{k-1}/(k-1))^((k-1)/k)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    c = 2.0
    for j in range(2, k + 1):
        c = 4.0 * (c / (j - 1)) ** ((j - 1) / j)
    return c


@dataclass
class BoundCheck:
    status: str  # "holds" | "violated" | "hypothesis-failed"
    measure: float
    bound: float
    min_abs_derivative: float

    def __bool__(self) -> bool:
        if self.status == "hypothesis-failed":
            raise ValueError("hypothesis |phi^(k)| >= 1 failed; the bound does not apply")
        return self.status == "holds"


def sublevel_measure(v: np.ndarray, phi: np.ndarray, eps: float) -> float:
    """|{|phi| <= eps}| for samples on a sorted grid, linear between samples."""
    g = np.abs(phi) - eps
    inside = g <= 0
    dv = np.diff(v)
    both = inside[:-1] & inside[1:]
    total = float(np.sum(dv[both]))
    for i in np.flatnonzero(inside[:-1] != inside[1:]):
        # |phi| - eps is piecewise linear only if phi keeps its sign; split at a sign change of phi
        x0, x1, p0, p1 = v[i], v[i + 1], phi[i], phi[i + 1]
        pts = [x0, x1]
        if p0 * p1 < 0:
            pts.insert(1, x0 + (x1 - x0) * p0 / (p0 - p1))
        vals = np.interp(pts, [x0, x1], [p0, p1])
        for a, b, fa, fb in zip(pts[:-1], pts[1:], vals[:-1], vals[1:]):
            ga, gb = abs(fa) - eps, abs(fb) - eps
            if ga <= 0 and gb <= 0:
                total += b - a
            elif ga <= 0 or gb <= 0:
                r = a + (b - a) * ga / (ga - gb)
                total += (r - a) if ga <= 0 else (b - r)
    return total


def measure_bound_check(v, phi, k: int, eps: float, derivative=None) -> BoundCheck:
    """Check |{|phi| <= eps}| <= c_k eps^(1/k) given |phi^(k)| >= 1.

    ``derivative`` holds samples of phi^(k); when omitted it is estimated by
    repeated second-order finite differences of ``phi``.
    """
    v = np.asarray(v, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if derivative is None:
        derivative = phi
        for _ in range(k):
            derivative = np.gradient(derivative, v, edge_order=2)
        interior = slice(k, len(v) - k) if len(v) > 2 * k + 2 else slice(None)
        dmin = float(np.min(np.abs(derivative[interior])))
    else:
        dmin = float(np.min(np.abs(np.asarray(derivative, dtype=float))))
    measure = sublevel_measure(v, phi, eps)
    bound = stein_constant(k) * eps ** (1.0 / k)
    if dmin < 1.0 - 1e-9:
        return BoundCheck("hypothesis-failed", measure, bound, dmin)
    # the bound is attained for k = 1 (phi(v) = v), so compare with a rounding allowance
    return BoundCheck("holds" if measure <= bound * (1 + 1e-9) else "violated", measure, bound, dmin)


# -- classification against the other nonlinearity definitions ----------------


def _as_poly(node: Expr) -> np.ndarray | None:
    """Ascending coefficients if the tree is a polynomial in u, else None."""
    from numpy.polynomial import polynomial as P

    from .flux import BinOp, Const, Neg, Var

    if isinstance(node, Const):
        return np.array([node.value])
    if isinstance(node, Var):
        return np.array([0.0, 1.0])
    if isinstance(node, Neg):
        p = _as_poly(node.arg)
        return None if p is None else -p
    if isinstance(node, BinOp):
        a = _as_poly(node.left)
        if node.op == "^":
            if a is None or node.right.has_var():
                return None
            e = node.right.const_value()
            if not (e.is_integer() and e >= 0):
                return None
            return P.polypow(a, int(e))
        b = _as_poly(node.right)
        if a is None or b is None:
            return None
        if node.op == "+":
            return P.polyadd(a, b)
        if node.op == "-":
            return P.polysub(a, b)
        if node.op == "*":
            return P.polymul(a, b)
        if len(np.trim_zeros(b, "b")) <= 1 and b[0] != 0:
            return a / b[0]
        return None
    return None


def _is_trig_poly(node: Expr) -> bool:
    """Sums/products of polynomials and sin/cos of affine arguments."""
    from .flux import BinOp, Const, Neg, Var

    if isinstance(node, (Const, Var)):
        return True
    if isinstance(node, Neg):
        return _is_trig_poly(node.arg)
    if isinstance(node, BinOp):
        if node.op == "^":
            return _is_trig_poly(node.left) and not node.right.has_var() and float(node.right.const_value()).is_integer() and node.right.const_value() >= 0
        if node.op == "/":
            return _is_trig_poly(node.left) and not node.right.has_var()
        return _is_trig_poly(node.left) and _is_trig_poly(node.right)
    if isinstance(node, Call) and node.name in ("sin", "cos"):
        p = _as_poly(node.args[0])
        return p is not None and len(np.trim_zeros(p, "b")) <= 2
    return False


def _coefficient_rank(columns: list[np.ndarray], tol: float = 1e-9) -> int:
    mat = np.column_stack(columns)
    norms = np.linalg.norm(mat, axis=0)
    nz = norms > 0
    if not nz.any():
        return 0
    mat = mat[:, nz] / norms[nz]
    s = np.linalg.svd(mat, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def _function_rank(flux: FluxExpr, exprs_kind: str, M: float, kind: str, order: int) -> int:
    """Rank of the family {1, a_1..a_d} ('lpt') or {F_1''..F_d''} ('ee') as functions.

    Polynomials: exact coefficient vectors.  Trig polynomials (analytic):
    Taylor coefficients at an interior point, which decide linear
    (in)dependence of analytic functions once the order is high enough.
    """
    d = flux.d
    shift = 1 if kind == "lpt" else 2
    if exprs_kind == "poly":
        from numpy.polynomial import polynomial as P

        polys = [P.polyder(_as_poly(c), shift) for c in flux.components]
        if kind == "lpt":
            polys = [np.array([1.0])] + polys
        width = max(len(p) for p in polys)
        cols = [np.pad(p, (0, width - len(p))) for p in polys]
        return _coefficient_rank(cols)
    u0 = 0.37 * M
    cols = []
    for i in range(d):
        c = eval_jet(flux, i, u0, order + shift).derivatives()[shift:]
        fact = np.array([math.factorial(k) for k in range(len(c))], dtype=float)
        cols.append(c / fact)
    if kind == "lpt":
        one = np.zeros(order + 1)
        one[0] = 1.0
        cols = [one] + cols
    return _coefficient_rank(cols)


@dataclass
class Classification:
    flux: str
    expression_class: str  # "polynomial" | "trig-polynomial" | "undecided"
    smooth_nonlinear: bool  # d_F < inf
    general_lpt_nonlinear: bool | None  # None when undecided
    strictly_nonlinear: bool | None
    implications_hold: bool | None
    d_F: float
    evidence: dict = field(default_factory=dict)


def check_definitions(flux: FluxExpr, M: float, kmax: int | None = None) -> Classification:
    report = d_F_global(flux, M, kmax=kmax)
    smooth = report.finite
    polys = [_as_poly(c) for c in flux.components]
    if all(p is not None for p in polys):
        cls = "poly"
    elif all(_is_trig_poly(c) for c in flux.components):
        cls = "trig"
    else:
        cls = "undecided"
    d = flux.d
    if cls == "undecided":
        # sampled evidence only: numerical rank of value samples
        us = np.linspace(-M, M, 41)
        D = velocity_derivatives(flux, us, 1)  # (2, n, d)
        lpt = _coefficient_rank([np.ones_like(us)] + [D[0][:, i] for i in range(d)])
        ee = _coefficient_rank([D[1][:, i] for i in range(d)])
        return Classification(
            str(flux.name or flux), "undecided", smooth, None, None, None, report.d_F,
            evidence={"sampled_rank_lpt": lpt, "sampled_rank_ee": ee, "samples": len(us)},
        )
    order = max(4 * d + 8, 16)
    r_lpt = _function_rank(flux, cls, M, "lpt", order)
    r_ee = _function_rank(flux, cls, M, "ee", order)
    lpt = r_lpt == d + 1
    ee = r_ee == d
    audit = (not smooth or lpt) and (not lpt or ee) and (smooth == lpt == ee)
    return Classification(
        str(flux.name or flux),
        "polynomial" if cls == "poly" else "trig-polynomial",
        smooth, lpt, ee, audit, report.d_F,
        evidence={"rank_lpt": r_lpt, "rank_ee": r_ee},
    )
