"""Planar high-frequency waves u_eps = u_bar + eps U_eps(t, phi(t, x) / eps^gamma).

For planar data the multi-D entropy solution is exactly the 1-D profile
solution composed with the eikonal phase, so every sweep here works on the
phase period; the split 2-D solver is only a cross-check of that reduction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .fitting import ScalingFit, loglog_fit
from .flux import FluxExpr, velocity, velocity_derivatives
from .profile import (
    EOTable,
    InitialProfile,
    ProfileFlux,
    characteristics_at,
    limit_flux,
    periodic_interp,
    psi_eps,
    shock_time,
    solve_entropy_fv,
)

DEFAULT_EPS = tuple(2.0 ** -k for k in range(3, 10))
ORTHO_TOL = 1e-9


def compatibility_order(flux: FluxExpr, u_bar: float, v, tol: float = ORTHO_TOL, kmax: int = 12):
    """Smallest j >= 1 with |a^(j)(u_bar).v| > tol |a^(j)(u_bar)| |v|.

    Returns math.inf (the saturated marker) when no j <= kmax qualifies.
    """
    v = np.asarray(v, dtype=float)
    if not np.any(v):
        raise ValueError("v must be nonzero")
    rows = velocity_derivatives(flux, np.array(float(u_bar)), kmax)
    nv = np.linalg.norm(v)
    for j in range(1, kmax + 1):
        if abs(rows[j] @ v) > tol * np.linalg.norm(rows[j]) * nv:
            return j
    return math.inf


@dataclass(frozen=True)
class Phase:
    """phi(t, x) = v.x - speed t with speed = a(u_bar).v."""

    v: tuple[float, ...]
    speed: float

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return np.tensordot(x, np.asarray(self.v), axes=([-1], [0])) - self.speed * np.asarray(t)


def eikonal_phase(flux: FluxExpr, u_bar: float, v) -> Phase:
    v = np.asarray(v, dtype=float)
    return Phase(tuple(v.tolist()), float(velocity(flux, np.array(float(u_bar))) @ v))


@dataclass
class WaveSetup:
    flux: FluxExpr
    u_bar: float
    v: Sequence[float]
    gamma: float
    M: float = 1.0
    q: int | None = None
    profile: InitialProfile = field(default_factory=InitialProfile)
    eps_list: Sequence[float] = DEFAULT_EPS

    def __post_init__(self):
        self.v = np.asarray(self.v, dtype=float)
        if self.v.shape != (self.flux.d,) or not np.any(self.v):
            raise ValueError("v must be a nonzero d-vector")
        if self.gamma <= 1:
            raise ValueError("gamma must exceed 1")
        if self.q is None:
            self.q = math.ceil(self.gamma - 1e-12)
        if not (self.q - 1 < self.gamma <= self.q + 1e-12):
            raise ValueError("need q - 1 < gamma <= q")
        eps = list(self.eps_list)
        if any(e <= 0 or e > 1 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise ValueError("eps_list must be decreasing values in (0, 1]")
        lo, hi = self.profile.bounds()
        if abs(self.u_bar) + max(eps) * max(abs(lo), abs(hi)) > self.M + 1e-12:
            raise ValueError("amplitude guard |u_bar| + eps max|U0| <= M violated")

    @property
    def compatible(self) -> bool:
        return compatibility_order(self.flux, self.u_bar, self.v) >= self.q

    @property
    def r(self) -> float:
        return 1.0 if math.isclose(self.gamma, self.q) else self.q - self.gamma

    @property
    def phase(self) -> Phase:
        return eikonal_phase(self.flux, self.u_bar, self.v)

    def psi(self, eps: float) -> ProfileFlux:
        return psi_eps(self.flux, self.u_bar, self.v, self.gamma, eps)

    def limit(self) -> ProfileFlux:
        return limit_flux(self.flux, self.u_bar, self.v, self.gamma, self.q)

    def to_dict(self) -> dict:
        return {
            "flux": str(self.flux), "u_bar": self.u_bar, "v": self.v.tolist(), "gamma": self.gamma,
            "M": self.M, "q": self.q, "profile": self.profile.to_dict(), "eps_list": list(self.eps_list),
        }


# -- profile evaluation -------------------------------------------------------


def profile_values(psi: ProfileFlux, u0: InitialProfile, t: float, theta, N_fv: int = 2048, t_star=None):
    """U(t, theta): characteristics before 0.95 T*, finite volumes (interpolated) after."""
    T = shock_time(psi, u0) if t_star is None else t_star
    if t < 0.95 * T:
        return characteristics_at(psi, u0, t, theta, T)[0], "characteristics"
    traj = solve_entropy_fv(psi, u0, t, N_fv)
    return periodic_interp(traj.fields[0].values, theta), "finite-volume"


@dataclass
class Field2D:
    """Cell-centred values on a periodic box [0, L_1) x ... (1-D or 2-D)."""

    values: np.ndarray
    lengths: tuple[float, ...]
    t: float = 0.0

    @property
    def shape(self):
        return self.values.shape

    def centers(self) -> np.ndarray:
        axes = [(np.arange(n) + 0.5) * L / n for n, L in zip(self.values.shape, self.lengths)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    def mean(self) -> float:
        return float(np.mean(self.values))


def commensurate_box(setup: WaveSetup, eps: float, n_periods: int | None = None) -> tuple[float, ...]:
    """Box sides holding a whole number of phase periods eps^gamma / |v_i| along each axis."""
    out = []
    for vi in setup.v:
        if vi == 0:
            out.append(1.0)
            continue
        P = eps**setup.gamma / abs(vi)
        n = n_periods if n_periods is not None else math.ceil(1.0 / P - 1e-9)
        out.append(n * P)
    return tuple(out)


def build_wave(
    setup: WaveSetup, eps: float, t: float, N: int = 128, n_periods: int | None = 1, N_fv: int = 2048
) -> Field2D:
    """u_eps(t, x) on a commensurate periodic box with N cells per side."""
    if setup.flux.d > 2:
        raise NotImplementedError("grids are built for d <= 2 only; sweeps use the reduction")
    L = commensurate_box(setup, eps, n_periods)
    empty = Field2D(np.zeros((N,) * setup.flux.d), L, t)
    x = empty.centers()
    theta = setup.phase(t, x) / eps**setup.gamma
    U, _ = profile_values(setup.psi(eps), setup.profile, t, np.mod(theta, 1.0), N_fv)
    return Field2D(setup.u_bar + eps * U, L, t)


# -- 2-D split solver ---------------------------------------------------------


def _component_flux(flux: FluxExpr, i: int) -> ProfileFlux:
    return ProfileFlux("expr", expr=flux.components[i])


def solve_fv_2d(
    flux: FluxExpr,
    initial: Field2D,
    T: float,
    cfl: float = 0.9,
    periods: Sequence[float] | None = None,
    table_size: int = 4096,
) -> Field2D:
    """Dimensionally split Engquist-Osher on a periodic box (d = 2).

    Steps alternate the sweep order (x1 then x2, then x2 then x1).  When
    ``periods`` (phase period along each axis, 0 for none) is given, the box
    must hold a whole number of them.
    """
    if flux.d != 2 or initial.values.ndim != 2:
        raise ValueError("solve_fv_2d needs d = 2")
    if not 0 < cfl <= 0.9:
        raise ValueError("cfl must lie in (0, 0.9]")
    if periods is not None:
        for L, P in zip(initial.lengths, periods):
            if P and abs(L / P - round(L / P)) > 1e-9 * max(1.0, L / P):
                raise ValueError("box is not commensurate with the phase")
    u = np.array(initial.values, dtype=float)
    h = [L / n for L, n in zip(initial.lengths, u.shape)]
    lo, hi = float(u.min()), float(u.max())
    tables = [EOTable(_component_flux(flux, i), lo, hi, table_size) for i in range(2)]
    t, n = 0.0, 0
    with np.errstate(over="raise", invalid="raise", divide="raise", under="ignore"):
        while t < T:
            speeds = [tb.max_speed(lo, hi) for tb in tables]
            rates = [s / hh for s, hh in zip(speeds, h)]
            dt = T - t if max(rates) == 0 else min(cfl / max(rates), T - t)
            order = (0, 1) if n % 2 == 0 else (1, 0)
            for ax in order:
                Fh = tables[ax].flux(u, np.roll(u, -1, axis=ax))
                u = u - dt / h[ax] * (Fh - np.roll(Fh, 1, axis=ax))
            t = T if dt == T - t else t + dt
            n += 1
    return Field2D(u, initial.lengths, T)


# -- sweeps -------------------------------------------------------------------


@dataclass
class SweepResult:
    eps: list[float]
    values: list[float]
    fit: ScalingFit | None
    exact: bool = False
    note: str = ""
    records: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eps": self.eps, "values": self.values, "exact": self.exact, "note": self.note,
            "fit": None if self.fit is None else self.fit.to_dict(), "records": self.records,
        }


def _c1_norm(D: np.ndarray, ts: np.ndarray) -> tuple[float, float, float]:
    """sup|D|, sup|D_t|, sup|D_theta| for D sampled on (time, periodic theta) grids."""
    N = D.shape[1]
    Dth = (np.roll(D, -1, axis=1) - np.roll(D, 1, axis=1)) * (N / 2.0)
    Dt = np.gradient(D, ts, axis=0, edge_order=2) if len(ts) > 2 else np.zeros_like(D)
    return float(np.abs(D).max()), float(np.abs(Dt).max()), float(np.abs(Dth).max())


def uniform_preshock_time(setup: WaveSetup) -> float:
    """T0 = min over the eps list (and the limit profile) of the shock time."""
    times = [shock_time(setup.psi(e), setup.profile) for e in setup.eps_list]
    times.append(shock_time(setup.limit(), setup.profile))
    return min(times)


def wkb_error_sweep(
    setup: WaveSetup, t_eval: float, norm: str = "C1", N: int = 512, n_t: int = 33, exact_tol: float = 1e-10
) -> SweepResult:
    """eps-scaling of the distance between u_eps and u_bar + eps U(t, phi/eps^gamma).

    The C1 norm is sup|D| + sup|D_t| + sup|D_theta| over [0, t_eval] x one
    phase period with D = U_eps - U, so the reported error is eps times it.
    When every error is below ``exact_tol`` the expansion is exact for this
    flux and no slope is fitted.
    """
    if norm not in ("sup", "C1"):
        raise ValueError("norm must be 'sup' or 'C1'")
    if not setup.compatible:
        raise ValueError("compatibility condition fails; use cancellation_sweep")
    T0 = uniform_preshock_time(setup)
    if t_eval >= 0.95 * T0:
        raise ValueError(f"t_eval = {t_eval:g} is past the uniform pre-shock time 0.95 T0 = {0.95 * T0:g}")
    lim = setup.limit()
    theta = (np.arange(N) + 0.5) / N
    ts = np.linspace(0.0, t_eval, n_t) if norm == "C1" else np.array([t_eval])
    T_lim = shock_time(lim, setup.profile)
    U = np.stack([characteristics_at(lim, setup.profile, t, theta, T_lim)[0] for t in ts])
    errs, records = [], []
    for e in setup.eps_list:
        psi = setup.psi(e)
        Te = shock_time(psi, setup.profile)
        Ue = np.stack([characteristics_at(psi, setup.profile, t, theta, Te)[0] for t in ts])
        parts = _c1_norm(Ue - U, ts)
        total = parts[0] if norm == "sup" else sum(parts)
        errs.append(e * total)
        records.append({"eps": e, "error": e * total, "sup": parts[0], "dt": parts[1], "dtheta": parts[2],
                        "t_star": Te})
    errs_a = np.array(errs)
    if np.all(errs_a <= exact_tol):
        return SweepResult(list(setup.eps_list), errs, None, True,
                           "errors at roundoff level: psi_eps coincides with the limit flux", records)
    fit = loglog_fit(np.array(setup.eps_list), np.maximum(errs_a, np.finfo(float).tiny))
    fit.extra = {"expected_slope": 1 + setup.r, "T0": T0, "t_eval": t_eval}
    return SweepResult(list(setup.eps_list), errs, fit, False, "", records)


def cancellation_sweep(setup: WaveSetup, t_eval: float, N: int = 2048, cfl: float = 0.9) -> SweepResult:
    """ratio(eps) = |u_eps - u_bar - eps mean(U0)|_L1(box) / (eps |box|) at t_eval.

    On a commensurate box the L1 average of a planar wave is the average
    over one phase period, so the ratio is mean_theta |U_eps(t_eval) - mean U0|.
    """
    if setup.compatible:
        warnings.warn("compatibility condition holds: no cancellation is expected", stacklevel=2)
    mean0 = float(setup.profile.cell_averages(N).mean())
    ratios, records = [], []
    for e in setup.eps_list:
        psi = setup.psi(e)
        Te = shock_time(psi, setup.profile)
        if t_eval < Te:
            warnings.warn(f"t_eval precedes the shock time {Te:g} for eps = {e:g}", stacklevel=2)
        traj = solve_entropy_fv(psi, setup.profile, t_eval, N, cfl)
        U = traj.fields[0].values
        ratio = float(np.mean(np.abs(U - mean0)))
        ratios.append(ratio)
        records.append({"eps": e, "ratio": ratio, "t_star": Te, "steps": traj.steps})
    r = np.array(ratios)
    fit = loglog_fit(np.array(setup.eps_list), r) if np.all(r > 0) else None
    factors = (r[1:] / r[:-1]).tolist() if np.all(r[:-1] > 0) else []
    res = SweepResult(list(setup.eps_list), ratios, fit, bool(np.all(r == 0)), "", records)
    res.records.append({"halving_factors": factors})
    return res


def planar_cross_check(
    setup: WaveSetup, eps: float, t: float, N: int, cfl: float = 0.9
) -> dict:
    """2-D split solve of planar data vs the 1-D reduction on a one-period box.

    Returns the L1 distance (box average) between the two and the 1-D
    self-convergence error eps |U_N - U_2N|_L1 of the reduced solver.
    """
    initial = build_wave(setup, eps, 0.0, N=N, n_periods=1)
    periods = [eps**setup.gamma / abs(vi) if vi else 0.0 for vi in setup.v]
    two_d = solve_fv_2d(setup.flux, initial, t, cfl, periods)
    psi = setup.psi(eps)
    U_N = solve_entropy_fv(psi, setup.profile, t, N, cfl).fields[0].values
    U_2N = solve_entropy_fv(psi, setup.profile, t, 2 * N, cfl).fields[0].values
    self_err = eps * float(np.mean(np.abs(U_N - U_2N.reshape(N, 2).mean(axis=1))))
    theta = np.mod(setup.phase(t, two_d.centers()) / eps**setup.gamma, 1.0)
    reduced = setup.u_bar + eps * periodic_interp(U_2N, theta)
    dist = float(np.mean(np.abs(two_d.values - reduced)))
    dist_N = float(np.mean(np.abs(two_d.values - (setup.u_bar + eps * periodic_interp(U_N, theta)))))
    return {"N": N, "eps": eps, "t": t, "distance": dist, "distance_to_N": dist_N, "self_convergence": self_err,
            "mean_drift": abs(two_d.mean() - initial.mean())}


# -- smoothing dichotomy ------------------------------------------------------


@dataclass
class SmoothingResult:
    s: float
    p: float
    t_eval: float
    eps: list[float]
    values: list[float]
    fit: ScalingFit
    expected_slope: float
    verdict: str

    def to_dict(self) -> dict:
        return {"s": self.s, "p": self.p, "t_eval": self.t_eval, "eps": self.eps, "values": self.values,
                "fit": self.fit.to_dict(), "expected_slope": self.expected_slope, "verdict": self.verdict}


def smoothing_sweep(
    setup: WaveSetup, s_values: Sequence[float], t_eval: float, p: float = 1.0, A: float = 1.0,
    N: int = 1024, slope_tol: float = 0.1,
) -> list[SmoothingResult]:
    """Fitted eps-slope of the W^{s,p} semi-norm of u_eps(t_eval, .) over Q(0, A).

    u_eps(t, x) = u_bar + eps U_eps(t, (v.x - c t) / eps^gamma) is planar, so
    each value is one reduced 1-D computation; the expected slope is
    1 - s gamma.  The verdict is "bounded" when the fitted slope is at least
    -slope_tol and "unbounded" otherwise.
    """
    from .sobolev import PlanarField, fit_scaling, seminorm_box

    theta = np.arange(N) / N
    c = setup.phase.speed
    v = setup.v
    shift = c * t_eval * v / float(v @ v)  # v.shift = c t
    samples = []
    for e in setup.eps_list:
        psi = setup.psi(e)
        T = shock_time(psi, setup.profile)
        U, how = profile_values(psi, setup.profile, t_eval, theta, t_star=T)
        samples.append((e, U, how == "characteristics"))
    out = []
    for s in s_values:
        pairs = []
        for e, U, smooth in samples:
            f = PlanarField(np.asarray(U), tuple(v.tolist()), e**setup.gamma, setup.u_bar, e, smooth)
            pairs.append((e, seminorm_box(f, s, p, A, center=-shift).value))
        fit = fit_scaling(pairs, beta=s * setup.gamma - 1)
        verdict = "bounded" if fit.slope >= -slope_tol else "unbounded"
        out.append(SmoothingResult(s, p, t_eval, [e for e, _ in pairs], [val for _, val in pairs], fit,
                                   1 - s * setup.gamma, verdict))
    return out
