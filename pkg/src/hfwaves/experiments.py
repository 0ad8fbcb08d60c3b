"""End-to-end experiment pipelines behind the command line."""

from __future__ import annotations

import math
import re
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .config import RUNTIME_ONLY, ExperimentConfig
from .flux import CATALOG, catalog_flux, resolve_flux
from .nonlinearity import (
    alpha_sup,
    check_definitions,
    d_F_at,
    d_F_global,
    fit_alpha_empirical,
    worst_direction,
)
from .profile import InitialProfile, detect_blowup_time, expr_flux, psi_eps, shock_time, solve_entropy_fv
from .sobolev import fit_scaling, lp_norm_periodic_1d, seminorm_periodic_1d
from .wave import WaveSetup, cancellation_sweep, smoothing_sweep, uniform_preshock_time, wkb_error_sweep


@dataclass
class Table:
    header: list[str]
    rows: list[list]

    def to_csv(self) -> str:
        lines = [",".join(self.header)]
        for r in self.rows:
            lines.append(",".join(_fmt(x) for x in r))
        return "\n".join(lines) + "\n"


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else str(x)
    return str(x)


@dataclass
class RunRecord:
    config_hash: str
    kind: str
    config: dict
    results: dict
    verdicts: dict[str, bool]
    tables: dict[str, Table] = field(default_factory=dict)
    plots: dict[str, dict] = field(default_factory=dict)
    timestamp: str = ""
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def results_document(self) -> dict:
        """Deterministic part of the record: no timestamp, timing or output location."""
        return jsonable({
            "config_hash": self.config_hash, "kind": self.kind,
            "config": {k: v for k, v in self.config.items() if k not in RUNTIME_ONLY}, "results": self.results,
            "verdicts": self.verdicts, "passed": self.passed,
            "tables": {k: {"header": t.header, "rows": t.rows} for k, t in self.tables.items()},
        })

    def log_line(self) -> dict:
        return jsonable({"config_hash": self.config_hash, "kind": self.kind, "timestamp": self.timestamp,
                         "elapsed_s": round(self.elapsed, 3), "verdicts": self.verdicts, "passed": self.passed})


def jsonable(obj):
    """Plain JSON types; non-finite floats become the strings 'inf', '-inf', 'nan'."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    if isinstance(obj, Fraction):
        return str(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, "to_dict"):
        return jsonable(obj.to_dict())
    return str(obj)


def _catalog_expected(spec: str):
    m = re.fullmatch(r"\s*([\w-]+)\s*(?:\(\s*d\s*=\s*(\d+)\s*\))?\s*", spec)
    if m is None or m.group(1) not in CATALOG:
        return None
    entry = CATALOG[m.group(1)]
    d = int(m.group(2)) if m.group(2) else entry.default_d
    return entry.expected_dF(d)


def alpha_of(dF) -> Fraction:
    return Fraction(0) if math.isinf(dF) else Fraction(1, int(dF))


def _setup(cfg: ExperimentConfig, flux, v=None, gamma=None, q=None, u_bar=None) -> WaveSetup:
    v = cfg.v if v is None else v
    if v is None:
        raise ValueError("v is required for wave experiments")
    return WaveSetup(flux, cfg.u_bar if u_bar is None else u_bar, v, cfg.gamma if gamma is None else gamma, cfg.M,
                     cfg.q if q is None else q, InitialProfile.parse(cfg.profile), cfg.eps)


# -- pipelines ----------------------------------------------------------------


def _analyze_flux(cfg):
    flux = resolve_flux(cfg.flux)
    report = d_F_global(flux, cfg.M)
    frac, a = alpha_sup(report)
    cls = check_definitions(flux, cfg.M)
    results = {"report": report.to_dict(), "alpha_sup": str(frac), "alpha_sup_float": a,
               "classification": {k: getattr(cls, k) for k in ("expression_class", "smooth_nonlinear",
                                                                "general_lpt_nonlinear", "strictly_nonlinear",
                                                                "implications_hold")}}
    verdicts = {}
    exp = _catalog_expected(cfg.flux)
    if exp is not None:
        results["expected_d_F"] = exp
        verdicts["d_F_matches_catalog"] = report.d_F == exp
    if cls.implications_hold is not None:
        verdicts["definition_implications"] = bool(cls.implications_hold)
    table = Table(["u", "d_F"], [[u, k] for u, k in report.samples])
    return results, verdicts, {"d_F_samples": table}, {}


def _fit_alpha(cfg):
    flux = resolve_flux(cfg.flux)
    report = d_F_global(flux, cfg.M)
    fit = fit_alpha_empirical(flux, cfg.M, cfg.deltas, seed=cfg.seed)
    expected = float(alpha_of(report.d_F))
    tol = cfg.tol("alpha", 0.05)
    table = Table(["delta", "max_measure"], [list(r) for r in zip(fit.extra["deltas"], fit.extra["max_measure"])])
    results = {"slope": fit.slope, "expected": expected, "tolerance": tol, "fit": fit.to_dict(),
               "d_F": report.to_dict()["d_F"]}
    verdicts = {"alpha_fit": abs(fit.slope - expected) <= tol}
    plots = {"alpha_fit": {"measure": (fit.extra["deltas"], fit.extra["max_measure"]),
                           "xlabel": "delta", "ylabel": "max |W_delta|"}}
    return results, verdicts, {"alpha_fit": table}, plots


def _profile_psi(cfg):
    flux = resolve_flux(cfg.flux) if cfg.v is not None else None
    if flux is None:
        return expr_flux(cfg.flux), {"psi": cfg.flux}
    return psi_eps(flux, cfg.u_bar, cfg.v, cfg.gamma, cfg.eps[0]), {"eps": cfg.eps[0]}


def _profile(cfg):
    psi, info = _profile_psi(cfg)
    u0 = InitialProfile.parse(cfg.profile)
    T = shock_time(psi, u0)
    times = [cfg.t_eval] if cfg.t_eval is not None else ([0.5 * T, 2.0 * T] if math.isfinite(T) else [1.0])
    traj = solve_entropy_fv(psi, u0, times, cfg.N)
    T_det = detect_blowup_time(psi, u0, N=max(cfg.N, 2048))
    mass0 = float(u0.cell_averages(cfg.N).mean())
    drift = max(abs(f.values.mean() - mass0) for f in traj.fields)
    lo, hi = u0.bounds()
    overshoot = max(max(0.0, f.values.max() - hi, lo - f.values.min()) for f in traj.fields)
    tol = cfg.tol("blowup", 0.05)
    results = {"psi": info, "T_star": T, "T_detected": T_det, "times": times, "mass_drift": drift,
               "max_principle_excess": overshoot, "steps": traj.steps}
    verdicts = {"conservation": drift <= cfg.tol("conservation", 1e-10),
                "max_principle": overshoot <= 1e-12}
    if math.isfinite(T):
        verdicts["blowup_time"] = abs(T_det - T) / T <= tol
    rows = [[f.t, th, u] for f in traj.fields for th, u in zip(f.theta, f.values)]
    plots = {f"profile_t{i}": {"U": (f.theta.tolist(), f.values.tolist()), "xlabel": "theta", "ylabel": "U",
                               "log": False} for i, f in enumerate(traj.fields)}
    return results, verdicts, {"trajectory": Table(["t", "theta", "U"], rows)}, plots


def _wkb(cfg):
    setup = _setup(cfg, resolve_flux(cfg.flux))
    T0 = uniform_preshock_time(setup)
    t_eval = cfg.t_eval if cfg.t_eval is not None else cfg.t_factor * T0
    res = wkb_error_sweep(setup, t_eval, N=min(cfg.N, 512))
    expected = 1 + setup.r
    tol = cfg.tol("slope", 0.2)
    results = {"setup": setup.to_dict(), "T0": T0, "t_eval": t_eval, "sweep": res.to_dict(),
               "expected_slope": expected}
    verdicts = {"wkb_order": True if res.exact else res.fit.slope >= expected - tol}
    table = Table(["eps", "error", "sup", "dt", "dtheta"],
                  [[r["eps"], r["error"], r["sup"], r["dt"], r["dtheta"]] for r in res.records])
    plots = {"wkb_error": {"C1 error": (res.eps, res.values), "xlabel": "eps", "ylabel": "error"}}
    return results, verdicts, {"wkb": table}, plots


def _cancellation(cfg):
    setup = _setup(cfg, resolve_flux(cfg.flux))
    t_eval = cfg.t_eval if cfg.t_eval is not None else 0.5
    res = cancellation_sweep(setup, t_eval, N=cfg.N)
    factors = res.records[-1]["halving_factors"]
    tol = cfg.tol("halving", 0.9)
    results = {"setup": setup.to_dict(), "t_eval": t_eval, "sweep": res.to_dict(), "halving_factors": factors}
    verdicts = {"cancellation": res.exact or (len(factors) > 0 and all(f <= tol for f in factors))}
    table = Table(["eps", "ratio"], [[e, r] for e, r in zip(res.eps, res.values)])
    plots = {"cancellation": {"ratio": (res.eps, res.values), "xlabel": "eps", "ylabel": "L1 ratio"}}
    return results, verdicts, {"cancellation": table}, plots


def _sobolev_scaling(cfg):
    u0 = InitialProfile.parse(cfg.profile)
    v = np.asarray(u0(np.arange(cfg.N) / cfg.N), dtype=float)
    tol = cfg.tol("slope_rel", 0.05)
    results, verdicts, tables, plots = {"per_s": []}, {}, {}, {}
    for s in cfg.s:
        rows, pairs, inside = [], [], True
        for e in cfg.eps:
            L = e**cfg.gamma
            r = seminorm_periodic_1d(v, s, cfg.p, cfg.A, period=L)
            lp = lp_norm_periodic_1d(v, cfg.p, cfg.A, period=L)
            lo, hi = r.extra["sandwich"]
            inside &= lo <= r.value <= hi
            rows.append([e, r.value, lp, r.value + lp, lo, hi])
            pairs.append((e, r.value))
        fit = fit_scaling(pairs, beta=s * cfg.gamma)
        expected = -s * cfg.gamma
        results["per_s"].append({"s": s, "slope": fit.slope, "expected": expected, "fit": fit.to_dict(),
                                 "sandwich_ok": inside})
        verdicts[f"slope_s={s:g}"] = abs(fit.slope - expected) <= tol * abs(expected)
        verdicts[f"sandwich_s={s:g}"] = bool(inside)
        tables[f"sobolev_s={s:g}"] = Table(["epsilon", "seminorm", "lp_norm", "total", "sandwich_lo", "sandwich_hi"],
                                           rows)
        plots[f"sobolev_s={s:g}"] = {"seminorm": ([r[0] for r in rows], [r[1] for r in rows]),
                                     "xlabel": "eps", "ylabel": "seminorm"}
    return results, verdicts, tables, plots


def choose_base_state(flux, d_F, preferred=0.0, fallback=None):
    """u_bar attaining d_F, preferring ``preferred`` (0 keeps catalog null directions axis-aligned)."""
    for u in (preferred, fallback):
        if u is not None and d_F_at(flux, u) == d_F:
            return float(u)
    raise ValueError("no base state attaining d_F was found")


def planar_direction(w: np.ndarray) -> np.ndarray:
    """Spatial part of the worst direction, tiny entries zeroed and scaled to max |v_i| = 1."""
    xi = np.asarray(w[1:], dtype=float)
    xi = np.where(np.abs(xi) < 1e-10 * np.abs(xi).max(), 0.0, xi)
    return xi / np.abs(xi).max()


def _smoothing_bound(cfg):
    flux = resolve_flux(cfg.flux)
    report = d_F_global(flux, cfg.M)
    if not report.finite:
        raise ValueError("d_F is infinite: the flux has no smoothing effect to bound")
    d_F = int(report.d_F)
    u_bar = choose_base_state(flux, d_F, cfg.u_bar if cfg.u_bar is not None else 0.0, report.u_bar)
    w = worst_direction(flux, u_bar, d_F)
    v = planar_direction(w)
    setup = _setup(cfg, flux, v=v.tolist(), gamma=float(d_F), q=d_F, u_bar=u_bar)
    T0 = uniform_preshock_time(setup)
    t_eval = cfg.t_eval if cfg.t_eval is not None else cfg.t_factor * T0
    alpha = float(alpha_of(d_F))
    s_values = [0.75 * alpha, alpha, 1.5 * alpha]
    expected = ["bounded", "bounded", "unbounded"]
    sweeps = smoothing_sweep(setup, s_values, t_eval, p=cfg.p, A=cfg.A, N=cfg.N,
                             slope_tol=cfg.tol("slope", 0.1))
    results = {"d_F": d_F, "alpha_sup": str(alpha_of(d_F)), "u_bar": u_bar, "worst_direction": w.tolist(),
               "v": v.tolist(), "setup": setup.to_dict(), "T0": T0, "t_eval": t_eval,
               "sweeps": [r.to_dict() for r in sweeps], "expected_verdicts": expected}
    verdicts, tables, plots = {}, {}, {}
    for r, want in zip(sweeps, expected):
        key = f"s={r.s:.6g}"
        verdicts[f"{key}:{want}"] = r.verdict == want
        tables[f"smoothing_{key}"] = Table(["eps", "seminorm"], [[e, x] for e, x in zip(r.eps, r.values)])
        plots[f"smoothing_{key}"] = {"seminorm": (r.eps, r.values), "xlabel": "eps", "ylabel": "seminorm"}
    return results, verdicts, tables, plots


PIPELINES = {
    "analyze-flux": _analyze_flux,
    "fit-alpha": _fit_alpha,
    "profile": _profile,
    "wkb-sweep": _wkb,
    "cancellation": _cancellation,
    "sobolev-scaling": _sobolev_scaling,
    "smoothing-bound": _smoothing_bound,
}


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    cfg.validate()
    t0 = time.perf_counter()
    results, verdicts, tables, plots = PIPELINES[cfg.kind](cfg)
    return RunRecord(cfg.hash(), cfg.kind, cfg.to_dict(), results, {k: bool(v) for k, v in verdicts.items()},
                     tables, plots, time.strftime("%Y-%m-%dT%H:%M:%S%z"), time.perf_counter() - t0)


def catalog_listing() -> list[dict]:
    out = []
    for key, entry in CATALOG.items():
        d = entry.default_d
        label = key if key in ("burgers1d", "trig2d") else f"{key}(d={d})"
        dF = entry.expected_dF(d)
        out.append({"key": label, "spec": entry.build(d), "expected_d_F": dF,
                    "alpha_sup": str(alpha_of(dF)), "note": entry.note})
        if key == "power-chain-d":
            dF3 = entry.expected_dF(3)
            out.append({"key": f"{key}(d=3)", "spec": entry.build(3), "expected_d_F": dF3,
                        "alpha_sup": str(alpha_of(dF3)), "note": entry.note})
    return out
