"""Experiment configs: one JSON object per run, validated field by field."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields

KINDS = ("analyze-flux", "fit-alpha", "profile", "wkb-sweep", "cancellation", "sobolev-scaling", "smoothing-bound")
FORMATS = ("json", "csv", "svg")
# fields that do not change results and stay out of the config hash
RUNTIME_ONLY = ("out", "formats", "threads")


class ConfigError(ValueError):
    """Validation failure; ``problems`` maps field name to message."""

    def __init__(self, problems: dict[str, str]):
        self.problems = problems
        super().__init__("; ".join(f"{k}: {v}" for k, v in problems.items()))


@dataclass
class ExperimentConfig:
    kind: str
    flux: str = "[u^2/2, u^3/3]"
    M: float = 1.0
    u_bar: float | None = 0.0
    v: list[float] | None = None
    gamma: float = 2.0
    q: int | None = None
    profile: str = "sine(amp=1,k=1)"
    s: list[float] = field(default_factory=lambda: [0.25, 0.5])
    p: float = 1.0
    A: float = 1.0
    eps: list[float] = field(default_factory=lambda: [2.0**-k for k in range(3, 10)])
    N: int = 1024
    t_eval: float | None = None
    t_factor: float = 0.4
    deltas: list[float] = field(default_factory=lambda: [10.0 ** (-1 - 3 * i / 7) for i in range(8)])
    tolerances: dict = field(default_factory=dict)
    seed: int = 0
    threads: int = 1
    out: str = "results"
    formats: list[str] = field(default_factory=lambda: ["json", "csv"])

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError({k: "unknown field" for k in unknown})
        if "kind" not in data:
            raise ConfigError({"kind": "missing"})
        cfg = cls(**data)
        try:
            cfg.validate()
        except TypeError as exc:
            bad = {}
            for f in fields(cls):
                val = getattr(cfg, f.name)
                if f.name in data and isinstance(val, str) and f.name not in ("kind", "flux", "profile", "out"):
                    bad[f.name] = f"wrong type ({type(val).__name__})"
            raise ConfigError(bad or {"<config>": str(exc)})
        return cfg

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError({"<file>": f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"})
        if not isinstance(data, dict):
            raise ConfigError({"<file>": "top level must be an object"})
        return cls.from_dict(data)

    def hash(self) -> str:
        d = {k: v for k, v in self.to_dict().items() if k not in RUNTIME_ONLY}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    # -- validation -----------------------------------------------------------

    def validate(self) -> None:
        bad: dict[str, str] = {}
        if self.kind not in KINDS:
            bad["kind"] = f"must be one of {', '.join(KINDS)}"
        if not (isinstance(self.M, (int, float)) and self.M > 0):
            bad["M"] = "must be positive"
        if self.gamma <= 1:
            bad["gamma"] = "must exceed 1"
        if self.q is not None and not (self.q - 1 < self.gamma <= self.q):
            bad["q"] = "need q - 1 < gamma <= q"
        if self.p < 1:
            bad["p"] = "must be >= 1"
        if not self.s or any(not 0 < x < 1 for x in self.s):
            bad["s"] = "every s must lie in (0, 1)"
        if self.A <= 0.5:
            bad["A"] = "must exceed 1/2"
        if len(self.eps) < 4 or any(e <= 0 or e > 1 for e in self.eps) or any(
            b >= a for a, b in zip(self.eps, self.eps[1:])
        ):
            bad["eps"] = "need at least 4 strictly decreasing values in (0, 1]"
        if not isinstance(self.N, int) or self.N < 64:
            bad["N"] = "must be an integer >= 64"
        if self.t_eval is not None and not (isinstance(self.t_eval, (int, float)) and math.isfinite(self.t_eval)):
            bad["t_eval"] = "must be a finite number"
        if not 0 < self.t_factor:
            bad["t_factor"] = "must be positive"
        if len(self.deltas) < 3 or any(d <= 0 for d in self.deltas):
            bad["deltas"] = "need at least 3 positive values"
        if self.v is not None and (len(self.v) == 0 or not any(self.v)):
            bad["v"] = "must be a nonzero vector"
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 2**64:
            bad["seed"] = "must be an unsigned 64-bit integer"
        if not isinstance(self.threads, int) or self.threads < 1:
            bad["threads"] = "must be a positive integer"
        if any(f not in FORMATS for f in self.formats):
            bad["formats"] = f"subset of {', '.join(FORMATS)}"
        if not isinstance(self.tolerances, dict):
            bad["tolerances"] = "must be an object"
        if bad:
            raise ConfigError(bad)

    def tol(self, name: str, default: float) -> float:
        return float(self.tolerances.get(name, default))
