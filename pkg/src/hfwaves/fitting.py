"""Log-log least squares for scaling exponents."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass
class ScalingFit:
    """Least-squares line through (log x, log y).

    ``empty`` marks a fit that could not be formed (e.g. every y was zero);
    slope and intercept are then nan.
    """

    log_x: list[float]
    log_y: list[float]
    slope: float
    intercept: float
    max_residual: float
    empty: bool = False
    note: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.log_x, self.log_y))

    def to_dict(self) -> dict:
        return asdict(self)

    def sandwich_ratio(self, beta: float) -> float:
        """max(y x^beta) / min(y x^beta): 1 for an exact power law x^-beta."""
        lx = np.asarray(self.log_x)
        ly = np.asarray(self.log_y)
        scaled = ly + beta * lx
        return float(np.exp(scaled.max() - scaled.min()))


def loglog_fit(x, y, note: str = "") -> ScalingFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D arrays of equal length")
    if np.any(x <= 0):
        raise ValueError("x must be positive")
    keep = y > 0
    if keep.sum() < 2:
        return ScalingFit(
            list(np.log(x)), [float("-inf") if v <= 0 else float(np.log(v)) for v in y],
            float("nan"), float("nan"), float("nan"), empty=True, note=note or "fewer than two positive values",
        )
    if not np.all(keep):
        raise ValueError("non-positive value in scaling data")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    return ScalingFit(lx.tolist(), ly.tolist(), float(slope), float(intercept), float(np.abs(resid).max()), note=note)
