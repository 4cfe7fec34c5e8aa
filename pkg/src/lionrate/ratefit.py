"""Power-law slope estimation in log-log space."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from lionrate.errors import InvalidInputError


@dataclass(frozen=True)
class LogLogFit:
    slope: float
    intercept: float
    r_squared: float


def fit_loglog(points: Sequence[tuple[float, float]]) -> LogLogFit:
    """Ordinary least squares of ``ln y`` on ``ln x``."""
    if len(points) < 2:
        raise InvalidInputError("need at least 2 points to fit a slope")
    x = np.array([p[0] for p in points], dtype=np.float64)
    y = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(~np.isfinite(x)) or np.any(~np.isfinite(y)) or np.any(x <= 0) or np.any(y <= 0):
        raise InvalidInputError("log-log fit needs finite, strictly positive x and y")
    lx, ly = np.log(x), np.log(y)
    if np.ptp(lx) == 0:
        raise InvalidInputError("x values must not all coincide")
    mx, my = lx.mean(), ly.mean()
    sxx = float(np.sum((lx - mx) ** 2))
    sxy = float(np.sum((lx - mx) * (ly - my)))
    slope = sxy / sxx
    intercept = float(my - slope * mx)
    resid = ly - (intercept + slope * lx)
    syy = float(np.sum((ly - my) ** 2))
    r2 = 1.0 if syy == 0.0 else 1.0 - float(np.sum(resid ** 2)) / syy
    return LogLogFit(float(slope), intercept, r2)


@dataclass
class SweepPoint:
    axis_value: float
    mean_metric: float
    std_error: float
    bound_value: float
    mean_ratio: float = math.nan
    n_seeds: int = 0
    n_aborted: int = 0


@dataclass
class SweepResult:
    axis: str  # "K" or "d"
    metric: str
    points: list[SweepPoint] = field(default_factory=list)
    fit: Optional[LogLogFit] = None
    bound_fit: Optional[LogLogFit] = None
    ratio_fit: Optional[LogLogFit] = None

    @property
    def fitted_slope(self) -> float:
        return self.fit.slope

    @property
    def fitted_intercept(self) -> float:
        return self.fit.intercept

    def refit(self) -> None:
        pts = self.points
        self.fit = fit_loglog([(p.axis_value, p.mean_metric) for p in pts])
        self.bound_fit = fit_loglog([(p.axis_value, p.bound_value) for p in pts])
        if all(math.isfinite(p.mean_ratio) and p.mean_ratio > 0 for p in pts):
            self.ratio_fit = fit_loglog([(p.axis_value, p.mean_ratio) for p in pts])

    def all_below_bound(self) -> bool:
        return all(p.mean_metric <= p.bound_value for p in self.points)

    def span_decades(self) -> float:
        xs = [p.axis_value for p in self.points]
        return math.log10(max(xs) / min(xs))

    def meets_design_span(self) -> bool:
        """At least 4 points over 2 decades (K) or 1.5 decades (d)."""
        need = 2.0 if self.axis == "K" else 1.5
        return len(self.points) >= 4 and self.span_decades() >= need - 1e-12
