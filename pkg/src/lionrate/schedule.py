"""Theory-prescribed LION hyperparameters.

Given smoothness ``L``, initial gap ``delta = f(theta^1) - f_star`` and noise
scale ``sigma``, the schedule is

    beta1 = 1 - c1 / sqrt(K),  beta2 = 1 - c2 / sqrt(K),
    eta   = c3 / (sqrt(d) * K**0.75),

with ``c1 = c2 = sqrt(L * delta) / sigma`` and
``c3 = delta**0.75 / (L**0.25 * sigma**0.5)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from lionrate.errors import BudgetError, InvalidInputError
from lionrate.optimizers import LionConfig
from lionrate.problems import Problem


@dataclass(frozen=True)
class TheoryConstants:
    c1: float
    c2: float
    c3: float
    L: float
    delta: float
    sigma: float

    def __post_init__(self):
        for name in ("c1", "c2", "c3"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise InvalidInputError(f"{name} must be positive and finite, got {v}")
        if not self.L > 0:
            raise InvalidInputError("L must be positive")
        if self.delta < 0 or self.sigma < 0:
            raise InvalidInputError("delta and sigma must be >= 0")

    @property
    def beta_floor(self) -> float:
        """Smallest K for which both betas are nonnegative."""
        return max(self.c1 ** 2, self.c2 ** 2)


def _require_positive(**kwargs):
    for k, v in kwargs.items():
        if not (v > 0 and math.isfinite(v)):
            raise InvalidInputError(f"{k} must be positive and finite, got {v}")


def corollary_constants(L: float, delta: float, sigma: float) -> TheoryConstants:
    _require_positive(L=L, delta=delta, sigma=sigma)
    c = math.sqrt(L * delta) / sigma
    c3 = delta ** 0.75 / (L ** 0.25 * math.sqrt(sigma))
    return TheoryConstants(c, c, c3, L, delta, sigma)


def min_budget(L: float, delta: float, sigma: float) -> int:
    """Smallest integer K admitted by the corollary's iteration floor."""
    _require_positive(L=L, delta=delta, sigma=sigma)
    a = sigma ** 6 / (L ** 3 * delta ** 3)
    b = L * delta / sigma ** 2
    return max(1, math.ceil(_snap(max(a, b))))


def _snap(x: float) -> float:
    # guard ceil() against 1.0000000000000002-style rounding
    r = round(x)
    return float(r) if abs(x - r) <= 1e-9 * max(1.0, abs(x)) else x


def instantiate(tc: TheoryConstants, K: int, d: int, lam: float = 0.0,
                enforce_floor: bool = True) -> LionConfig:
    """Build the LionConfig for budget ``K`` and dimension ``d``.

    Raises :class:`BudgetError` when K is below the beta floor ``max(c1^2, c2^2)``
    or (with ``enforce_floor``) below :func:`min_budget` of the constants' inputs.
    """
    if d < 1:
        raise InvalidInputError("d must be >= 1")
    if K < 1:
        raise BudgetError("K must be >= 1")
    floor_beta = _snap(tc.beta_floor)
    if K < floor_beta:
        raise BudgetError(
            f"K={K} below beta floor max(c1^2, c2^2)={tc.beta_floor:.6g}: betas would be negative")
    if enforce_floor and tc.delta > 0 and tc.sigma > 0:
        kmin = min_budget(tc.L, tc.delta, tc.sigma)
        if K < kmin:
            raise BudgetError(f"K={K} below corollary iteration floor K_min={kmin}")
    sk = math.sqrt(K)
    beta1 = max(0.0, 1.0 - tc.c1 / sk)
    beta2 = max(0.0, 1.0 - tc.c2 / sk)
    eta = tc.c3 / (math.sqrt(d) * K ** 0.75)
    return LionConfig(beta1=beta1, beta2=beta2, eta=eta, lam=lam, K=K)


def f_trajectory_level(tc: TheoryConstants, f1: float, f_star: float) -> float:
    """Upper bound on ``E f(theta^k) - f_star`` along the whole run."""
    c1, c2, c3, L, s = tc.c1, tc.c2, tc.c3, tc.L, tc.sigma
    return ((f1 - f_star) + 2 * c3 * s / c2 + 4 * L * c3 ** 2 / c2
            + 2 * c3 * s * (2 * c1 + c2) / math.sqrt(c2) + 2 * L * c3 ** 2)


def choose_lambda_unconstrained(p: Problem, tc: TheoryConstants, theta1_f: float) -> float:
    """Pick ``lam = 1/(2C)`` where C bounds |theta|_inf on the trajectory's sublevel set.

    Requires the problem to expose a closed-form ``sublevel_radius``.
    """
    if not p.has_sublevel_radius:
        p.sublevel_radius(0.0)  # raises UnsupportedProblemError
    f_max = f_trajectory_level(tc, theta1_f, p.f_star_lower)
    C = p.sublevel_radius(p.f_star_lower + f_max)
    if not C > 0:
        raise InvalidInputError("sublevel radius is zero; cannot choose lambda")
    return 1.0 / (2.0 * C)
