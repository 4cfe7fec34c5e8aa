"""Per-step certificate quantities and closed-form convergence bounds.

All bounds are pure functions. Empirical quantities are compared against
them only after averaging over seeds, since the bounds hold in expectation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from lionrate.errors import DimensionError, InvalidInputError
from lionrate.numerics import as_vector, norm_l2
from lionrate.schedule import TheoryConstants, f_trajectory_level, min_budget


@dataclass(frozen=True)
class StepMetrics:
    k: int
    f_val: float
    grad_l1: float
    grad_l2: float
    ratio: Optional[float]  # None when the gradient is zero
    kkt_residual: float
    theta_linf: float
    delta_l2: float
    feasible: bool


@dataclass(frozen=True)
class RunAggregates:
    avg_kkt_residual: float
    avg_grad_l1: float
    avg_delta: float
    max_theta_linf: float
    min_f: float
    max_f: float
    final_f: float
    mean_ratio: float
    n_steps: int
    min_kkt_residual: float = math.nan


def kkt_residual(theta, grad, lam: float) -> float:
    """``lam * <grad, theta> + |grad|_1``; zero exactly at KKT points of the box problem."""
    theta = as_vector(theta, name="theta")
    grad = as_vector(grad, name="grad")
    if theta.shape != grad.shape:
        raise DimensionError("theta and grad dimensions differ")
    if lam < 0:
        raise InvalidInputError("lam must be >= 0")
    return float(lam * np.dot(grad, theta) + np.sum(np.abs(grad)))


def ratio(grad) -> Optional[float]:
    """``|g|_1 / |g|_2``, or None for the zero vector."""
    g = as_vector(grad, name="grad")
    l2 = norm_l2(g)
    if l2 == 0.0:
        return None
    return float(np.sum(np.abs(g))) / l2


def step_metrics(k: int, f_val: float, theta, grad, c, lam: float) -> StepMetrics:
    theta = as_vector(theta, name="theta")
    grad = as_vector(grad, name="grad")
    l1 = float(np.sum(np.abs(grad)))
    l2 = float(np.linalg.norm(grad))
    linf = float(np.max(np.abs(theta)))
    feasible = True if lam == 0 else linf <= 1.0 / lam + 1e-12
    return StepMetrics(
        k=k, f_val=f_val, grad_l1=l1, grad_l2=l2,
        ratio=None if l2 == 0.0 else l1 / l2,
        kkt_residual=float(lam * np.dot(grad, theta)) + l1,
        theta_linf=linf,
        delta_l2=float(np.linalg.norm(np.asarray(c) - grad)),
        feasible=feasible,
    )


def aggregate(steps: list[StepMetrics]) -> RunAggregates:
    """Fold a full (every-step) list of metrics into run aggregates."""
    if not steps:
        raise InvalidInputError("cannot aggregate an empty run")
    ratios = [s.ratio for s in steps if s.ratio is not None]
    return RunAggregates(
        avg_kkt_residual=math.fsum(s.kkt_residual for s in steps) / len(steps),
        avg_grad_l1=math.fsum(s.grad_l1 for s in steps) / len(steps),
        avg_delta=math.fsum(s.delta_l2 for s in steps) / len(steps),
        max_theta_linf=max(s.theta_linf for s in steps),
        min_f=min(s.f_val for s in steps),
        max_f=max(s.f_val for s in steps),
        final_f=steps[-1].f_val,
        mean_ratio=math.fsum(ratios) / len(ratios) if ratios else math.nan,
        n_steps=len(steps),
        min_kkt_residual=min(s.kkt_residual for s in steps),
    )


# ---------------------------------------------------------------------------
# Closed-form bounds
# ---------------------------------------------------------------------------

def _positive(**kwargs):
    for k, v in kwargs.items():
        if not (v > 0 and math.isfinite(v)):
            raise InvalidInputError(f"{k} must be positive and finite, got {v}")


@dataclass(frozen=True)
class Certificate:
    value: float
    below_floor: bool = False


def corollary1_bound(d: int, K: int, L: float, delta: float, sigma: float) -> float:
    """``15 sqrt(d) (sigma^2 L delta)^(1/4) / K^(1/4)``."""
    _positive(d=d, K=K, L=L, delta=delta, sigma=sigma)
    return 15.0 * math.sqrt(d) * (sigma ** 2 * L * delta) ** 0.25 / K ** 0.25


def corollary1_certificate(d: int, K: int, L: float, delta: float, sigma: float) -> Certificate:
    """Bound plus a flag set when K is below the iteration floor it assumes."""
    return Certificate(corollary1_bound(d, K, L, delta, sigma),
                       below_floor=K < min_budget(L, delta, sigma))


def theorem1_bound(d: int, K: int, tc: TheoryConstants) -> float:
    c1, c2, c3, L, s, delta = tc.c1, tc.c2, tc.c3, tc.L, tc.sigma, tc.delta
    _positive(d=d, K=K)
    sd = math.sqrt(d)
    return (delta * sd / (c3 * K ** 0.25)
            + 2 * s * sd / (c2 * K ** 0.5)
            + 4 * L * c3 * sd / (c2 * K ** 0.25)
            + 2 * s * (2 * c1 + c2) * sd / (math.sqrt(c2) * K ** 0.25)
            + 2 * L * c3 * sd / K ** 0.75)


def lemma2_bound(K: int, beta1: float, beta2: float, eta: float, L: float,
                 sigma: float, d: int) -> float:
    """Upper bound on the run-average of ``E|c^k - grad f(theta^k)|`` when ``m^0 = g^1``."""
    if beta2 >= 1.0:
        raise ZeroDivisionError("beta2 must be < 1")
    if K < 1 or d < 1 or eta < 0 or L < 0 or sigma < 0:
        raise InvalidInputError("lemma2_bound needs K, d >= 1 and nonnegative eta, L, sigma")
    one_m = 1.0 - beta2
    return (sigma / (K * one_m)
            + 2.0 * L * eta * math.sqrt(d) / one_m
            + (abs(beta1 - beta2) + 1.0 - beta1) * sigma / math.sqrt(one_m))


def f_trajectory_bound(tc: TheoryConstants, f1: float, f_star: float) -> float:
    return f_trajectory_level(tc, f1, f_star)


def sgd_reference_bound(K: int, L: float, delta: float, sigma: float) -> float:
    """Decay shape of the SGD rate with its hidden constant set to 1 (reference only)."""
    _positive(K=K, L=L, delta=delta, sigma=sigma)
    return (sigma ** 2 * L * delta) ** 0.25 / K ** 0.25
