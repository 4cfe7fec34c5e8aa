"""LION and SGD as pure step functions over explicit state."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from lionrate.errors import DimensionError, InvalidInputError
from lionrate.numerics import ParamVector, as_vector


@dataclass(frozen=True)
class LionConfig:
    beta1: float
    beta2: float
    eta: float
    lam: float = 0.0
    K: int = 1

    def __post_init__(self):
        if not 0.0 <= self.beta1 < 1.0:
            raise InvalidInputError(f"beta1 must lie in [0, 1), got {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise InvalidInputError(f"beta2 must lie in [0, 1), got {self.beta2}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise InvalidInputError(f"eta must be positive, got {self.eta}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise InvalidInputError(f"lam must be >= 0, got {self.lam}")
        if self.K < 1:
            raise InvalidInputError("K must be >= 1")


@dataclass(frozen=True)
class SgdConfig:
    eta: float

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise InvalidInputError(f"eta must be positive, got {self.eta}")


@dataclass(frozen=True)
class LionState:
    """Iterate ``theta`` (k-th point), momentum ``m^{k-1}``, and the index k."""

    theta: ParamVector
    momentum: ParamVector
    step_index: int = 1

    def __post_init__(self):
        if self.theta.shape != self.momentum.shape:
            raise DimensionError("theta and momentum dimensions differ")


def init_state(theta0, g1) -> LionState:
    """Start at ``theta0`` with ``m^0 = g^1`` (the first oracle sample)."""
    theta0 = as_vector(theta0, name="theta0")
    g1 = as_vector(g1, name="g1")
    if theta0.shape != g1.shape:
        raise DimensionError("theta0 and g1 dimensions differ")
    return LionState(theta0.copy(), g1.copy(), 1)


def init_state_zero(theta0) -> LionState:
    theta0 = as_vector(theta0, name="theta0")
    return LionState(theta0.copy(), np.zeros_like(theta0), 1)


def lion_step(state: LionState, g, cfg: LionConfig) -> tuple[LionState, ParamVector]:
    """One LION iteration.

    Returns the next state and the interpolated momentum
    ``c = beta1 * m + (1 - beta1) * g`` whose sign drove the update.
    """
    g = np.asarray(g, dtype=np.float64)
    if g.shape != state.theta.shape:
        raise DimensionError(f"gradient dim {g.shape} != theta dim {state.theta.shape}")
    if not np.all(np.isfinite(g)):
        raise InvalidInputError("gradient sample has non-finite entries")
    m, theta = state.momentum, state.theta
    c = cfg.beta1 * m + (1.0 - cfg.beta1) * g
    theta_next = theta - cfg.eta * (np.sign(c) + cfg.lam * theta)
    m_next = cfg.beta2 * m + (1.0 - cfg.beta2) * g
    return LionState(theta_next, m_next, state.step_index + 1), c


def sgd_step(theta, g, cfg: SgdConfig) -> ParamVector:
    theta = np.asarray(theta, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if g.shape != theta.shape:
        raise DimensionError(f"gradient dim {g.shape} != theta dim {theta.shape}")
    return theta - cfg.eta * g
