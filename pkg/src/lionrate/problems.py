"""Synthetic smooth objectives and a seeded stochastic gradient oracle.

Each problem carries a certified smoothness constant ``smoothness_L``, a
valid lower bound ``f_star_lower`` on its infimum, and (when coercive with a
closed-form sublevel bound) a function mapping a level ``F`` to an l-inf
radius containing ``{theta : f(theta) <= F}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import expit

from lionrate.errors import DimensionError, DomainError, InvalidInputError, UnsupportedProblemError
from lionrate.numerics import ParamVector, as_vector

# Slack for the opportunistic f >= f_star_lower check and the domain test.
_LOWER_SLACK = 1e-9
_DOMAIN_SLACK = 1e-12


class Problem:
    """Base class. Subclasses implement ``_f`` and ``_grad`` on validated input."""

    name: str = "problem"
    coercive: bool = True

    def __init__(self, dim: int, smoothness_L: float, f_star_lower: float = 0.0,
                 domain_radius: Optional[float] = None):
        if dim < 1:
            raise InvalidInputError("dim must be >= 1")
        if not smoothness_L > 0:
            raise InvalidInputError("smoothness_L must be positive")
        if domain_radius is not None and not domain_radius > 0:
            raise InvalidInputError("domain_radius must be positive")
        self.dim = int(dim)
        self.smoothness_L = float(smoothness_L)
        self.f_star_lower = float(f_star_lower)
        self.domain_radius = None if domain_radius is None else float(domain_radius)

    def _check(self, theta) -> ParamVector:
        theta = as_vector(theta, name="theta")
        if theta.shape[0] != self.dim:
            raise DimensionError(f"{self.name}: expected dim {self.dim}, got {theta.shape[0]}")
        if self.domain_radius is not None:
            r = float(np.max(np.abs(theta)))
            if r > self.domain_radius + _DOMAIN_SLACK:
                raise DomainError(
                    f"{self.name}: |theta|_inf = {r:g} outside certified radius {self.domain_radius:g}")
        return theta

    def f(self, theta) -> float:
        return self._value(self._check(theta))

    def value_and_grad(self, theta) -> tuple[float, ParamVector]:
        """Objective and gradient with a single validation pass."""
        theta = self._check(theta)
        return self._value(theta), self._grad(theta)

    def _value(self, theta: ParamVector) -> float:
        val = float(self._f(theta))
        if not math.isfinite(val):
            raise InvalidInputError(f"{self.name}: objective overflowed")
        assert val >= self.f_star_lower - _LOWER_SLACK * max(1.0, abs(val)), (
            f"{self.name}: f = {val} below declared lower bound {self.f_star_lower}")
        return val

    def grad(self, theta) -> ParamVector:
        theta = self._check(theta)
        return self._grad(theta)

    def sublevel_radius(self, level: float) -> float:
        """l-inf radius of a ball containing ``{f <= level}``."""
        raise UnsupportedProblemError(f"{self.name} has no closed-form sublevel radius")

    @property
    def has_sublevel_radius(self) -> bool:
        return type(self).sublevel_radius is not Problem.sublevel_radius

    def sample_radius(self) -> float:
        """Box radius used when sampling test points."""
        return self.domain_radius if self.domain_radius is not None else 2.0

    def _f(self, theta: ParamVector) -> float:
        raise NotImplementedError

    def _grad(self, theta: ParamVector) -> ParamVector:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, L={self.smoothness_L:g})"


class Quadratic(Problem):
    """``f(theta) = 0.5 * theta^T A theta`` with SPD ``A``.

    ``condition == 1`` gives the identity; otherwise the eigenvalues are spread
    linearly over ``[1, condition]`` under a random rotation drawn from ``seed``.
    """

    name = "quadratic"

    def __init__(self, dim: int, condition: float = 1.0, seed: int = 0):
        if condition < 1:
            raise InvalidInputError("condition must be >= 1")
        self.eigvals = np.linspace(1.0, condition, dim)
        if condition == 1.0:
            self.A = None
        else:
            rng = np.random.default_rng(seed)
            q, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
            self.A = (q * self.eigvals) @ q.T
        self.mu = float(self.eigvals[0])
        super().__init__(dim, smoothness_L=float(self.eigvals[-1]), f_star_lower=0.0)

    def _f(self, theta):
        if self.A is None:
            return 0.5 * float(theta @ theta)
        return 0.5 * float(theta @ (self.A @ theta))

    def _grad(self, theta):
        if self.A is None:
            return theta.copy()
        return self.A @ theta

    def sublevel_radius(self, level):
        # f >= (mu/2)|theta|_2^2 >= (mu/2)|theta|_inf^2
        return math.sqrt(2.0 * max(level, 0.0) / self.mu)


class RastriginSmooth(Problem):
    """``|theta|^2 + a * sum(1 - cos(2 pi theta_i))``; nonconvex, ``L = 2 + 4 pi^2 a``."""

    name = "rastrigin"

    def __init__(self, dim: int, a: float = 1.0):
        if a < 0:
            raise InvalidInputError("rastrigin amplitude a must be >= 0")
        self.a = float(a)
        super().__init__(dim, smoothness_L=2.0 + 4.0 * math.pi ** 2 * self.a, f_star_lower=0.0)

    def _f(self, theta):
        return float(theta @ theta + self.a * np.sum(1.0 - np.cos(2.0 * np.pi * theta)))

    def _grad(self, theta):
        return 2.0 * theta + 2.0 * np.pi * self.a * np.sin(2.0 * np.pi * theta)

    def sublevel_radius(self, level):
        # the cosine term is nonnegative, so f >= |theta|_2^2
        return math.sqrt(max(level, 0.0))


class Rosenbrock(Problem):
    """Chained Rosenbrock, only locally smooth: requires ``domain_radius``.

    On the box of radius R every Hessian row has absolute sum at most
    ``1200 R^2 + 1200 R + 202`` (Gershgorin), which is the declared L.
    """

    name = "rosenbrock"

    def __init__(self, dim: int, domain_radius: float = 2.0):
        if dim < 2:
            raise InvalidInputError("rosenbrock needs dim >= 2")
        R = float(domain_radius)
        super().__init__(dim, smoothness_L=1200.0 * R * R + 1200.0 * R + 202.0,
                         f_star_lower=0.0, domain_radius=R)

    @staticmethod
    def hessian(theta: ParamVector) -> np.ndarray:
        d = theta.shape[0]
        h = np.zeros((d, d))
        x, xn = theta[:-1], theta[1:]
        idx = np.arange(d - 1)
        h[idx, idx] += 1200.0 * x ** 2 - 400.0 * xn + 2.0
        h[idx + 1, idx + 1] += 200.0
        h[idx, idx + 1] = -400.0 * x
        h[idx + 1, idx] = -400.0 * x
        return h

    def _f(self, theta):
        x, xn = theta[:-1], theta[1:]
        return float(np.sum(100.0 * (xn - x ** 2) ** 2 + (1.0 - x) ** 2))

    def _grad(self, theta):
        x, xn = theta[:-1], theta[1:]
        inner = xn - x ** 2
        g = np.zeros_like(theta)
        g[:-1] = -400.0 * x * inner - 2.0 * (1.0 - x)
        g[1:] += 200.0 * inner
        return g


class LogisticRegression(Problem):
    """Mean logistic loss on synthetic data plus ``reg/2 * |theta|^2``.

    ``L = lambda_max(X^T X) / (4 n) + reg``. The loss is nonnegative, so 0 is a
    valid (conservative) lower bound on the optimum.
    """

    name = "logistic"

    def __init__(self, dim: int, n_samples: int = 200, reg: float = 0.01, seed: int = 0):
        if not reg > 0:
            raise InvalidInputError("logistic reg must be positive (coercivity)")
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((n_samples, dim))
        w_true = rng.standard_normal(dim)
        y = np.sign(X @ w_true + 0.5 * rng.standard_normal(n_samples))
        y[y == 0] = 1.0
        self.X, self.y = X, y
        self.n = int(n_samples)
        self.reg = float(reg)
        lam_max = float(np.linalg.eigvalsh(X.T @ X)[-1])
        super().__init__(dim, smoothness_L=0.25 * lam_max / self.n + self.reg, f_star_lower=0.0)

    def _f(self, theta):
        z = self.y * (self.X @ theta)
        return float(np.mean(np.logaddexp(0.0, -z)) + 0.5 * self.reg * (theta @ theta))

    def _grad(self, theta):
        z = self.y * (self.X @ theta)
        w = -self.y * expit(-z)
        return self.X.T @ w / self.n + self.reg * theta

    def sublevel_radius(self, level):
        return math.sqrt(2.0 * max(level, 0.0) / self.reg)


PROBLEMS: dict[str, Callable[..., Problem]] = {
    "quadratic": Quadratic,
    "rastrigin": RastriginSmooth,
    "rosenbrock": Rosenbrock,
    "logistic": LogisticRegression,
}


def make_problem(name: str, dim: int, **params) -> Problem:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise UnsupportedProblemError(
            f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(dim, **params)


def eval_f(p: Problem, theta) -> float:
    return p.f(theta)


def eval_grad(p: Problem, theta) -> ParamVector:
    return p.grad(theta)


# ---------------------------------------------------------------------------
# Noise and oracle
# ---------------------------------------------------------------------------

NOISE_KINDS = ("gaussian", "uniform")


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean additive gradient noise with ``E|xi|^2 = sigma^2``.

    ``gaussian`` draws each coordinate from N(0, sigma^2/d). ``uniform`` draws
    from U(-b, b) with ``b = sigma * sqrt(3/d)``, which is bounded and has the
    same second moment.
    """

    sigma: float
    kind: str = "gaussian"

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise InvalidInputError("sigma must be finite and >= 0")
        if self.kind not in NOISE_KINDS:
            raise InvalidInputError(f"noise kind must be one of {NOISE_KINDS}")

    def coord_scale(self, d: int) -> float:
        return self.sigma / math.sqrt(d)

    def draw(self, rng: np.random.Generator, d: int) -> ParamVector:
        if self.kind == "gaussian":
            return rng.standard_normal(d) * self.coord_scale(d)
        b = self.sigma * math.sqrt(3.0 / d)
        return rng.uniform(-b, b, d)


@dataclass
class GradOracle:
    """Stochastic gradient source ``grad f(theta) + xi`` on a private stream.

    Every call consumes exactly one draw of ``d`` scalars, even when
    ``sigma == 0``, so two oracles built from the same seed stay in lockstep
    with each other regardless of noise level.
    """

    problem: Problem
    noise: NoiseModel
    seed: int = 0
    counter: int = 0
    _rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self._rng = np.random.default_rng(self.seed)

    @classmethod
    def from_generator(cls, problem: Problem, noise: NoiseModel, rng: np.random.Generator,
                       seed: int = 0) -> "GradOracle":
        o = cls(problem, noise, seed)
        o._rng = rng
        return o

    def draw_noise(self) -> ParamVector:
        xi = self.noise.draw(self._rng, self.problem.dim)
        self.counter += 1
        if self.noise.sigma == 0:
            return np.zeros(self.problem.dim)
        return xi

    def sample(self, theta) -> ParamVector:
        return self.problem.grad(theta) + self.draw_noise()


def sample_grad(o: GradOracle, theta) -> ParamVector:
    return o.sample(theta)


# ---------------------------------------------------------------------------
# Constant certification and gradient checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SmoothnessReport:
    problem: str
    declared_L: float
    max_ratio: float
    trials: int
    passed: bool


def certify_smoothness(p: Problem, trials: int = 1000, seed: int = 0,
                       radius: Optional[float] = None) -> SmoothnessReport:
    """Sample pairs in the certified box and compare gradient-difference ratios to L.

    Half of the pairs are far apart, half are local perturbations (which probe
    the Hessian norm at a point).
    """
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    R = p.sample_radius() if radius is None else float(radius)
    if p.domain_radius is not None:
        R = min(R, p.domain_radius)
    worst = 0.0
    for t in range(trials):
        x = rng.uniform(-R, R, p.dim)
        if t % 2 == 0:
            y = rng.uniform(-R, R, p.dim)
        else:
            y = np.clip(x + 1e-3 * rng.standard_normal(p.dim), -R, R)
        dist = np.linalg.norm(x - y)
        if dist == 0.0:
            continue
        worst = max(worst, float(np.linalg.norm(p.grad(x) - p.grad(y)) / dist))
    return SmoothnessReport(p.name, p.smoothness_L, worst, trials,
                            worst <= p.smoothness_L * (1.0 + 1e-9))


def finite_difference_grad(p: Problem, theta) -> ParamVector:
    """Central differences with per-coordinate step ``1e-6 * max(1, |theta_i|)``."""
    theta = as_vector(theta, name="theta")
    g = np.empty_like(theta)
    for i in range(theta.shape[0]):
        h = 1e-6 * max(1.0, abs(theta[i]))
        xp = theta.copy()
        xm = theta.copy()
        xp[i] += h
        xm[i] -= h
        if p.domain_radius is not None:
            xp[i] = min(xp[i], p.domain_radius)
            xm[i] = max(xm[i], -p.domain_radius)
        g[i] = (p.f(xp) - p.f(xm)) / (xp[i] - xm[i])
    return g


def gradient_check(p: Problem, n_points: int = 100, seed: int = 0,
                   radius: Optional[float] = None) -> float:
    """Worst relative error ``|fd - g|_2 / max(1, |g|_2)`` over random points."""
    rng = np.random.default_rng(seed)
    R = p.sample_radius() if radius is None else float(radius)
    if p.domain_radius is not None:
        R = min(R, p.domain_radius)
    worst = 0.0
    for _ in range(n_points):
        x = rng.uniform(-R, R, p.dim)
        g = p.grad(x)
        fd = finite_difference_grad(p, x)
        worst = max(worst, float(np.linalg.norm(fd - g) / max(1.0, np.linalg.norm(g))))
    return worst
