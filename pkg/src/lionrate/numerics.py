"""Dense vector primitives.

A parameter vector is a 1-D ``float64`` numpy array. Every public function
here is pure and rejects non-finite input.
"""

from __future__ import annotations

import numpy as np

from lionrate.errors import DimensionError, InvalidInputError

ParamVector = np.ndarray


def as_vector(x, *, name: str = "vector") -> ParamVector:
    """Coerce ``x`` to a finite 1-D float64 array (copying only if needed)."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {v.shape}")
    if v.size == 0:
        raise InvalidInputError(f"{name} must have dim >= 1")
    if not np.all(np.isfinite(v)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return v


def check_same_dim(x: ParamVector, y: ParamVector) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")


def zeros(d: int) -> ParamVector:
    if d < 1:
        raise InvalidInputError("dim must be >= 1")
    return np.zeros(d, dtype=np.float64)


def norm_l1(v) -> float:
    v = as_vector(v)
    return float(np.sum(np.abs(v)))


def norm_l2(v) -> float:
    v = as_vector(v)
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return 0.0
    # rescale so subnormal and huge entries neither underflow nor overflow
    w = v / scale
    return scale * float(np.sqrt(w @ w))


def norm_linf(v) -> float:
    v = as_vector(v)
    return float(np.max(np.abs(v)))


def sign(v) -> ParamVector:
    """Entrywise sign with ``sign(0) == 0``."""
    return np.sign(as_vector(v))


def axpy(a: float, x, y) -> ParamVector:
    """Return ``a * x + y``."""
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    check_same_dim(x, y)
    out = a * x + y
    if not np.all(np.isfinite(out)):
        raise InvalidInputError("axpy overflowed")
    return out


def dot(x, y) -> float:
    x = as_vector(x, name="x")
    y = as_vector(y, name="y")
    check_same_dim(x, y)
    return float(np.dot(x, y))
