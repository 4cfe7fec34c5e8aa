import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lionrate.errors import DimensionError, InvalidInputError
from lionrate.numerics import axpy, norm_l1, norm_l2, norm_linf, sign

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
vectors = st.integers(1, 64).flatmap(lambda d: arrays(np.float64, d, elements=finite))


def test_norm_examples():
    assert norm_l1([1.0, -1.0]) == 2.0
    assert norm_l1(np.zeros(5)) == 0.0
    assert norm_l1([3.0, -4.0]) == 7.0
    assert norm_l2([3.0, -4.0]) == 5.0
    assert norm_l1([3.0, -4.0]) / norm_l2([3.0, -4.0]) == pytest.approx(7 / 5, rel=1e-15)
    assert norm_l2(np.zeros(4)) == 0.0
    assert norm_l2(np.ones(9)) == 3.0
    assert norm_linf([0.2, -0.9, 0.5]) == 0.9
    assert norm_linf(np.zeros(3)) == 0.0
    lam = 2.0
    assert norm_linf(np.full(7, 1 / lam)) == 0.5


@pytest.mark.parametrize("fn", [norm_l1, norm_l2, norm_linf, sign])
@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_non_finite_rejected(fn, bad):
    with pytest.raises(InvalidInputError):
        fn([1.0, bad])


def test_sign_zero_convention():
    np.testing.assert_array_equal(sign([2.5, -0.1, 0.0]), [1.0, -1.0, 0.0])
    np.testing.assert_array_equal(sign(np.zeros(4)), np.zeros(4))


def test_axpy():
    y = np.array([0.0, -1.0])
    np.testing.assert_array_equal(axpy(0.0, [5.0, 7.0], y), y)
    np.testing.assert_array_equal(axpy(1.0, [5.0, 7.0], np.zeros(2)), [5.0, 7.0])
    np.testing.assert_array_equal(axpy(2.0, [1.0, 1.0], y), [2.0, 1.0])
    with pytest.raises(DimensionError):
        axpy(1.0, [1.0], [1.0, 2.0])


@given(vectors)
def test_sign_properties(v):
    s = sign(v)
    assert np.all(np.abs(s) <= 1)
    np.testing.assert_array_equal(sign(s), s)
    np.testing.assert_array_equal(sign(-v), -s)


@settings(max_examples=300)
@given(vectors)
def test_norm_equivalence_hypothesis(v):
    l1, l2, d = norm_l1(v), norm_l2(v), v.shape[0]
    slack = 8 * np.finfo(float).eps * max(l1, 1e-300)
    assert l2 <= l1 + slack
    assert l1 <= math.sqrt(d) * l2 + slack


@pytest.mark.parametrize("d", [1, 2, 10, 1000])
def test_norm_equivalence_random(d):
    rng = np.random.default_rng(d)
    n = 10_000 if d < 1000 else 2_500
    for _ in range(n // 100):
        batch = rng.standard_normal((100, d)) * rng.lognormal(size=(100, 1))
        for v in batch:
            l1, l2 = norm_l1(v), norm_l2(v)
            eps = 8 * np.finfo(float).eps * l1
            assert l2 <= l1 + eps and l1 <= math.sqrt(d) * l2 + eps


@pytest.mark.parametrize("d", [1, 4, 100, 10_000])
def test_ratio_extremes(d):
    from lionrate.metrics import ratio

    assert ratio(np.full(d, -2.5)) == pytest.approx(math.sqrt(d), rel=1e-14)
    one_hot = np.zeros(d)
    one_hot[d // 2] = 3.0
    assert ratio(one_hot) == 1.0
