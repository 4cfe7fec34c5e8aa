import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lionrate.errors import DimensionError, InvalidInputError
from lionrate.optimizers import (
    LionConfig,
    LionState,
    SgdConfig,
    init_state,
    init_state_zero,
    lion_step,
    sgd_step,
)


def test_zero_gradient_shrinks_toward_origin():
    st_ = LionState(np.array([0.5]), np.array([0.0]))
    new, c = lion_step(st_, np.array([0.0]), LionConfig(0.9, 0.99, 0.01, lam=0.1))
    assert c[0] == 0.0
    assert new.theta[0] == pytest.approx(0.4995, abs=1e-15)
    assert new.momentum[0] == 0.0
    assert new.step_index == 2


def test_hand_example():
    st_ = LionState(np.array([1.0, -1.0]), np.array([0.2, -0.4]))
    new, c = lion_step(st_, np.array([-1.0, 2.0]), LionConfig(0.9, 0.99, 0.1))
    np.testing.assert_allclose(c, [0.08, -0.16], atol=1e-15)
    np.testing.assert_allclose(new.theta, [0.9, -0.9], atol=1e-15)
    np.testing.assert_allclose(new.momentum, [0.188, -0.376], atol=1e-15)


def test_boundary_point_stays_feasible():
    st_ = LionState(np.array([1.0]), np.array([1.0]))
    new, _ = lion_step(st_, np.array([1.0]), LionConfig(0.5, 0.5, 0.1, lam=1.0))
    assert new.theta[0] == pytest.approx(0.8)
    assert new.theta[0] <= 1.0


def test_step_does_not_mutate_input():
    theta, m = np.array([0.3, -0.2]), np.array([1.0, 1.0])
    st_ = LionState(theta, m)
    lion_step(st_, np.array([1.0, -1.0]), LionConfig(0.9, 0.99, 0.1, lam=0.5))
    np.testing.assert_array_equal(theta, [0.3, -0.2])
    np.testing.assert_array_equal(m, [1.0, 1.0])


def test_step_errors():
    st_ = init_state_zero(np.zeros(3))
    with pytest.raises(DimensionError):
        lion_step(st_, np.zeros(2), LionConfig(0.9, 0.9, 0.1))
    with pytest.raises(InvalidInputError):
        lion_step(st_, np.array([0.0, np.nan, 0.0]), LionConfig(0.9, 0.9, 0.1))
    with pytest.raises(InvalidInputError):
        LionConfig(1.0, 0.9, 0.1)
    with pytest.raises(InvalidInputError):
        LionConfig(0.9, 0.9, 0.0)
    with pytest.raises(InvalidInputError):
        LionConfig(0.9, 0.9, 0.1, lam=-1.0)
    with pytest.raises(InvalidInputError):
        SgdConfig(-1.0)


def test_sgd_examples():
    theta = np.array([1.0, -2.0])
    np.testing.assert_array_equal(sgd_step(theta, np.zeros(2), SgdConfig(0.3)), theta)
    np.testing.assert_array_equal(sgd_step([2.0], [2.0], SgdConfig(1.0)), [0.0])
    g = np.array([0.5, -0.25])
    twice = sgd_step(sgd_step(theta, g, SgdConfig(0.125)), g, SgdConfig(0.125))
    np.testing.assert_array_equal(twice, sgd_step(theta, g, SgdConfig(0.25)))
    with pytest.raises(DimensionError):
        sgd_step(theta, [1.0], SgdConfig(0.1))


def test_init_state():
    g1 = np.array([0.3, -0.7])
    s = init_state(np.array([0.1, 0.2]), g1)
    np.testing.assert_array_equal(s.momentum, g1)
    assert s.momentum is not g1
    # noiseless first step: c^1 equals g^1 for any beta1
    for b1 in (0.0, 0.3, 0.99):
        _, c = lion_step(s, g1, LionConfig(b1, 0.5, 0.01))
        np.testing.assert_allclose(c, g1, rtol=0, atol=1e-16)
    with pytest.raises(DimensionError):
        init_state(np.zeros(2), np.zeros(3))
    z = init_state_zero(np.zeros(4))
    np.testing.assert_array_equal(z.momentum, np.zeros(4))


def test_reductions():
    rng = np.random.default_rng(0)
    d = 7
    # beta1 == beta2 and lam == 0: c^k = m^k at every step
    cfg = LionConfig(0.8, 0.8, 0.01)
    s = init_state(rng.normal(size=d), rng.normal(size=d))
    for _ in range(200):
        g = rng.normal(size=d)
        new, c = lion_step(s, g, cfg)
        np.testing.assert_array_equal(c, new.momentum)
        s = new
    # beta1 = beta2 = 0, lam = 0: signSGD
    cfg = LionConfig(0.0, 0.0, 0.05)
    s = init_state(rng.normal(size=d), rng.normal(size=d))
    for _ in range(200):
        g = rng.normal(size=d)
        new, _ = lion_step(s, g, cfg)
        np.testing.assert_array_equal(new.theta, s.theta - 0.05 * np.sign(g))
        s = new


@settings(max_examples=200, deadline=None)
@given(
    d=st.integers(1, 20),
    lam=st.sampled_from([0.1, 1.0, 10.0]),
    log_eta=st.floats(-6, 0),
    b1=st.floats(0, 0.999),
    b2=st.floats(0, 0.999),
    seed=st.integers(0, 2**31),
)
def test_feasibility_is_preserved(d, lam, log_eta, b1, b2, seed):
    eta = min(10.0 ** log_eta, 1.0 / lam)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(-1, 1, d) / lam
    theta[0] = 1.0 / lam  # start on the boundary
    cfg = LionConfig(b1, b2, eta, lam=lam)
    s = init_state(theta, 50 * rng.normal(size=d))
    for _ in range(50):
        s, _ = lion_step(s, 50 * rng.normal(size=d), cfg)
        assert np.max(np.abs(s.theta)) <= 1.0 / lam + 1e-12


def test_step_displacement_bound():
    rng = np.random.default_rng(3)
    cfg = LionConfig(0.9, 0.99, 0.02, lam=2.0)
    s = init_state(rng.uniform(-0.5, 0.5, 5), rng.normal(size=5))
    for _ in range(100):
        new, _ = lion_step(s, rng.normal(size=5), cfg)
        # |theta' - theta|_inf <= eta (1 + lam |theta|_inf) <= 2 eta inside the box
        assert np.max(np.abs(new.theta - s.theta)) <= cfg.eta * (1 + cfg.lam * np.max(np.abs(s.theta))) + 1e-15
        assert np.max(np.abs(new.theta - s.theta)) <= 2 * cfg.eta + 1e-15
        s = new
