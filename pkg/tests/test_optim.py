"""Adam contracts against an independently simulated scalar reference."""

import numpy as np
import pytest

from dre.autodiff import parameter
from dre.optim import Adam, OptimizerError, clip_gradients


def scalar_adam_reference(grads, lr=0.01, b1=0.9, b2=0.999, eps=1e-8, theta0=1.0):
    """Textbook scalar Adam, simulated independently of the implementation."""
    theta, m, v = theta0, 0.0, 0.0
    history = []
    for t, g in enumerate(grads, start=1):
        m = b1 * m + (1 - b1) * g
        v = b2 * v + (1 - b2) * g * g
        m_hat = m / (1 - b1**t)
        v_hat = v / (1 - b2**t)
        theta -= lr * m_hat / (v_hat**0.5 + eps)
        history.append(theta)
    return history


def test_zero_gradient_leaves_parameters_unchanged():
    p = parameter(np.array([1.0, -2.0, 3.0]))
    opt = Adam({"p": p}, learning_rate=0.1)
    before = p.data.copy()
    opt.step()
    assert np.array_equal(p.data, before)
    assert opt.step_count == 1


def test_constant_gradient_update_magnitude_approaches_lr():
    lr = 2e-5
    p = parameter(np.array([0.5, -0.5]))
    opt = Adam({"p": p}, learning_rate=lr)
    g = np.array([3.0, -0.25])
    prev = p.data.copy()
    for _ in range(10):
        p.grad = g.copy()
        opt.step()
        delta = p.data - prev
        prev = p.data.copy()
        # with constant g the bias corrections cancel: update = -lr * g/(|g|+eps)
        assert np.allclose(delta, -lr * np.sign(g), rtol=1e-5)


def test_trajectory_matches_scalar_reference():
    rng = np.random.default_rng(7)
    grads = rng.normal(size=20).tolist()
    expected = scalar_adam_reference(grads, lr=0.01, theta0=1.0)

    p = parameter(np.array([1.0]))
    opt = Adam({"p": p}, learning_rate=0.01)
    actual = []
    for g in grads:
        p.grad = np.array([g])
        opt.step()
        actual.append(float(p.data[0]))
    assert np.allclose(actual, expected, rtol=1e-12, atol=1e-12)


def test_default_hyperparameters():
    opt = Adam({}, learning_rate=2e-5)
    assert opt.beta1 == 0.9
    assert opt.beta2 == 0.999
    assert opt.epsilon == 1e-8
    assert opt.learning_rate == 2e-5


def test_nan_gradient_names_parameter():
    p = parameter(np.ones(2))
    p.grad = np.array([np.nan, 0.0])
    opt = Adam({"enc.layer1.fwd.w_x": p})
    with pytest.raises(OptimizerError, match="enc.layer1.fwd.w_x"):
        opt.step()


def test_moment_shapes_match_parameters():
    params = {"a": parameter(np.ones((3, 4))), "b": parameter(np.ones(5))}
    opt = Adam(params)
    for name, p in params.items():
        assert opt.first_moment[name].shape == p.data.shape
        assert opt.second_moment[name].shape == p.data.shape


def test_clip_gradients_global_norm():
    a = parameter(np.zeros(3))
    b = parameter(np.zeros(4))
    a.grad = np.array([3.0, 0.0, 0.0])
    b.grad = np.array([0.0, 4.0, 0.0, 0.0])
    norm = clip_gradients({"a": a, "b": b}, max_norm=1.0)
    assert norm == pytest.approx(5.0)
    clipped = np.sqrt((a.grad**2).sum() + (b.grad**2).sum())
    assert clipped == pytest.approx(1.0)
