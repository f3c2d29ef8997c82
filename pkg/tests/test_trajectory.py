import numpy as np
import pytest

from vanhove.trajectory import (composite, oscillation, rest, smoothstep,
                                smoothstep_translation, trajectory_eval)


def test_rest_derivatives_vanish():
    tr = rest((1.0, 2.0, 3.0))
    assert np.array_equal(tr(0.7, 0), [1.0, 2.0, 3.0])
    for n in range(1, 5):
        assert np.array_equal(tr(0.7, n), np.zeros(3))


def test_order_out_of_range():
    with pytest.raises(ValueError):
        trajectory_eval(rest((0, 0, 0)), 0.0, 5)
    with pytest.raises(ValueError):
        smoothstep(0.5, 5)


def test_smoothstep_endpoints():
    tr = smoothstep_translation((0, 0, 1), (0.3, -0.2, 0.5), 0.0, 2.0)
    assert np.allclose(tr(2.0) - tr(0.0), (0.3, -0.2, 0.5), atol=1e-15)
    for t in (-1.0, -1e-9, 2.0, 3.5):
        for n in range(1, 5):
            assert np.all(tr(t, n) == 0.0)


def test_smoothstep_monotone_and_symmetric():
    u = np.linspace(0, 1, 101)
    s = smoothstep(u)
    assert np.all(np.diff(s) >= -1e-15)
    assert np.allclose(s + s[::-1], 1.0, atol=1e-12)


# central parts of the transition / plateau of the window, where the h^2
# truncation of the central difference is below the tolerance
@pytest.mark.parametrize("tr, lo, hi", [
    (smoothstep_translation((0, 0, 0), (0, 0, 1), 0.0, 1.0), 0.3, 0.7),
    (oscillation((0, 0, 0), (0, 0.2, 0.1), 7.0, 0.0, 2.0, 0.5), 0.5, 1.5),
])
def test_derivatives_match_finite_differences(tr, lo, hi):
    rng = np.random.default_rng(3)
    h = 1e-4
    for t in rng.uniform(lo, hi, 20):
        for n in range(1, 5):
            fd = (tr(t + h, n - 1) - tr(t - h, n - 1)) / (2 * h)
            ex = tr(t, n)
            scale = max(np.max(np.abs(ex)), 1e-3)
            assert np.max(np.abs(fd - ex)) / scale <= 1e-6


def test_second_derivative_from_positions():
    tr = oscillation((0, 0, 0), (0, 0, 0.3), 5.0, 0.0, 2.0, 0.5)
    rng = np.random.default_rng(11)
    h = 2e-4
    for t in rng.uniform(0.05, 1.95, 20):
        fd = (tr(t + h) - 2 * tr(t) + tr(t - h)) / h**2
        ex = tr(t, 2)
        assert np.max(np.abs(fd - ex)) <= 1e-5 * max(1.0, np.max(np.abs(ex)))


def test_composite_adds_motions():
    a = smoothstep_translation((1, 0, 0), (0, 0, 1), 0.0, 1.0)
    b = oscillation((0, 1, 0), (0.1, 0, 0), 3.0, 0.0, 1.0)
    c = composite(a, b)
    for t in (0.2, 0.5, 0.8):
        assert np.allclose(c(t, 2), a(t, 2) + b(t, 2))
        assert np.allclose(c(t), a(t) + b(t))
    assert c.motion_support == (0.0, 1.0)


def test_vectorised_times():
    tr = smoothstep_translation((0, 0, 0), (0, 0, 1))
    t = np.linspace(-0.5, 1.5, 7)
    assert tr(t, 1).shape == (7, 3)
