import numpy as np
import pytest
from scipy.integrate import dblquad

from vanhove.filon import moments, oscillatory_panel_integral, panel_weights, triangle_weights


def test_constant_closed_form():
    s = np.linspace(0, 1, 4)
    val = oscillatory_panel_integral(10.0, s, np.ones(4))
    assert val == pytest.approx(complex(-0.054402, 0.183907), abs=1e-6)
    assert val == pytest.approx((np.exp(10j) - 1) / 10j, abs=1e-14)


def test_zero_frequency_is_plain_quadrature():
    s = np.linspace(0.5, 1.5, 4)
    g = s**3 - 2 * s
    exact = (1.5**4 - 0.5**4) / 4 - (1.5**2 - 0.5**2)
    assert oscillatory_panel_integral(0.0, s, g) == pytest.approx(exact, abs=1e-13)


def test_linear_against_riemann_sum():
    s = np.linspace(0, 1, 4)
    val = oscillatory_panel_integral(40.0, s, s)
    n = 100_000
    t = (np.arange(n) + 0.5) / n
    ref = np.sum(np.exp(40j * t) * t) / n
    assert abs(val - ref) <= 1e-6 * abs(ref)


def test_exact_for_cubics_at_any_frequency():
    s = np.array([0.0, 0.2, 0.7, 1.0])
    g = 1 - 3 * s + s**3
    for w in (0.0, 0.3, 5.0, 300.0):
        # analytic: combine moments directly
        mu = moments(np.array(w), 3)
        exact = mu[0] - 3 * mu[1] + mu[3]
        assert oscillatory_panel_integral(w, s, g) == pytest.approx(exact, abs=1e-12)


def test_moments_series_and_recursion_agree():
    for p in range(4):
        lo = moments(np.array(3.999), p)[p]
        hi = moments(np.array(4.001), p)[p]
        assert abs(lo - hi) < 1e-3


@pytest.mark.parametrize("theta", [0.3, 3.0, 12.0])
def test_triangle_weights_against_dblquad(theta):
    nodes = (0.0, 1 / 3, 2 / 3, 1.0)
    T = triangle_weights(np.array(theta), nodes)
    p = lambda u: 1 + u - u**2   # noqa: E731
    q = lambda u: 2 - u**3       # noqa: E731
    pv = np.array([p(u) for u in nodes])
    qv = np.array([q(u) for u in nodes])
    num = pv @ T @ qv
    re = dblquad(lambda v, u: np.real(np.exp(-1j * theta * (u - v)) * p(u) * q(v)), 0, 1, 0, lambda u: u)[0]
    im = dblquad(lambda v, u: np.imag(np.exp(-1j * theta * (u - v)) * p(u) * q(v)), 0, 1, 0, lambda u: u)[0]
    assert abs(num - complex(re, im)) < 1e-10


def test_bad_samples():
    with pytest.raises(ValueError):
        oscillatory_panel_integral(1.0, [0.0], [1.0])
    with pytest.raises(ValueError):
        oscillatory_panel_integral(1.0, [1.0, 0.0], [1.0, 1.0])


def test_panel_weights_sum():
    w = panel_weights(np.array(0.0))
    assert w.sum() == pytest.approx(1.0)
