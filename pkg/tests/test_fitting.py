import numpy as np
import pytest

from vanhove.fitting import MODELS, fit_all, fit_powerlaw

LADDER = (0.2, 0.1, 0.05, 0.025, 0.0125)


def test_exact_square():
    f = fit_powerlaw([(e, 3 * e**2) for e in LADDER])
    assert f.exponent == pytest.approx(2.0, abs=1e-6)
    assert f.prefactor == pytest.approx(3.0, rel=1e-9)
    assert f.residual < 1e-12 and f.n == 5


def test_log_drift_on_pure_power():
    # the pure fit of eps*ln(1/eps) over this ladder lands well below 1
    rows = [(e, e * np.log(1 / e)) for e in LADDER]
    pure = fit_powerlaw(rows)
    assert pure.exponent == pytest.approx(0.6430, abs=1e-3)
    assert pure.residual > 1e-3
    logfit = fit_powerlaw(rows, "power_times_log")
    assert logfit.exponent == pytest.approx(1.0, abs=1e-3)
    assert logfit.residual < 1e-12


def test_sqrtlog_model():
    rows = [(e, e**2 * np.sqrt(np.log(1 / e))) for e in LADDER]
    assert fit_powerlaw(rows, "power_times_sqrtlog").exponent == pytest.approx(2.0, abs=1e-9)


def test_fit_all_models():
    out = fit_all([(e, e) for e in LADDER])
    assert set(out) == set(MODELS)
    assert out["pure_power"].as_dict()["exponent"] == pytest.approx(1.0)


def test_halfwidth_reflects_noise():
    rng = np.random.default_rng(3)
    rows = [(e, e**2 * np.exp(0.05 * rng.normal())) for e in LADDER]
    f = fit_powerlaw(rows)
    assert f.halfwidth > 0 and abs(f.exponent - 2) < 3 * f.halfwidth + 0.05


@pytest.mark.parametrize("rows, msg", [
    ([(0.1, 1.0)], "need >= 4 points"),
    ([(0.2, 1.0), (0.1, 0.0), (0.05, 1.0), (0.02, 1.0)], "positive"),
    ([(0.2, 1.0), (0.1, -1.0), (0.05, 1.0), (0.02, 1.0)], "positive"),
    ([(0.2, 1.0), (0.0, 1.0), (0.05, 1.0), (0.02, 1.0)], "epsilon"),
])
def test_rejections(rows, msg):
    with pytest.raises(ValueError, match=msg):
        fit_powerlaw(rows)


def test_unknown_model_and_log_domain():
    with pytest.raises(ValueError):
        fit_powerlaw([(e, e) for e in LADDER], "cubic")
    with pytest.raises(ValueError):
        fit_powerlaw([(2.0, 1.0), (0.5, 1.0), (0.2, 1.0), (0.1, 1.0)], "power_times_log")
