"""Power-law fits in log-log coordinates, optionally with a log correction divided out."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

MODELS = ("pure_power", "power_times_log", "power_times_sqrtlog")
MIN_POINTS = 4


@dataclass(frozen=True)
class PowerFit:
    model: str
    exponent: float
    prefactor: float
    residual: float       # RMS of log residuals
    halfwidth: float      # 95% confidence half-width of the exponent
    n: int

    def as_dict(self):
        return {"model": self.model, "exponent": self.exponent, "prefactor": self.prefactor,
                "residual": self.residual, "halfwidth": self.halfwidth, "n": self.n}


def _correction(eps, model):
    if model == "pure_power":
        return np.ones_like(eps)
    if np.any(eps >= 1.0):
        raise ValueError("log-corrected models need epsilon < 1")
    log = np.log(1.0 / eps)
    return log if model == "power_times_log" else np.sqrt(log)


def fit_powerlaw(rows, model="pure_power"):
    """Fit value ~ C eps^p * corr(eps) by least squares on log(value / corr) vs log(eps)."""
    if model not in MODELS:
        raise ValueError(f"unknown model {model!r}; choose from {MODELS}")
    data = np.asarray(list(rows), dtype=float)
    if data.ndim != 2 or data.shape[0] < MIN_POINTS or data.shape[1] != 2:
        raise ValueError(f"need >= {MIN_POINTS} points (epsilon, value), got {len(data)}")
    eps, val = data[:, 0], data[:, 1]
    if np.any(eps <= 0):
        raise ValueError("epsilon values must be positive")
    if np.any(val <= 0) or not np.all(np.isfinite(val)):
        raise ValueError("values must be positive and finite for a log-log fit")
    x = np.log(eps)
    y = np.log(val / _correction(eps, model))
    reg = stats.linregress(x, y)
    res = y - (reg.intercept + reg.slope * x)
    tq = stats.t.ppf(0.975, len(x) - 2)
    return PowerFit(model, float(reg.slope), float(np.exp(reg.intercept)),
                    float(np.sqrt(np.mean(res**2))), float(tq * reg.stderr), len(x))


def fit_all(rows):
    rows = list(rows)
    return {m: fit_powerlaw(rows, m) for m in MODELS}
