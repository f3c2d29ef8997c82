"""Scenario library and measurement campaigns built on the coherent solver."""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from . import __version__
from .coherent import SQRT2, field_energy, overlap, state_distance
from .evolve import (MESH_INTERVALS, EvolutionParams, SigmaRule, adiabatic_amplitude,
                     adiabatic_state, double_time_energy, dress_transform, propagate,
                     superadiabatic_state)
from .fitting import MIN_POINTS, fit_all
from .grid import build_grid, l2_inner, l2_norm_sq
from .model import SourceSystem, couplings_at, dressed_energy, ground_energy
from .trajectory import MAX_ORDER, oscillation, rest, smoothstep_translation

CSV_HEADER = ("epsilon", "sigma", "err_ad", "err_su", "p_emit", "e_rad_beta", "e_rad_double",
              "e_rad_larmor", "e_deform")
DEFAULT_LADDER = (0.2, 0.1, 0.05, 0.025, 0.0125)
# target exponent and tolerance per measured quantity
EXPECTED_EXPONENTS = {"err_ad": (1.0, 0.15), "err_su": (2.0, 0.2), "p_emit": (2.0, 0.3)}


@dataclass(frozen=True)
class GridSpec:
    k_max: float
    radial_count: int = 200
    angular_count: int = 64
    azimuth_count: int = 2
    layout: str = "log"

    def as_dict(self):
        return {"k_max": self.k_max, "radial_count": self.radial_count,
                "angular_count": self.angular_count, "azimuth_count": self.azimuth_count,
                "layout": self.layout}


@lru_cache(maxsize=8)
def _grid(sigma, spec):
    return build_grid(sigma, spec.k_max, spec.radial_count, spec.angular_count,
                      radial_layout=spec.layout, azimuth_count=spec.azimuth_count)


@dataclass(frozen=True)
class Scenario:
    """Source configuration, time window and discretisation for one experiment.

    ``window`` is divided into ``step_count`` Filon panels and sampled on a
    64-interval mesh; every rest-window endpoint that falls inside the
    window must be a mesh point.
    """
    name: str
    system: SourceSystem
    window: tuple
    rest_windows: tuple
    grid: GridSpec
    sigma_rule: SigmaRule = field(default_factory=SigmaRule)
    step_count: int = 256
    deform_time: float | None = None
    notes: str = ""

    def __post_init__(self):
        t0, t1 = self.window
        if not t1 > t0:
            raise ValueError("empty time window")
        if self.step_count % MESH_INTERVALS:
            raise ValueError(f"step_count must be a multiple of {MESH_INTERVALS}")
        for a, b in self.rest_windows:
            for t in (a, b):
                if t0 < t < t1 and not np.isclose(self._mesh_pos(t), round(self._mesh_pos(t))):
                    raise ValueError(f"rest-window endpoint {t} is not on the sampling mesh")
        self.check_rest_windows()

    def _mesh_pos(self, t):
        t0, t1 = self.window
        return (t - t0) / (t1 - t0) * MESH_INTERVALS

    def check_rest_windows(self, samples=9):
        t0, t1 = self.window
        for a, b in self.rest_windows:
            lo, hi = max(a, t0), min(b, t1)
            for t in np.linspace(lo, hi, samples):
                for n in range(1, MAX_ORDER + 1):
                    if np.any(self.system.state(t, n) != 0.0):
                        raise ValueError(f"sources move at t={t:g} inside rest window ({a}, {b})")

    def sigma(self, epsilon):
        sig = self.sigma_rule.resolve(epsilon)
        if not self.system.neutral and sig <= 0 and self.system.motion_support() is not None:
            raise ValueError("moving charged systems need a positive infrared cutoff")
        return sig

    def grid_for(self, epsilon):
        return _grid(float(self.sigma(epsilon)), self.grid)

    def params_for(self, epsilon):
        return EvolutionParams(float(epsilon), float(self.window[0]), float(self.window[1]),
                               self.step_count, self.sigma_rule)

    def mesh(self):
        return np.linspace(self.window[0], self.window[1], MESH_INTERVALS + 1)

    def in_rest(self, t):
        return any(a <= t <= b for a, b in self.rest_windows)

    def describe(self):
        return {"name": self.name, "charges": list(self.system.charges), "lambda": self.system.lam,
                "window": list(self.window), "rest_windows": [list(w) for w in self.rest_windows],
                "grid": self.grid.as_dict(), "sigma_rule": self.sigma_rule.describe(),
                "step_count": self.step_count, "notes": self.notes}


# ---------------------------------------------------------------- library

LAMBDA = 0.1
HALF_GAP = 0.1


def _static_charge(grid):
    sys = SourceSystem((1.0,), (rest((0.0, 0.0, 0.3)),), lam=LAMBDA)
    return Scenario("static_charge", sys, (0.0, 1.0), ((-np.inf, np.inf),), grid,
                    SigmaRule("fixed", 0.0), 64, None, "single charge at rest")


def _neutral_dipole_step(grid):
    up = smoothstep_translation((0, 0, HALF_GAP), (0, 0, HALF_GAP), 0.0, 1.0)
    dn = smoothstep_translation((0, 0, -HALF_GAP), (0, 0, -HALF_GAP), 0.0, 1.0)
    sys = SourceSystem((1.0, -1.0), (up, dn), lam=LAMBDA)
    return Scenario("neutral_dipole_step", sys, (-0.5, 1.5), ((-np.inf, 0.0), (1.0, np.inf)), grid,
                    SigmaRule("fixed", 0.0), 256, 0.5, "dipole separation doubles during [0, 1]")


def _charged_step(grid):
    tr = smoothstep_translation((0, 0, 0), (0, 0, 2 * HALF_GAP), 0.0, 1.0)
    sys = SourceSystem((1.0,), (tr,), lam=LAMBDA)
    return Scenario("charged_step", sys, (-0.5, 1.5), ((-np.inf, 0.0), (1.0, np.inf)), grid,
                    SigmaRule("power", power=2.0), 256, 0.5,
                    "single charge; infrared cutoff sigma = eps^2 (desk scale)")


LARMOR_OMEGA = 4.0 * np.pi
LARMOR_DURATION = 2.0


def _unit_dipole_amplitude(omega, duration, ramp):
    """Amplitude giving int |d''|^2 dt = 1 for a unit charge."""
    probe = oscillation((0, 0, 0), (0, 0, 1.0), omega, 0.0, duration, ramp)
    x, w = np.polynomial.legendre.leggauss(400)
    t = 0.5 * duration * (x + 1.0)
    acc = probe(t, 2)[:, 2]
    return 1.0 / np.sqrt(0.5 * duration * float(w @ acc**2))


def _larmor_dipole(grid):
    ramp = LARMOR_DURATION / 4.0
    amp = _unit_dipole_amplitude(LARMOR_OMEGA, LARMOR_DURATION, ramp)
    osc = oscillation((0, 0, HALF_GAP), (0, 0, amp), LARMOR_OMEGA, 0.0, LARMOR_DURATION, ramp)
    sys = SourceSystem((1.0, -1.0), (osc, rest((0, 0, -HALF_GAP))), lam=LAMBDA)
    return Scenario("larmor_dipole", sys, (-0.4, 2.8), ((-np.inf, 0.0), (2.0, np.inf)), grid,
                    SigmaRule("fixed", 0.0), 384, 1.0,
                    "one charge of a neutral pair oscillates; int |d''|^2 dt = 1")


_LIBRARY = {"static_charge": _static_charge, "neutral_dipole_step": _neutral_dipole_step,
            "charged_step": _charged_step, "larmor_dipole": _larmor_dipole}
SCENARIOS = tuple(_LIBRARY)


# (radial, angular) defaults; the emission spectrum of the oscillating dipole is
# narrow in |k| and needs the finer radial rule
_DEFAULT_COUNTS = {"larmor_dipole": (400, 16)}


def scenario(name, radial_count=None, angular_count=None, azimuth_count=2, k_max=None,
             step_count=None):
    if name not in _LIBRARY:
        raise ValueError(f"unknown scenario {name!r}; available: {', '.join(SCENARIOS)}")
    nr, na = _DEFAULT_COUNTS.get(name, (200, 64))
    spec = GridSpec(k_max if k_max is not None else 8.0 / LAMBDA,
                    radial_count or nr, angular_count or na, azimuth_count)
    sc = _LIBRARY[name](spec)
    return replace(sc, step_count=step_count) if step_count is not None else sc


# ---------------------------------------------------------------- measurements

def lab_energy(state, v):
    """<psi, (H_f + Phi(v)) psi> for a coherent state."""
    return field_energy(state) + SQRT2 * float(np.real(l2_inner(state.grid, v, state.amplitude)))


def _na_residual(dressed, beta, theta_su):
    """|| exp(i theta) W(rho) Omega_0 - exp(i theta_su) (Omega_0 + a^dag(beta) Omega_0) ||."""
    g = dressed.grid
    rho = dressed.amplitude
    cross = np.exp(1j * (dressed.phase - theta_su) - 0.5 * l2_norm_sq(g, rho)) * (
        1.0 + l2_inner(g, beta, rho))
    d2 = 2.0 + l2_norm_sq(g, beta) - 2.0 * np.real(cross)
    return float(np.sqrt(max(d2, 0.0)))


@lru_cache(maxsize=16)
def solve(sc, epsilon):
    grid = sc.grid_for(epsilon)
    return grid, propagate(sc.system, grid, sc.params_for(epsilon), track_beta=True,
                           track_pairs=True)


@dataclass(frozen=True)
class TimeTrace:
    times: np.ndarray
    err_ad: np.ndarray
    err_su: np.ndarray          # |<psi_su, psi> - 1|: distance inside the vacuum sector
    err_su_full: np.ndarray     # ||psi - psi_su||, includes the emitted part
    err_na: np.ndarray          # ||psi - (psi_su + psi_na)||
    ref_gap_at_rest: float      # max distance between the two references at rest times
    residual_phase: np.ndarray  # arg <psi_ad, psi>


def time_trace(sc, epsilon):
    grid, sol = solve(sc, epsilon)
    sys, eps = sc.system, float(epsilon)
    out = {k: [] for k in ("ad", "su", "sf", "na", "ph")}
    gap = 0.0
    for i, t in enumerate(sol.times):
        psi = sol.state(i)
        th_ad = -sol.int_e_sigma[i] / eps
        th_su = -sol.int_e_eps[i] / eps
        ad = adiabatic_state(sys, grid, t, th_ad)
        su = superadiabatic_state(sys, grid, t, eps, th_su)
        out["ad"].append(state_distance(psi, ad))
        out["su"].append(abs(overlap(su, psi) - 1.0))
        out["sf"].append(state_distance(psi, su))
        dressed = dress_transform(psi, sys, grid, t, eps)
        out["na"].append(_na_residual(dressed, sol.beta[i], th_su))
        out["ph"].append(float(np.angle(overlap(ad, psi))))
        if sc.in_rest(t):
            gap = max(gap, state_distance(adiabatic_state(sys, grid, t, th_ad),
                                          superadiabatic_state(sys, grid, t, eps, th_ad)))
    arr = {k: np.array(v) for k, v in out.items()}
    return TimeTrace(sol.times, arr["ad"], arr["su"], arr["sf"], arr["na"], gap, arr["ph"])


def error_adiabatic(sc, epsilon):
    """max_t || psi(t) - exp(-i/eps int E_sigma) Omega_sigma(t) || on the sampling mesh."""
    return float(np.max(time_trace(sc, epsilon).err_ad))


def error_superadiabatic(sc, epsilon):
    """max_t || Q_0^eps(t) psi(t) - psi_su(t) || on the sampling mesh."""
    return float(np.max(time_trace(sc, epsilon).err_su))


@dataclass(frozen=True)
class RadiationRecord:
    t: float
    e_beta: float
    e_double: float
    e_larmor: float
    e_static_check: float | None
    int_dd2: float

    def as_dict(self):
        return {"t": self.t, "e_rad_beta": self.e_beta, "e_rad_double": self.e_double,
                "e_rad_larmor": self.e_larmor, "e_static_check": self.e_static_check,
                "int_dd2": self.int_dd2}


def larmor_energy(epsilon, int_dd2):
    return epsilon**3 / (12.0 * np.pi) * int_dd2


def _solution_upto(sc, epsilon, t):
    grid, sol = solve(sc, epsilon)
    if t is None or np.isclose(t, sol.times[-1]):
        return grid, sol, len(sol.times) - 1
    hits = np.flatnonzero(np.isclose(sol.times, t, rtol=0, atol=1e-12))
    if hits.size:
        return grid, sol, int(hits[0])
    t0, t1 = sc.window
    if not t0 < t < t1:
        raise ValueError(f"t={t} outside the scenario window {sc.window}")
    steps = max(MESH_INTERVALS, int(round(sc.step_count * (t - t0) / (t1 - t0))))
    params = EvolutionParams(float(epsilon), t0, float(t), steps, sc.sigma_rule)
    sub = propagate(sc.system, grid, params, output_every=steps, track_beta=True,
                    track_pairs=True)
    return grid, sub, len(sub.times) - 1


def radiated_energy(sc, epsilon, t=None):
    """Free-boson energy at time t (default: end of window) by three routes."""
    grid, sol, i = _solution_upto(sc, epsilon, t)
    eps = float(epsilon)
    t = float(sol.times[i])
    beta = sol.beta[i]
    e_beta = float((grid.knorm * np.abs(beta) ** 2) @ grid.weights)
    if i == len(sol.times) - 1 and sol.pair_amps is not None:
        pairs = sol.pair_amps
    else:
        params = EvolutionParams(eps, sc.window[0], t,
                                 max(MESH_INTERVALS, int(round(sc.step_count * (t - sc.window[0])
                                                               / (sc.window[1] - sc.window[0])))),
                                 sc.sigma_rule)
        pairs = propagate(sc.system, grid, params, output_every=params.step_count,
                          track_pairs=True).pair_amps
    e_double = double_time_energy(sc.system, grid, eps, pairs)
    static = None
    if sc.in_rest(t):
        c = couplings_at(sc.system, grid, t)
        static = lab_energy(sol.state(i), c.v) - ground_energy(sc.system, grid, t, c)
    dd2 = float(sol.int_dd2[i])
    return RadiationRecord(t, e_beta, e_double, larmor_energy(eps, dd2), static, dd2)


@dataclass(frozen=True)
class DeformationRecord:
    t: float
    numeric: float
    formula: float          # eps^2/4 coefficient
    formula_alt: float      # eps^2/2 coefficient
    verdict: str

    def as_dict(self):
        return {"t": self.t, "numeric": self.numeric, "formula_quarter": self.formula,
                "formula_half": self.formula_alt, "verdict": self.verdict}


def _verdict(numeric, quarter, half, tol=0.05):
    hits = [name for name, val in (("eps^2/4", quarter), ("eps^2/2", half))
            if val != 0 and abs(numeric / val - 1.0) <= tol]
    return hits[0] if len(hits) == 1 else ("ambiguous" if hits else "neither")


def deformation_energy(sc, epsilon, t=None):
    """Dressed-frame field energy of psi - psi_ad next to the two candidate formulas."""
    t = sc.deform_time if t is None else t
    if t is None:
        raise ValueError(f"scenario {sc.name} has no motion window")
    if sc.in_rest(t):
        raise ValueError("deformation energy is defined inside the motion window")
    grid, sol, i = _solution_upto(sc, epsilon, t)
    t = float(sol.times[i])
    c = couplings_at(sc.system, grid, t)
    r = sol.alpha[i] - adiabatic_amplitude(c.v, grid.knorm)
    numeric = float((grid.knorm * np.abs(r) ** 2) @ grid.weights)
    pair = dressed_energy(sc.system, grid, t, epsilon).pair_integral
    quarter, half = 0.25 * epsilon**2 * pair, 0.5 * epsilon**2 * pair
    return DeformationRecord(t, numeric, quarter, half, _verdict(numeric, quarter, half))


def emission_probability(sc, epsilon):
    """1 - P_0 of the dressed state at the end of the window."""
    grid, sol = solve(sc, epsilon)
    t = sol.times[-1]
    dressed = dress_transform(sol.state(-1), sc.system, grid, t, epsilon)
    return float(-np.expm1(-l2_norm_sq(grid, dressed.amplitude)))


# ---------------------------------------------------------------- sweeps

def run_cell(sc, epsilon):
    eps = float(epsilon)
    trace = time_trace(sc, eps)
    rad = radiated_energy(sc, eps)
    row = {"epsilon": eps, "sigma": float(sc.sigma(eps)),
           "err_ad": float(trace.err_ad.max()), "err_su": float(trace.err_su.max()),
           "p_emit": emission_probability(sc, eps), "e_rad_beta": rad.e_beta,
           "e_rad_double": rad.e_double, "e_rad_larmor": rad.e_larmor}
    extra = {"err_su_full": float(trace.err_su_full.max()), "err_na": float(trace.err_na.max()),
             "ref_gap_at_rest": trace.ref_gap_at_rest, "e_static_check": rad.e_static_check,
             "residual_phase_end": float(trace.residual_phase[-1]),
             "err_ad_end": float(trace.err_ad[-1])}
    if sc.deform_time is not None:
        d = deformation_energy(sc, eps)
        row["e_deform"] = d.numeric
        extra["deformation"] = d.as_dict()
    else:
        row["e_deform"] = 0.0
    return row, extra


def _run_cell_args(args):
    return run_cell(*args)


@dataclass
class SweepResult:
    scenario: dict
    rows: list
    extras: list
    fits: dict
    verdicts: dict
    metadata: dict

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([repr(float(r[k])) for k in CSV_HEADER])
        return buf.getvalue()

    def to_json(self):
        doc = {"scenario": self.scenario, "rows": self.rows, "extras": self.extras,
               "fits": self.fits, "verdicts": self.verdicts, "metadata": self.metadata}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if np.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _fit_block(rows, key):
    pts = [(r["epsilon"], r[key]) for r in rows]
    if any(v <= 0 for _, v in pts):
        return {"error": f"non-positive {key} values; no fit"}
    return {m: f.as_dict() for m, f in fit_all(pts).items()}


def sweep(sc, ladder=DEFAULT_LADDER, workers=1, metadata=None):
    ladder = sorted({float(e) for e in ladder}, reverse=True)
    if len(ladder) < MIN_POINTS:
        raise ValueError(f"need >= {MIN_POINTS} points in the epsilon ladder for a fit")
    cells = [(sc, e) for e in ladder]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell_args, cells))
    else:
        results = [run_cell(*c) for c in cells]
    order = np.argsort([r[0]["epsilon"] for r in results])
    rows = [results[i][0] for i in order]
    extras = [results[i][1] for i in order]
    fits, verdicts = {}, {}
    for key in ("err_ad", "err_su", "p_emit", "e_rad_beta", "e_deform"):
        fits[key] = _fit_block(rows, key)
    fits["err_na"] = _fit_block([{"epsilon": r["epsilon"], "err_na": x["err_na"]}
                                 for r, x in zip(rows, extras)], "err_na")
    for key, (target, tol) in EXPECTED_EXPONENTS.items():
        block = fits[key]
        if "pure_power" in block:
            p = block["pure_power"]["exponent"]
            verdicts[key] = {"target": target, "tolerance": tol, "exponent": p,
                             "consistent": bool(abs(p - target) <= tol)}
    meta = {"version": __version__, "sigma_rule": sc.sigma_rule.describe(),
            "mesh_intervals": MESH_INTERVALS}
    meta.update(metadata or {})
    return SweepResult(sc.describe(), rows, extras, fits, verdicts, meta)
