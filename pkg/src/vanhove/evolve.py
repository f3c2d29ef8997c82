"""Dynamics on the coherent sector.

Because H(t) = H_f + Phi(v(t)) is linear in the field, a displaced vacuum
stays a displaced vacuum.  With psi = exp(i theta) W(alpha) Omega_0 the
Schroedinger equation i eps d/dt psi = H psi is equivalent to

    i eps d/dt alpha(k) = |k| alpha(k) + v(k) / sqrt 2
    eps d/dt theta      = -Re <v, alpha> / sqrt 2.

Writing alpha = alpha_ad + r with the instantaneous ground-state amplitude
alpha_ad = -v / (sqrt 2 |k|) gives, with omega = |k| / eps,

    r(t) = exp(-i omega t) [exp(i omega t0) r(t0) + 1/(sqrt 2 |k|) int exp(i omega s) vdot(s) ds]
    theta(t) = theta(t0) - (1/eps) int E_sigma ds - 1/(sqrt 2 eps) int Re <v(s), r(s)> ds.

Both time integrals are done panel by panel with Filon weights, the second
one as an ordered double integral, so the cost does not grow as eps -> 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .coherent import CoherentState, SQRT2, vacuum, weyl_apply
from .filon import panel_weights, triangle_weights
from .model import _source_factors, coupling_v, couplings_at, form_factor

PANEL_NODES = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
SIMPSON38 = np.array([1.0, 3.0, 3.0, 1.0]) / 8.0
MIN_PANELS = 64
MESH_INTERVALS = 64


class EvolutionGuardError(ValueError):
    """Time discretisation violates the envelope-resolution rule."""


@dataclass(frozen=True)
class SigmaRule:
    """Infrared cutoff as a function of eps: fixed value or eps**power."""
    kind: str = "fixed"
    sigma: float = 0.0
    power: float = 2.0

    def __post_init__(self):
        if self.kind not in ("fixed", "power"):
            raise ValueError(f"unknown sigma rule {self.kind!r}")
        if self.kind == "fixed" and self.sigma < 0:
            raise ValueError("sigma must be non-negative")

    def resolve(self, epsilon):
        return self.sigma if self.kind == "fixed" else float(epsilon) ** self.power

    def describe(self):
        if self.kind == "fixed":
            return {"kind": "fixed", "sigma": self.sigma}
        return {"kind": "power", "power": self.power, "reference_power": 8}


@dataclass(frozen=True)
class EvolutionParams:
    epsilon: float
    t0: float
    t1: float
    step_count: int
    sigma_rule: SigmaRule = field(default_factory=SigmaRule)

    def __post_init__(self):
        if not 0 < self.epsilon <= 1:
            raise ValueError("epsilon must lie in (0, 1]")
        if not self.t1 > self.t0:
            raise ValueError("t1 must exceed t0")
        if self.step_count < MIN_PANELS:
            raise EvolutionGuardError(
                f"step_count={self.step_count} gives panels longer than (t1-t0)/{MIN_PANELS}; "
                f"use step_count >= {MIN_PANELS} (and more when sources move fast)")

    @property
    def h(self):
        return (self.t1 - self.t0) / self.step_count


@dataclass
class Propagation:
    """Exact coherent-sector solution sampled at panel boundaries."""
    grid: object
    epsilon: float
    times: np.ndarray
    alpha: np.ndarray             # (m, n) lab-frame amplitudes
    theta: np.ndarray             # (m,) global phases
    int_e_sigma: np.ndarray       # (m,) int_t0^t E_sigma
    int_e_eps: np.ndarray         # (m,) int_t0^t E^eps_sigma
    int_dd2: np.ndarray           # (m,) int_t0^t |d''|^2
    beta: np.ndarray | None = None        # (m, n) first-order emission amplitude
    pair_amps: np.ndarray | None = None   # (n_src, n) at the last time

    def state(self, i):
        return CoherentState(self.alpha[i], self.theta[i], self.grid)

    def states(self):
        return [self.state(i) for i in range(len(self.times))]


def _radial_index(knorm):
    """Group nodes of equal |k| so that Filon weights are computed once per radius."""
    key = np.round(np.log(knorm), 11)
    _, first, inv = np.unique(key, return_index=True, return_inverse=True)
    return knorm[first], inv


class _Sampler:
    """Coupling arrays at one time, restricted to what the propagator needs."""

    def __init__(self, sys, grid, epsilon, need_beta, need_pairs):
        self.sys, self.grid, self.eps = sys, grid, epsilon
        self.need_beta, self.need_pairs = need_beta, need_pairs
        kn = grid.knorm
        self.kn = kn
        self.w = grid.weights
        self.e = np.asarray(sys.charges, dtype=float)

    def __call__(self, s):
        sys, grid, kn, w = self.sys, self.grid, self.kn, self.w
        x, xd, xdd = (sys.state(s, n) for n in range(3))
        a = _source_factors(sys, grid, x)
        vel = xd @ grid.kappa.T
        acc = xdd @ grid.kappa.T
        v = kn * a.sum(axis=0)
        z2 = 1j * (a * vel).sum(axis=0)
        g = 1j * (a * acc).sum(axis=0)
        z2dot = g - kn * (a * vel**2).sum(axis=0)
        e_sig = -0.5 * float((np.abs(v) ** 2 / kn) @ w)
        im21 = float((kn * np.abs(z2) ** 2) @ w)
        im22 = float(np.imag((np.conj(z2) * z2dot) @ w))
        e_eps = e_sig - 0.5 * self.eps**2 * im21 + 0.5 * self.eps**3 * im22
        dd = self.e @ xdd
        out = {"v": v, "z2": z2, "e_sig": e_sig, "e_eps": e_eps, "dd2": float(dd @ dd)}
        if self.need_beta:
            out["g"] = g
        if self.need_pairs:
            # ordering: exp(-i k.x_j) (kappa . xddot_j), one row per source
            out["pairs"] = np.exp(-1j * (x @ grid.nodes.T)) * acc
        return out


def adiabatic_amplitude(v, knorm):
    return -v / (SQRT2 * knorm)


def propagate(sys, grid, params, initial=None, output_every=None, track_beta=False,
              track_pairs=False):
    """Integrate the coherent-sector equations from params.t0 to params.t1.

    ``initial`` defaults to the instantaneous dressed ground state at t0.
    Results are stored every ``output_every`` panels (default: a 64-interval
    mesh when step_count is a multiple of 64, else every panel) and at t1.
    """
    eps = float(params.epsilon)
    P, h = params.step_count, params.h
    if output_every is None:
        output_every = P // MESH_INTERVALS if P % MESH_INTERVALS == 0 else 1
    kn = grid.knorm
    w = grid.weights
    omega = kn / eps
    c = 1.0 / (SQRT2 * kn)

    kr, inv = _radial_index(kn)
    w1 = panel_weights(kr * h / eps, PANEL_NODES)[inv]             # (n, 4)
    tri = triangle_weights(kr * h / eps, PANEL_NODES)[inv]         # (n, 4, 4)

    sampler = _Sampler(sys, grid, eps, track_beta, track_pairs)
    t0 = params.t0
    first = sampler(t0)
    if initial is None:
        initial = CoherentState(adiabatic_amplitude(first["v"], kn), 0.0, grid)
    elif not initial.grid.same_as(grid):
        raise ValueError("initial state lives on a different grid")
    K = np.exp(1j * omega * t0) * (initial.amplitude - adiabatic_amplitude(first["v"], kn))
    theta0 = initial.phase

    R = np.zeros(len(grid), dtype=complex)
    B = np.zeros(len(grid), dtype=complex) if track_beta else None
    A = np.zeros((len(sys.charges), len(grid)), dtype=complex) if track_pairs else None
    phase_int = 0.0
    int_es = int_ee = int_dd = 0.0

    rec = {"t": [], "alpha": [], "theta": [], "es": [], "ee": [], "dd": [], "beta": []}

    def record(t, samp):
        rec["t"].append(t)
        rot = np.exp(-1j * omega * t)
        rec["alpha"].append(adiabatic_amplitude(samp["v"], kn) + rot * (K + c * R))
        rec["theta"].append(theta0 - int_es / eps - phase_int / (eps * SQRT2))
        rec["es"].append(int_es)
        rec["ee"].append(int_ee)
        rec["dd"].append(int_dd)
        if track_beta:
            rec["beta"].append(1j * eps / SQRT2 * rot * B)

    record(t0, first)
    prev = first
    for p in range(P):
        a = t0 + p * h
        samples = [prev] + [sampler(a + h * u) for u in PANEL_NODES[1:]]
        V = np.stack([s["v"] for s in samples])                     # (4, n)
        Vd = np.stack([s["z2"] for s in samples]) * kn**2           # vdot = |k|^2 z2
        ph = h * np.exp(1j * omega * a)
        G = ph * np.einsum("na,an->n", w1, Vd)
        F = np.conj(ph * np.einsum("na,an->n", w1, V))
        D = h * h * np.einsum("an,nab,bn->n", np.conj(V), tri, Vd)
        phase_int += float(np.real((F * (K + c * R) + c * D) @ w))
        R += G
        if track_beta:
            Gr = np.stack([s["g"] for s in samples])
            B += ph * np.einsum("na,an->n", w1, Gr)
        if track_pairs:
            Pr = np.stack([s["pairs"] for s in samples])            # (4, n_src, n)
            A += ph * np.einsum("na,ajn->jn", w1, Pr)
        int_es += h * float(SIMPSON38 @ [s["e_sig"] for s in samples])
        int_ee += h * float(SIMPSON38 @ [s["e_eps"] for s in samples])
        int_dd += h * float(SIMPSON38 @ [s["dd2"] for s in samples])
        prev = samples[-1]
        if (p + 1) % output_every == 0 or p + 1 == P:
            record(params.t1 if p + 1 == P else a + h, prev)

    return Propagation(
        grid=grid, epsilon=eps, times=np.array(rec["t"]), alpha=np.array(rec["alpha"]),
        theta=np.array(rec["theta"]), int_e_sigma=np.array(rec["es"]),
        int_e_eps=np.array(rec["ee"]), int_dd2=np.array(rec["dd"]),
        beta=np.array(rec["beta"]) if track_beta else None, pair_amps=A,
    )


def evolve_exact(initial, sys, grid, params, output_every=None):
    """Exact lab-frame states at the output times (list of CoherentState)."""
    sol = propagate(sys, grid, params, initial=initial, output_every=output_every)
    return sol.times, sol.states()


def adiabatic_state(sys, grid, t, accumulated_phase=0.0):
    """Dressed ground state Omega_sigma(t) = V_sigma(t)^* Omega_0 times exp(i phase)."""
    v = coupling_v(sys, grid, t)
    st = weyl_apply(vacuum(grid), 1j * v / grid.knorm, +1)
    return st.with_phase(st.phase + accumulated_phase)


def superadiabatic_state(sys, grid, t, epsilon, accumulated_phase=0.0):
    """V_sigma^* exp(-i eps Phi(z2)) Omega_0 times exp(i phase)."""
    c = couplings_at(sys, grid, t)
    st = weyl_apply(vacuum(grid), epsilon * c.z2, -1)
    st = weyl_apply(st, 1j * c.v / grid.knorm, +1)
    return st.with_phase(st.phase + accumulated_phase)


def dress_transform(state, sys, grid, t, epsilon, direction="lab_to_dressed"):
    """Apply V^eps_sigma(t) = exp(i eps Phi(z2)) V_sigma (or its inverse)."""
    if not state.grid.same_as(grid):
        raise ValueError("state lives on a different grid")
    if not np.isfinite(t):
        raise ValueError("dressing requires a finite time")
    c = couplings_at(sys, grid, t)
    gen_v = 1j * c.v / grid.knorm
    gen_z = epsilon * c.z2
    if direction == "lab_to_dressed":
        return weyl_apply(weyl_apply(state, gen_v, -1), gen_z, +1)
    if direction == "dressed_to_lab":
        return weyl_apply(weyl_apply(state, gen_z, -1), gen_v, +1)
    raise ValueError(f"unknown direction {direction!r}")


@dataclass(frozen=True, eq=False)
class OneBosonAmplitude:
    beta: np.ndarray
    t: float
    epsilon: float
    grid: object

    @property
    def emission_probability(self):
        return float((np.abs(self.beta) ** 2) @ self.grid.weights)

    @property
    def energy(self):
        return float((self.grid.knorm * np.abs(self.beta) ** 2) @ self.grid.weights)


def nonadiabatic_beta(sys, grid, params, t):
    """First-order one-boson amplitude
    beta(k, t) = i eps / sqrt 2 exp(-i |k| t / eps) int_t0^t exp(i |k| s / eps) g_rad(k, s) ds."""
    if not params.t0 < t:
        raise ValueError("t must exceed t0")
    frac = (t - params.t0) / (params.t1 - params.t0)
    steps = max(MIN_PANELS, int(round(params.step_count * frac)))
    sub = replace(params, t1=float(t), step_count=steps)
    sol = propagate(sys, grid, sub, output_every=steps, track_beta=True)
    return OneBosonAmplitude(sol.beta[-1], float(t), params.epsilon, grid)


def double_time_energy(sys, grid, epsilon, pair_amps):
    """eps^2/2 sum_ij e_i e_j int |phi_hat|^2/|k|^2 A_j conj(A_i) dk from per-source
    time integrals A_j(k) = int exp(i|k|s/eps) exp(-i k.x_j(s)) kappa.xddot_j(s) ds."""
    kn = grid.knorm
    base = form_factor(kn, sys.lam) ** 2 / kn**2
    base = np.where(kn >= grid.sigma_ir, base, 0.0)
    e = np.asarray(sys.charges, dtype=float)
    total = 0.0 + 0.0j
    for i in range(len(e)):
        for j in range(len(e)):
            total += e[i] * e[j] * ((base * pair_amps[j] * np.conj(pair_amps[i])) @ grid.weights)
    return float(0.5 * epsilon**2 * np.real(total))
