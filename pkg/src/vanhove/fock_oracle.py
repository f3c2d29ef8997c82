"""Dense truncated-Fock reference for a handful of modes.

The discrete model is the quadrature-weighted one used by the coherent
solver: with unit-normalised mode operators b_m,

    a(f) = sum_m sqrt(w_m) conj(f_m) b_m,   H_f = sum_m |k_m| b_m^dag b_m,

so the same grid gives the same Hamiltonian in both representations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import comb, lgamma

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .coherent import SQRT2
from .model import coupling_v

MAX_MODES = 4
TAIL_LIMIT = 1e-10


class OracleError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class TruncatedFockSpace:
    grid: object
    photon_cutoff: int = 14

    def __post_init__(self):
        if not 1 <= len(self.grid) <= MAX_MODES:
            raise ValueError(f"oracle supports 1..{MAX_MODES} modes, got {len(self.grid)}")
        if self.photon_cutoff < 1:
            raise ValueError("photon_cutoff must be positive")
        m = len(self.grid)
        basis = [n for n in product(range(self.photon_cutoff + 1), repeat=m)
                 if sum(n) <= self.photon_cutoff]
        basis.sort(key=lambda n: (sum(n), n))
        object.__setattr__(self, "basis", np.array(basis, dtype=int))
        object.__setattr__(self, "_index", {tuple(n): i for i, n in enumerate(basis)})

    @property
    def mode_count(self):
        return len(self.grid)

    @property
    def dim(self):
        return len(self.basis)

    @property
    def expected_dim(self):
        return comb(self.mode_count + self.photon_cutoff, self.mode_count)

    def lowering(self, m):
        """Unit-normalised b_m as a dense matrix."""
        out = np.zeros((self.dim, self.dim))
        for j, n in enumerate(self.basis):
            if n[m] > 0:
                lower = n.copy()
                lower[m] -= 1
                out[self._index[tuple(lower)], j] = np.sqrt(n[m])
        return out

    def number_total(self):
        return np.diag(self.basis.sum(axis=1).astype(float))


@dataclass
class FockOperators:
    h_f: np.ndarray
    b: list          # unit-normalised lowering operators
    a: list          # a_m = sqrt(w_m) b_m, so that [a_m, a_m^dag] = w_m below the cutoff
    space: TruncatedFockSpace

    def field(self, f):
        """Phi(f) = (a^dag(f) + a(f)) / sqrt 2 with a(f) antilinear in f."""
        f = np.asarray(f, dtype=complex)
        af = sum(np.conj(f[m]) * self.a[m] for m in range(len(f)))
        return (af.conj().T + af) / SQRT2


def build_operators(space):
    g = space.grid
    b = [space.lowering(m) for m in range(space.mode_count)]
    a = [np.sqrt(g.weights[m]) * b[m] for m in range(space.mode_count)]
    h_f = np.diag(space.basis @ g.knorm)
    return FockOperators(h_f.astype(complex), b, a, space)


def hamiltonian(ops, sys, t):
    v = coupling_v(sys, ops.space.grid, t)
    return ops.h_f + ops.field(v)


def integrate_schrodinger(space, sys, params, initial, t_eval=None, rtol=1e-12, atol=1e-13):
    """Solve i eps psi' = (H_f + Phi(v(t))) psi with an 8th-order Runge-Kutta method."""
    ops = build_operators(space)
    g = space.grid
    # H(t) = H_f + sum_m (v_m c_m^dag + conj(v_m) c_m), c_m = sqrt(w_m / 2) b_m
    c = [np.sqrt(0.5 * g.weights[m]) * ops.b[m] for m in range(space.mode_count)]
    cd = [x.T.copy() for x in c]
    hf = np.real(np.diag(ops.h_f))
    eps = params.epsilon

    def rhs(t, y):
        v = coupling_v(sys, g, t)
        hy = hf * y
        for m in range(space.mode_count):
            hy = hy + v[m] * (cd[m] @ y) + np.conj(v[m]) * (c[m] @ y)
        return -1j / eps * hy

    y0 = np.asarray(initial, dtype=complex)
    if y0.shape != (space.dim,):
        raise ValueError("initial vector has the wrong dimension")
    sol = solve_ivp(rhs, (params.t0, params.t1), y0, method="DOP853", rtol=rtol, atol=atol,
                    t_eval=t_eval)
    if not sol.success:
        raise OracleError(f"integration failed after {sol.nfev} evaluations: {sol.message}")
    drift = np.max(np.abs(np.linalg.norm(sol.y, axis=0) - 1.0))
    if drift > 1e-9:
        raise OracleError(f"norm drift {drift:.2e} exceeds 1e-9; tighten rtol/atol")
    return sol.t, sol.y.T


def coherent_embed(space, state, return_mass=False):
    """Occupation-basis expansion of exp(i theta) W(alpha) Omega_0, renormalised after truncation."""
    if not state.grid.same_as(space.grid):
        raise ValueError("state lives on a different grid")
    c = np.sqrt(space.grid.weights) * state.amplitude
    nsq = float(np.sum(np.abs(c) ** 2))
    logfact = np.array([[lgamma(k + 1) for k in n] for n in space.basis])
    with np.errstate(divide="ignore"):
        logabs = np.where(space.basis > 0, np.log(np.abs(c) + 0.0), 0.0)
    mag = np.exp(-0.5 * nsq + (space.basis * logabs).sum(axis=1) - 0.5 * logfact.sum(axis=1))
    # zero amplitude in a mode kills every component with n_m > 0
    dead = (np.abs(c)[None, :] == 0) & (space.basis > 0)
    mag[dead.any(axis=1)] = 0.0
    arg = (space.basis * np.angle(c)).sum(axis=1)
    vec = mag * np.exp(1j * (arg + state.phase))
    mass = max(0.0, 1.0 - float(np.vdot(vec, vec).real))
    if mass > TAIL_LIMIT:
        raise ValueError(f"truncation mass {mass:.2e} above {TAIL_LIMIT:g}; "
                         f"raise photon_cutoff or shrink the amplitude")
    vec = vec / np.linalg.norm(vec)
    return (vec, mass) if return_mass else vec


def fidelity(u, v):
    """Complex overlap <u, v>; its real part is 1 only if the phases agree as well."""
    return complex(np.vdot(u, v))


def weyl_matrix(ops, f, sign=1):
    """exp(sign * i Phi(f)) by dense matrix exponential."""
    return expm(sign * 1j * ops.field(f))


def discrete_ground_energy(sys, grid, t):
    """-1/2 sum_m w_m |v_m|^2 / |k_m| on the oracle's mode set."""
    v = coupling_v(sys, grid, t)
    return float(-0.5 * np.sum(grid.weights * np.abs(v) ** 2 / grid.knorm))


# ---------------------------------------------------------------- convention checks

def oracle_grid():
    """Three fixed modes, deliberately non-symmetric."""
    from .grid import ModeGrid
    nodes = np.array([[0.3, 0.0, 0.4], [0.0, 0.9, -0.2], [-0.5, 0.3, 1.1]])
    return ModeGrid.from_nodes(nodes, np.array([0.8, 1.1, 0.6]))


def oracle_system(charge=6.0):
    from .model import SourceSystem
    from .trajectory import smoothstep_translation
    tr = smoothstep_translation((0.0, 0.0, 0.0), (0.6, 0.0, 0.8), 0.0, 1.0)
    return SourceSystem((charge,), (tr,), lam=1.0)


def _check(name, passed, detail, value):
    return {"name": name, "passed": bool(passed), "detail": detail, "value": value}


def run_oracle_checks(epsilons=(0.5, 0.2, 0.1), photon_cutoff=14, threshold=1e-6):
    """Pin every sign and normalisation of the coherent solver against dense matrices."""
    from .coherent import CoherentState, overlap, vacuum, weyl_apply
    from .evolve import EvolutionParams, adiabatic_state, propagate, superadiabatic_state
    from .model import couplings_at

    g = oracle_grid()
    sys = oracle_system()
    space = TruncatedFockSpace(g, photon_cutoff)
    ops = build_operators(space)
    out = []

    f = np.array([0.3 + 0.2j, -0.4j, 0.5])
    ref = weyl_matrix(ops, 1j * f, -1)[:, 0]
    got = coherent_embed(space, weyl_apply(vacuum(g), 1j * f, -1))
    fid = fidelity(got, ref)
    out.append(_check("weyl_amplitude_sign", fid.real >= 1 - 1e-8,
                      f"Re<embed(W), expm(-i Phi(i g)) e0> = {fid.real:.12f}", fid.real))

    a = CoherentState(np.array([0.1, 0.2j, -0.1]), 0.3, g)
    h2 = np.array([-0.2, 0.1 + 0.3j, 0.2j])
    ref = weyl_matrix(ops, h2, 1) @ (weyl_matrix(ops, f, -1) @ coherent_embed(space, a))
    got = coherent_embed(space, weyl_apply(weyl_apply(a, f, -1), h2, 1))
    fid = fidelity(got, ref)
    out.append(_check("ccr_phase", fid.real >= 1 - 1e-8,
                      f"composition of two Weyl operators, Re fidelity = {fid.real:.12f}", fid.real))

    b = CoherentState(np.array([-0.3j, 0.25, 0.1 + 0.1j]), -0.7, g)
    fo = fidelity(coherent_embed(space, a), coherent_embed(space, b))
    co = complex(overlap(a, b))
    out.append(_check("overlap_formula", abs(fo - co) <= 1e-8,
                      f"|embedded - closed form| = {abs(fo - co):.2e}", abs(fo - co)))

    h = hamiltonian(ops, sys, 0.0)
    evals, evecs = np.linalg.eigh(h)
    e_disc = discrete_ground_energy(sys, g, 0.0)
    out.append(_check("ground_energy", abs(evals[0] - e_disc) <= 1e-6,
                      f"lowest eigenvalue {evals[0]:.10f} vs formula {e_disc:.10f}",
                      abs(evals[0] - e_disc)))
    gs = coherent_embed(space, adiabatic_state(sys, g, 0.0))
    ov = abs(fidelity(evecs[:, 0], gs))
    out.append(_check("adiabatic_state", ov >= 1 - 1e-8,
                      f"|<ground eigenvector, Omega_sigma>| = {ov:.12f}", ov))

    eps_s = 0.2
    c = couplings_at(sys, g, 0.5)
    ref = expm(1j * ops.field(1j * c.v / g.knorm)) @ (expm(-1j * eps_s * ops.field(c.z2))[:, 0])
    got = coherent_embed(space, superadiabatic_state(sys, g, 0.5, eps_s))
    fid = fidelity(got, ref)
    out.append(_check("superadiabatic_state", fid.real >= 1 - 1e-8,
                      f"V_sigma^* exp(-i eps Phi(z2)) Omega_0, Re fidelity = {fid.real:.12f}",
                      fid.real))

    for eps in epsilons:
        params = EvolutionParams(float(eps), -0.2, 1.2, 128)
        psi0 = adiabatic_state(sys, g, params.t0)
        _, ys = integrate_schrodinger(space, sys, params, coherent_embed(space, psi0),
                                      t_eval=[params.t1])
        sol = propagate(sys, g, params, initial=psi0)
        fid = fidelity(coherent_embed(space, sol.state(-1)), ys[-1])
        out.append(_check(f"evolution_eps_{eps:g}", fid.real >= 1 - threshold,
                          f"Re fidelity with dense propagation = {fid.real:.12f}", fid.real))
    return out
