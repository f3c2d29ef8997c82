import numpy as np
import pytest

from vanhove.coherent import CoherentState, overlap, vacuum
from vanhove.evolve import EvolutionParams, adiabatic_state, propagate
from vanhove.fock_oracle import (TruncatedFockSpace, build_operators, coherent_embed,
                                 discrete_ground_energy, fidelity, hamiltonian,
                                 integrate_schrodinger, oracle_grid, oracle_system,
                                 run_oracle_checks, weyl_matrix)
from scipy.linalg import expm


@pytest.fixture(scope="module")
def space():
    return TruncatedFockSpace(oracle_grid(), 14)


@pytest.fixture(scope="module")
def ops(space):
    return build_operators(space)


def test_dimension(space):
    assert space.dim == space.expected_dim == 680


def test_too_many_modes():
    from vanhove.grid import build_grid
    with pytest.raises(ValueError):
        TruncatedFockSpace(build_grid(0.1, 1.0, 2, 2), 4)


def test_ccr_on_vacuum(space, ops):
    e0 = np.zeros(space.dim)
    e0[0] = 1
    for m, a in enumerate(ops.a):
        assert e0 @ a @ a.conj().T @ e0 == pytest.approx(space.grid.weights[m])
        # commutator holds below the top photon level
        comm = a @ a.conj().T - a.conj().T @ a
        low = space.basis.sum(axis=1) < space.photon_cutoff
        assert np.allclose(np.diag(comm)[low], space.grid.weights[m])


def test_free_hamiltonian_spectrum(space, ops):
    assert np.allclose(np.diag(ops.h_f).real, space.basis @ space.grid.knorm)


def test_discrete_ground_energy(space, ops):
    sys = oracle_system()
    h = hamiltonian(ops, sys, 0.0)
    assert np.allclose(h, h.conj().T)
    assert np.linalg.eigvalsh(h)[0] == pytest.approx(discrete_ground_energy(sys, space.grid, 0.0),
                                                     abs=1e-6)


def test_embed_vacuum_and_mass(space):
    v = coherent_embed(space, vacuum(space.grid))
    assert v[0] == 1 and np.count_nonzero(v) == 1
    amp = np.array([1.0, 0.0, 0.0]) / np.sqrt(space.grid.weights[0])
    _, mass = coherent_embed(space, CoherentState(amp, 0.0, space.grid), return_mass=True)
    assert mass <= 1e-10
    with pytest.raises(ValueError, match="truncation mass"):
        coherent_embed(space, CoherentState(amp * 3, 0.0, space.grid))


def test_embedded_overlap(space):
    g = space.grid
    a = CoherentState(np.array([0.2, -0.1j, 0.3]), 0.5, g)
    b = CoherentState(np.array([-0.1, 0.2 + 0.2j, 0.1]), -0.2, g)
    assert fidelity(coherent_embed(space, a), coherent_embed(space, b)) == pytest.approx(
        complex(overlap(a, b)), abs=1e-8)


def test_constant_hamiltonian_against_expm(space, ops):
    from vanhove.model import SourceSystem
    from vanhove.trajectory import rest
    sys = SourceSystem((2.0,), (rest((0.1, 0.2, 0.0)),))
    p = EvolutionParams(0.5, 0.0, 1.0, 64)
    y0 = np.zeros(space.dim, dtype=complex)
    y0[1] = 1.0
    _, ys = integrate_schrodinger(space, sys, p, y0, t_eval=[1.0])
    ref = expm(-1j / 0.5 * hamiltonian(ops, sys, 0.0)) @ y0
    assert np.max(np.abs(ys[-1] - ref)) <= 1e-9


def test_eigenstate_phase(space, ops):
    from vanhove.model import SourceSystem
    from vanhove.trajectory import rest
    sys = SourceSystem((4.0,), (rest((0.0, 0.3, 0.1)),))
    w, v = np.linalg.eigh(hamiltonian(ops, sys, 0.0))
    eps = 0.2
    _, ys = integrate_schrodinger(space, sys, EvolutionParams(eps, 0.0, 1.0, 64), v[:, 0],
                                  t_eval=[1.0])
    assert fidelity(np.exp(-1j * w[0] / eps) * v[:, 0], ys[-1]).real >= 1 - 1e-8


@pytest.mark.parametrize("eps", [0.5, 0.2, 0.1])
def test_evolution_matches_oracle(space, eps):
    sys = oracle_system()
    p = EvolutionParams(eps, -0.2, 1.2, 128)
    psi0 = adiabatic_state(sys, space.grid, p.t0)
    _, ys = integrate_schrodinger(space, sys, p, coherent_embed(space, psi0), t_eval=[p.t1])
    sol = propagate(sys, space.grid, p, initial=psi0)
    assert fidelity(coherent_embed(space, sol.state(-1)), ys[-1]).real >= 1 - 1e-6


def test_weyl_vacuum_convention(space, ops):
    g = np.array([0.2, -0.1 + 0.3j, 0.4j])
    vec = weyl_matrix(ops, 1j * g, -1)[:, 0]
    # e^{-i Phi(i g)} Omega_0 is the coherent state with amplitude g / sqrt 2
    ref = coherent_embed(space, CoherentState(g / np.sqrt(2), 0.0, space.grid))
    assert fidelity(ref, vec).real >= 1 - 1e-8


def test_two_photon_sector_adiabatic(space, ops):
    """A two-boson dressed state stays in its dressed sector up to small losses."""
    sys = oracle_system(charge=2.0)
    g = space.grid
    vals = []
    for eps in (0.4, 0.2):
        p = EvolutionParams(eps, -0.2, 1.2, 128)
        V0 = expm(-1j * ops.field(1j * adiabatic_vec(sys, g, p.t0)))
        ad = ops.a[0].conj().T / np.sqrt(g.weights[0])
        phi0 = ad @ ad[:, 0] / np.sqrt(2)
        psi0 = V0.conj().T @ phi0
        _, ys = integrate_schrodinger(space, sys, p, psi0, t_eval=[p.t1])
        V1 = expm(-1j * ops.field(1j * adiabatic_vec(sys, g, p.t1)))
        dressed = V1 @ ys[-1]
        two = space.basis.sum(axis=1) == 2
        vals.append(1 - np.sum(np.abs(dressed[two]) ** 2))
    assert vals[1] < vals[0]
    assert vals[1] < 0.05


def adiabatic_vec(sys, g, t):
    from vanhove.model import coupling_v
    return coupling_v(sys, g, t) / g.knorm


def test_run_oracle_checks_all_pass():
    report = run_oracle_checks(epsilons=(0.5,))
    assert all(c["passed"] for c in report), [c for c in report if not c["passed"]]
