import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vanhove.coherent import (CoherentState, WeylGenerator, displace, field_energy,
                              field_expectation, overlap, photon_number, sector_prob,
                              state_distance, vacuum, weyl_apply)
from vanhove.grid import ModeGrid, build_grid

GRID = build_grid(0.2, 3.0, 4, 2, azimuth_count=2)
N = len(GRID)

amps = st.lists(st.tuples(st.floats(-1, 1), st.floats(-1, 1)), min_size=N, max_size=N).map(
    lambda xs: np.array([complex(a, b) for a, b in xs]) * 0.3)
phases = st.floats(-np.pi, np.pi)


def cs(a, th=0.0):
    return CoherentState(a, th, GRID)


def test_overlap_self_and_vacuum():
    a = cs(np.linspace(0, 1, N) * (1 + 1j), 0.4)
    assert overlap(a, a) == pytest.approx(1.0, abs=1e-13)
    # ||beta||^2 = 2 against the vacuum gives exp(-1)
    beta = np.ones(N) * np.sqrt(2.0 / GRID.weights.sum())
    assert overlap(vacuum(GRID), cs(beta)).real == pytest.approx(np.exp(-1), rel=1e-12)


def test_distance_antipodal():
    a = cs(np.full(N, 0.2j))
    assert state_distance(a, a.with_phase(np.pi)) == pytest.approx(2.0, abs=1e-14)
    assert state_distance(a, a) == 0.0


def test_grid_mismatch():
    other = build_grid(0.2, 3.0, 4, 2, azimuth_count=2)
    other = ModeGrid(other.nodes * 1.01, other.weights, 0.2, 3.1)
    with pytest.raises(ValueError):
        overlap(vacuum(GRID), vacuum(other))


def test_weyl_orthogonal_generator_no_phase():
    a = cs(np.ones(N) * 0.1)
    # i f / sqrt 2 with f real gives a purely imaginary displacement; <beta, alpha> is then
    # imaginary, so pick f = i * real to make the symplectic form vanish
    out = weyl_apply(a, 1j * np.ones(N) * 0.5, +1)
    assert out.phase == pytest.approx(a.phase, abs=1e-15)


def test_weyl_sign_rejected():
    with pytest.raises(ValueError):
        weyl_apply(vacuum(GRID), np.ones(N), 2)


def test_weyl_of_vacuum_amplitude():
    g = np.linspace(0.1, 0.5, N) * (1 - 0.5j)
    out = weyl_apply(vacuum(GRID), WeylGenerator(1j * g, "V*"), -1)
    assert np.allclose(out.amplitude, g / np.sqrt(2))


def test_field_energy_and_number_construction():
    shell = np.abs(GRID.knorm - GRID.knorm[np.argmin(np.abs(GRID.knorm - 1))]) < 1e-12
    a = np.where(shell, 1.0, 0.0).astype(complex)
    a /= np.sqrt((np.abs(a) ** 2) @ GRID.weights)
    st_ = cs(a)
    assert photon_number(st_) == pytest.approx(1.0)
    assert field_energy(st_) == pytest.approx(GRID.knorm[shell][0], rel=1e-12)
    assert photon_number(vacuum(GRID)) == 0 and field_energy(vacuum(GRID)) == 0


def test_sector_probabilities():
    assert sector_prob(vacuum(GRID), 0) == 1.0 and sector_prob(vacuum(GRID), 3) == 0.0
    beta = np.ones(N) / np.sqrt(GRID.weights.sum())
    assert sector_prob(cs(beta), 0) == pytest.approx(np.exp(-1), rel=1e-12)
    with pytest.raises(ValueError):
        sector_prob(cs(beta), -1)


@settings(max_examples=60, deadline=None)
@given(amps, phases, amps, phases)
def test_overlap_bounded_and_distance_identity(a, ta, b, tb):
    x, y = cs(a, ta), cs(b, tb)
    ov = overlap(x, y)
    assert abs(ov) <= 1 + 1e-12
    d = state_distance(x, y)
    assert d**2 == pytest.approx(2 - 2 * ov.real, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(amps, amps, amps)
def test_triangle_inequality(a, b, c):
    x, y, z = cs(a), cs(b, 0.3), cs(c, -1.1)
    assert state_distance(x, z) <= state_distance(x, y) + state_distance(y, z) + 1e-12


@settings(max_examples=40, deadline=None)
@given(amps, phases, amps)
def test_weyl_inverse_and_composition(a, th, f):
    s = cs(a, th)
    back = weyl_apply(weyl_apply(s, f, +1), f, -1)
    assert np.allclose(back.amplitude, s.amplitude, atol=1e-12)
    assert back.phase == pytest.approx(s.phase, abs=1e-12)
    g = np.roll(f, 1) * 0.7j
    two = weyl_apply(weyl_apply(s, f, +1), g, +1)
    # W(y) W(x) = exp(-i Im<y, x>) W(x + y), with x = i f / sqrt 2, y = i g / sqrt 2
    x, y = 1j * f / np.sqrt(2), 1j * g / np.sqrt(2)
    im = np.imag((np.conj(y) * x) @ GRID.weights)
    one = displace(s, x + y)
    one = one.with_phase(one.phase - im)
    assert state_distance(two, one) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(amps, st.floats(0.1, 3.0), phases)
def test_observables(a, c, th):
    s = cs(a)
    assert photon_number(cs(c * a)) == pytest.approx(c**2 * photon_number(s), rel=1e-9, abs=1e-15)
    assert field_energy(cs(c * a)) == pytest.approx(c**2 * field_energy(s), rel=1e-9, abs=1e-15)
    assert field_energy(s.with_phase(th)) == field_energy(s)
    assert sector_prob(s.with_phase(th), 1) == sector_prob(s, 1)
    total = sum(sector_prob(s, m) for m in range(41))
    assert total == pytest.approx(1.0, abs=1e-10)


def test_field_expectation():
    a = cs(np.full(N, 0.2 + 0.1j))
    f = np.ones(N)
    assert field_expectation(a, f) == pytest.approx(np.sqrt(2) * 0.2 * GRID.weights.sum())
