from dataclasses import replace

import numpy as np
import pytest
from pytest import approx, mark

from hopf_lab.dynamics import (LimitCycle, find_limit_cycle, fourier_amplitude, integrate, monodromy,
                               phase_shift, sample_cycle)
from hopf_lab.errors import InvalidArgument, InvalidCycle, NoCycleFound
from hopf_lab.linear import spectral_data
from hopf_lab.predprey import PredPreyParams, galerkin_system
from hopf_lab.systems import PolynomialField, planar_cubic

ROTATION = PolynomialField(2, [(0, (0, 1), [1.0]), (1, (1, 0), [-1.0])]).system(label="rotation")


def spec_of(sys):
    return spectral_data(sys, 0.0, 1.0)


@pytest.fixture(scope="module")
def transcritical_cycle():
    sys = planar_cubic(3)
    spec = spec_of(sys)
    return sys, spec, find_limit_cycle(sys, 0.2, 0.2 / np.sqrt(1.5), "backward", spec=spec)


@pytest.fixture(scope="module")
def subcritical_cycle():
    sys = planar_cubic(1)
    spec = spec_of(sys)
    return sys, spec, find_limit_cycle(sys, -0.1, np.sqrt(0.2 / 3), "backward", spec=spec)


def test_equilibrium_stays_put():
    traj = integrate(planar_cubic(1), [0.0, 0.0], 0.3, (0.0, 50.0))
    assert np.max(np.abs(traj.states)) <= 1e-11


def test_trivial_solution_attracts_in_degenerate_case():
    traj = integrate(planar_cubic(3), [0.05, 0.0], 0.2, (0.0, 200.0))
    assert np.linalg.norm(traj.states[-1]) < 0.01


def test_trivial_solution_repels_above_crossing():
    traj = integrate(planar_cubic(1), [0.01, 0.0], 0.1, (0.0, 20.0))
    assert np.linalg.norm(traj.states[-1]) > 0.05


def test_rotation_error_shrinks_with_tolerance():
    T = 2 * np.pi
    errors = []
    for rtol in (1e-6, 1e-9):
        traj = integrate(ROTATION, [1.0, 0.0], 0.0, (0.0, T), rtol=rtol, atol=rtol * 1e-3)
        errors.append(np.linalg.norm(traj.states[-1] - [1.0, 0.0]))
    assert errors[1] < errors[0]
    assert errors[1] < 1e-7


def test_dense_output_between_steps():
    traj = integrate(ROTATION, [1.0, 0.0], 0.0, (0.0, 3.0), rtol=1e-10, atol=1e-13)
    t = np.linspace(0.0, 3.0, 41)
    assert traj.at(t)[:, 0] == approx(np.cos(t), abs=1e-6)
    assert traj.at(t)[:, 1] == approx(-np.sin(t), abs=1e-6)


def test_integrate_rejects_bad_input():
    with pytest.raises(InvalidArgument):
        integrate(ROTATION, [1.0, 0.0, 0.0], 0.0, (0.0, 1.0))
    with pytest.raises(InvalidArgument):
        integrate(ROTATION, [1.0, 0.0], 0.0, (1.0, 0.0))
    with pytest.raises(InvalidArgument):
        integrate(ROTATION, [np.nan, 0.0], 0.0, (0.0, 1.0))


def test_integrating_factor_matches_plain_stepping():
    sys = galerkin_system(PredPreyParams(1.0, 3.0, 17.0, 4.0), modes=4)
    plain = replace(sys, stiff_diagonal=None)
    x0 = np.zeros(sys.dim)
    x0[1], x0[sys.dim // 2 + 2] = 1e-3, -5e-4
    a = integrate(sys, x0, 2.1, (0.0, 5.0), rtol=1e-10, atol=1e-13)
    b = integrate(plain, x0, 2.1, (0.0, 5.0), rtol=1e-10, atol=1e-13)
    assert a.states[-1] == approx(b.states[-1], abs=1e-9)


def test_transcritical_cycle(transcritical_cycle):
    _, _, cycle = transcritical_cycle
    assert np.max(np.abs(cycle.samples[:, 0])) == approx(2 * 0.2 / np.sqrt(3), rel=0.05)
    assert cycle.amplitude_r == approx(0.2 / np.sqrt(1.5), rel=0.05)
    assert cycle.closure <= 1e-8
    assert cycle.period_T == approx(2 * np.pi, rel=0.05)
    assert cycle.direction == "backward"


def test_subcritical_cycle(subcritical_cycle):
    _, _, cycle = subcritical_cycle
    assert np.max(np.abs(cycle.samples[:, 0])) == approx(2 * np.sqrt(0.1 / 3), rel=0.05)


@mark.parametrize("lam", [-0.2, 0.2])
def test_no_cycle_without_bifurcation(lam):
    sys = planar_cubic(2)
    with pytest.raises(NoCycleFound):
        find_limit_cycle(sys, lam, 0.2, "backward", spec=spec_of(sys))
    with pytest.raises(NoCycleFound):
        find_limit_cycle(sys, lam, 0.2, "forward", spec=spec_of(sys))


def test_find_limit_cycle_arguments():
    sys = planar_cubic(3)
    with pytest.raises(InvalidArgument):
        find_limit_cycle(sys, 0.2, 0.1, "backward")
    with pytest.raises(InvalidArgument):
        find_limit_cycle(sys, 0.2, 0.1, "sideways", spec=spec_of(sys))
    with pytest.raises(InvalidArgument):
        find_limit_cycle(sys, 0.2, -0.1, "backward", spec=spec_of(sys))


def test_floquet_of_transcritical_cycle(transcritical_cycle):
    sys, _, cycle = transcritical_cycle
    floquet = monodromy(sys, 0.2, cycle)
    assert abs(floquet.multipliers[floquet.trivial_index] - 1) <= 1e-6
    assert floquet.mu2 == approx(-0.08, rel=0.15)
    assert not floquet.stable


def test_floquet_sign_follows_branch_side(subcritical_cycle):
    sys, _, cycle = subcritical_cycle
    floquet = monodromy(sys, -0.1, cycle)
    assert abs(floquet.multipliers[floquet.trivial_index] - 1) <= 1e-6
    assert floquet.mu2 < 0


def test_monodromy_rejects_open_orbit(transcritical_cycle):
    sys, _, cycle = transcritical_cycle
    with pytest.raises(InvalidCycle):
        monodromy(sys, 0.2, replace(cycle, closure=1e-3))


def test_fourier_amplitude_of_exact_ansatz():
    spec = spec_of(planar_cubic(3))
    times = np.arange(256) * 2 * np.pi / 256
    samples = 2 * 0.05 * np.real(np.outer(np.exp(1j * times), spec.phi0))
    cycle = LimitCycle(2 * np.pi, times, samples, 0.0, 0.0, 0.0)
    assert fourier_amplitude(cycle, spec) == approx(0.05, abs=1e-6)


def test_fourier_amplitude_of_equilibrium():
    sys = planar_cubic(3)
    cycle = sample_cycle(sys, 0.2, np.zeros(2), 2 * np.pi)
    assert fourier_amplitude(cycle, spec_of(sys)) == approx(0.0, abs=1e-14)


def test_phase_shift(transcritical_cycle):
    _, spec, cycle = transcritical_cycle
    full = phase_shift(cycle, cycle.period_T)
    assert full.samples == approx(cycle.samples, abs=1e-12)
    assert full.period_T == cycle.period_T
    half = phase_shift(cycle, cycle.period_T / 2)
    assert np.max(np.linalg.norm(half.samples - cycle.samples, axis=1)) > 0.1
    assert half.samples[0] == approx(cycle.samples[128], abs=1e-12)
    odd = phase_shift(cycle, 0.37 * cycle.period_T)
    assert fourier_amplitude(odd, spec) == approx(fourier_amplitude(cycle, spec), rel=1e-5)


def test_half_period_shift_negates_first_harmonic(transcritical_cycle):
    _, _, cycle = transcritical_cycle
    first = np.fft.fft(cycle.samples, axis=0)[1]
    shifted = np.fft.fft(phase_shift(cycle, cycle.period_T / 2).samples, axis=0)[1]
    assert shifted == approx(-first, abs=1e-10 * len(cycle.samples))
