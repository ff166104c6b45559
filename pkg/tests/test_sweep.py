import pickle
import queue

import numpy as np
import pytest
from pytest import approx, mark

from hopf_lab.classifier import analyze_point
from hopf_lab.config import Tolerances
from hopf_lab.errors import NoCycleFound, ShootingFailure, StiffnessFailure
from hopf_lab.sweep import SweepPool, _status, amplitude_sweep, cycle_direction, guess_amplitude, linear_grid
from hopf_lab.systems import planar_cubic


def sweep(case, grid, workers=1):
    sys = planar_cubic(case)
    analysis = analyze_point(sys, 0.0, 1.0)
    return amplitude_sweep(sys, grid, analysis.spec, analysis.prediction, analysis.classification,
                           workers=workers)


@pytest.fixture(scope="module")
def transcritical_rows():
    return sweep(3, [-0.3, -0.2, -0.1, 0.1, 0.2, 0.3])


def test_status_names():
    assert _status(NoCycleFound("x")) == "no-cycle"
    assert _status(ShootingFailure("x")) == "shooting-failure"
    assert _status(StiffnessFailure("x")) == "stiffness-failure"


def test_linear_grid():
    assert linear_grid(-0.3, 0.3, 7) == approx([-0.3, -0.2, -0.1, 0.0, 0.1, 0.2, 0.3])


def test_direction_and_guess_without_prediction():
    spec = analyze_point(planar_cubic(2), 0.0, 1.0).spec
    assert cycle_direction(None) == "backward"
    assert guess_amplitude(None, 0.2, spec) == approx(0.2)
    assert guess_amplitude(None, 0.0, spec) == approx(1e-3)


@mark.slow
def test_transcritical_cycles_on_both_sides(transcritical_rows):
    assert [row.status for row in transcritical_rows] == ["ok"] * 6
    eta = np.sqrt(1.5)
    for row in transcritical_rows:
        assert row.r == approx(abs(row.lam) / eta, rel=0.1)
        assert row.trivial_multiplier_error <= 1e-6


@mark.slow
def test_transcritical_linear_law(transcritical_rows):
    eta = np.sqrt(1.5)
    for side in (-1, 1):
        rows = [row for row in transcritical_rows if np.sign(row.lam) == side]
        slope = np.polyfit([row.lam for row in rows], [row.r for row in rows], 1)[0]
        assert abs(slope) == approx(1 / eta, rel=0.1)


@mark.slow
def test_quadratic_floquet_law(transcritical_rows):
    rows = [row for row in transcritical_rows if row.r <= 0.2 and row.mu2 is not None]
    slope = np.polyfit([row.r ** 2 for row in rows], [row.mu2 for row in rows], 1)[0]
    assert slope == approx(-3.0, rel=0.15)


@mark.slow
def test_exchange_of_stability(transcritical_rows):
    assert all(row.exchange_of_stability for row in transcritical_rows)
    assert all(row.trivial_stable for row in transcritical_rows)


@mark.slow
def test_subcritical_square_root_law():
    rows = sweep(1, [-0.15, -0.1, -0.05, 0.05, 0.1])
    assert [row.status for row in rows] == ["ok", "ok", "ok", "no-cycle", "no-cycle"]
    found = rows[:3]
    ratios = [row.r ** 2 / -row.lam for row in found]
    assert ratios == [approx(2 / 3, rel=0.1)] * 3
    assert all(row.mu2 < 0 for row in found)
    assert all(row.exchange_of_stability for row in found)


def test_no_cycles_without_bifurcation():
    rows = sweep(2, linear_grid(-0.3, 0.3, 7))
    assert {row.status for row in rows} == {"no-cycle"}
    assert all(row.r is None and row.mu2 is None for row in rows)


@mark.slow
def test_worker_pool_keeps_grid_order():
    grid = [0.3, -0.1, 0.2]
    assert sweep(3, grid, workers=2) == sweep(3, grid, workers=1)


def test_worker_answers_every_request():
    to_q, from_q = queue.Queue(), queue.Queue()
    to_q.put({"cmd": "row", "index": 4, "lam": 0.1})
    to_q.put("TERMINATE")
    # no system at all: sweep_row fails with a plain AttributeError
    SweepPool._worker(pickle.dumps((None, None, None, None, Tolerances())), to_q, from_q)
    index, row = from_q.get_nowait()
    assert index == 4
    assert row.lam == 0.1
    assert row.status == "worker-error"
    assert row.r is None
