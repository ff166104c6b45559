import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as nph
from pytest import approx

from hopf_lab.errors import InvalidArgument
from hopf_lab.model import (DerivativeRequest, ParameterizedSystem, bilinear, derivative, evaluate,
                            jacobian, mixed_xlambda, mixed_xlambda2, state_jacobian, trilinear,
                            validate_system)
from hopf_lab.systems import forced_tangency, planar_cubic

PHI = np.array([1, 1j]) / np.sqrt(2)

directions = nph.arrays(np.float64, 3, elements=st.floats(-2, 2, allow_nan=False))


@pytest.fixture(scope="module")
def case1():
    return planar_cubic(1)


@pytest.fixture(scope="module")
def random_field():
    sys, _ = forced_tangency(seed=7, dim=3)
    return sys


def test_evaluate_planar_cubic(case1):
    assert evaluate(case1, [0.1, 0.2], 0.3) == approx([0.231, -0.032], abs=1e-15)


def test_evaluate_origin_is_equilibrium(case1):
    assert evaluate(case1, [0.0, 0.0], 0.7) == approx([0.0, 0.0])


def test_evaluate_dimension_mismatch(case1):
    with pytest.raises(InvalidArgument):
        evaluate(case1, [0.1, 0.2, 0.3], 0.0)


def test_jacobian_planar_cubic(case1):
    assert jacobian(case1, 0.0) == approx(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    assert jacobian(case1, 0.4) == approx(np.array([[0.4, 1.0], [-1.0, 0.4]]))


def test_jacobian_by_finite_differences(case1):
    fd = case1.without_analytic()
    assert jacobian(fd, 0.25) == approx(jacobian(case1, 0.25), abs=1e-8)


def test_planar_cubic_has_no_quadratic_part(case1):
    assert bilinear(case1, 0.0, PHI, np.conj(PHI)) == approx(np.zeros(2))
    assert bilinear(case1.without_analytic(), 0.0, PHI, PHI) == approx(np.zeros(2), abs=1e-8)


def test_trilinear_on_critical_vector(case1):
    expected = 6 / (2 * np.sqrt(2)) * np.array([1, 1j])
    assert trilinear(case1, 0.0, PHI, PHI, np.conj(PHI)) == approx(expected)
    assert trilinear(case1.without_analytic(), 0.0, PHI, PHI, np.conj(PHI)) == approx(expected, abs=1e-6)


def test_mixed_forms():
    case3 = planar_cubic(3)
    assert mixed_xlambda(planar_cubic(1), 0.0, PHI) == approx(PHI)
    assert mixed_xlambda(case3, 0.0, PHI) == approx(np.zeros(2))
    assert mixed_xlambda2(case3, 0.0, PHI) == approx(-2 * PHI)
    assert mixed_xlambda2(case3.without_analytic(), 0.0, PHI) == approx(-2 * PHI, abs=1e-5)


def test_state_jacobian_away_from_origin(case1):
    x = np.array([0.3, -0.2])
    exact = state_jacobian(case1, x, 0.1)
    assert exact == approx(np.array([[0.1 + 0.27, 1.0], [-1.0, 0.1 + 0.12]]))
    assert state_jacobian(case1.without_analytic(), x, 0.1) == approx(exact, abs=1e-7)


def test_derivative_request_arity():
    with pytest.raises(InvalidArgument):
        DerivativeRequest("bilinear", [PHI], 0.0)
    with pytest.raises(InvalidArgument):
        DerivativeRequest("quartic", [PHI], 0.0)


def test_derivative_dispatch(case1):
    request = DerivativeRequest("trilinear", [PHI, PHI, np.conj(PHI)], 0.0)
    assert derivative(case1, request) == approx(trilinear(case1, 0.0, PHI, PHI, np.conj(PHI)))


def test_rejects_shifted_equilibrium():
    sys = ParameterizedSystem(dim=2, rhs=lambda x, lam: np.array([x[1] + 1e-3, -x[0]]), label="shifted")
    with pytest.raises(InvalidArgument):
        validate_system(sys)


def test_rejects_scalar_system():
    with pytest.raises(InvalidArgument):
        ParameterizedSystem(dim=1, rhs=lambda x, lam: -x, label="scalar")


@settings(max_examples=20, deadline=None)
@given(directions, directions)
def test_bilinear_symmetric(random_field, a, b):
    assert bilinear(random_field, 0.1, a, b) == approx(bilinear(random_field, 0.1, b, a), abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(directions, directions, directions)
def test_trilinear_symmetric(random_field, a, b, c):
    base = trilinear(random_field, 0.1, a, b, c)
    assert trilinear(random_field, 0.1, c, a, b) == approx(base, abs=1e-12)
    assert trilinear(random_field, 0.1, b, a, c) == approx(base, abs=1e-12)


@settings(max_examples=10, deadline=None)
@given(directions, directions, directions)
def test_finite_differences_match_analytic(random_field, a, b, c):
    fd = random_field.without_analytic()
    lam = 0.2
    scale = max(1.0, np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c))
    assert bilinear(fd, lam, a, b) == approx(bilinear(random_field, lam, a, b), rel=1e-5, abs=1e-5 * scale)
    assert trilinear(fd, lam, a, b, c) == approx(trilinear(random_field, lam, a, b, c),
                                                 rel=1e-5, abs=1e-5 * scale)
    assert mixed_xlambda(fd, lam, a) == approx(mixed_xlambda(random_field, lam, a),
                                               rel=1e-5, abs=1e-5 * scale)
    assert mixed_xlambda2(fd, lam, a) == approx(mixed_xlambda2(random_field, lam, a),
                                                rel=1e-4, abs=1e-4 * scale)


def test_complex_directions_split_into_real_parts(random_field):
    a = np.array([1 + 2j, -0.5j, 0.3])
    b = np.array([0.2, 1 - 1j, 2j])
    expected = (bilinear(random_field, 0.0, a.real, b.real) - bilinear(random_field, 0.0, a.imag, b.imag)
                + 1j * (bilinear(random_field, 0.0, a.real, b.imag) + bilinear(random_field, 0.0, a.imag, b.real)))
    assert bilinear(random_field, 0.0, a, b) == approx(expected)
