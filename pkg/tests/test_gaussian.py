import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvnetbell.errors import DomainError, NumericError, StructuralError
from cvnetbell.gaussian import (
    GaussianState,
    StsParams,
    characteristic_fn,
    epr_state,
    gaussian_density,
    phase_space_vector,
    sts_is_separable,
    sts_state,
    symplectic_form,
    validate,
    wigner,
)
from cvnetbell.quasiprob import gauss_legendre_box


def test_symplectic_form():
    assert np.array_equal(symplectic_form(1), [[0, 1], [-1, 0]])
    om = symplectic_form(2)
    assert om.shape == (4, 4) and np.array_equal(om, -om.T)
    om3 = symplectic_form(3)
    assert np.allclose(om3.T @ om3, np.eye(6))
    assert np.allclose(om3 @ om3, -np.eye(6))


def test_validate_examples():
    rep = validate(GaussianState(np.eye(2)))
    assert rep.valid and abs(rep.min_eigenvalue) < 1e-12
    rep = validate(GaussianState(0.5 * np.eye(2)))
    assert not rep.valid and rep.min_eigenvalue == pytest.approx(-0.5)
    assert validate(epr_state(1.0)).valid
    assert validate(epr_state(5.0)).valid


def test_validate_dimension_mismatch():
    with pytest.raises(StructuralError):
        GaussianState(np.eye(3))
    with pytest.raises(StructuralError):
        GaussianState(np.eye(4), mean=np.zeros(3))


def test_epr_state_entries():
    assert np.allclose(epr_state(0).cov, np.eye(4))
    cov = epr_state(1.0).cov
    assert cov[0, 0] == pytest.approx(3.76220, abs=1e-5)
    assert cov[0, 2] == pytest.approx(3.62686, abs=1e-5)
    assert cov[1, 3] == pytest.approx(-3.62686, abs=1e-5)
    with pytest.raises(DomainError):
        epr_state(-0.1)


def test_sts_state_entries():
    assert np.allclose(sts_state(StsParams(1, 1, 0.7)).cov, epr_state(0.7).cov, atol=1e-12)
    assert np.allclose(sts_state(StsParams(1.2, 1.2, 0)).cov, 1.2 * np.eye(4))
    cov = sts_state(StsParams(1.2, 1.2, 1.0)).cov
    assert cov[0, 0] == pytest.approx(4.51464, abs=1e-5)
    assert cov[2, 2] == pytest.approx(4.51464, abs=1e-5)
    assert cov[0, 2] == pytest.approx(4.35223, abs=1e-5)
    with pytest.raises(DomainError):
        StsParams(0.9, 1.2, 0.3)
    with pytest.raises(DomainError):
        StsParams(1.2, 1.2, -1)


def test_separability():
    assert sts_is_separable(StsParams(1.2, 1.2, 0.05))
    assert not sts_is_separable(StsParams(1.2, 1.2, 0.10))
    assert sts_is_separable(StsParams(1, 1, 0))
    r_s = math.acosh(math.sqrt(121 / 120))
    assert sts_is_separable(StsParams(1.2, 1.2, r_s - 1e-9))
    assert not sts_is_separable(StsParams(1.2, 1.2, r_s + 1e-9))


def test_wigner_values():
    vac = GaussianState(np.eye(4))
    assert wigner(vac, 0, 0) == pytest.approx(4 / math.pi**2)
    assert wigner(epr_state(1.0), 0, 0) == pytest.approx(4 / math.pi**2)


def test_wigner_normalized():
    state = epr_state(0.5)
    half = 6 * math.sqrt(math.cosh(1.0) + math.sinh(1.0)) / 2

    def f(pts):
        return wigner(state, pts[:, 0] + 1j * pts[:, 1], pts[:, 2] + 1j * pts[:, 3])

    assert gauss_legendre_box(f, [half] * 4, nodes=48) == pytest.approx(1.0, abs=1e-6)


def test_singular_covariance_raises():
    with pytest.raises(NumericError):
        gaussian_density(np.diag([1.0, 1.0, 1.0, 1e-14]), np.zeros(4))


def test_characteristic_values():
    vac = GaussianState(np.eye(2))
    assert characteristic_fn(vac, [0, 0]) == pytest.approx(1)
    assert characteristic_fn(vac, [2, 0]) == pytest.approx(math.exp(-1))
    c, s2 = math.cosh(2), math.sinh(2)
    assert characteristic_fn(epr_state(1), [1, 0, 1, 0]) == pytest.approx(math.exp(-0.25 * (2 * c + 2 * s2)))


def test_phase_space_vector_layout():
    assert np.array_equal(phase_space_vector(1 + 2j, -0.5j), [2, 4, 0, -1])


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 10))
def test_epr_valid(r):
    assert validate(epr_state(r)).valid


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2.5))
def test_epr_pure(r):
    # det suffers cancellation of order cosh(2r)^4 * eps, so stay where 1e-9 is meaningful
    assert np.linalg.det(epr_state(r).cov) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(1, 5), st.floats(1, 5), st.floats(0, 10))
def test_sts_valid(v1, v2, r):
    assert validate(sts_state(StsParams(v1, v2, r))).valid


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 3), st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_characteristic_bounded(r, u):
    assert abs(characteristic_fn(epr_state(r), u)) <= 1 + 1e-15


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2), st.complex_numbers(max_magnitude=3), st.complex_numbers(max_magnitude=3))
def test_wigner_positive(r, a, b):
    assert wigner(sts_state(StsParams(1.3, 1.1, r)), a, b) >= 0
