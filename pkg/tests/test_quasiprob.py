import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvnetbell.errors import DomainError, StructuralError, UnsupportedError
from cvnetbell.gaussian import GaussianState, StsParams, epr_state, sts_state
from cvnetbell.quasiprob import (
    c_combinator,
    d_combinator,
    epr_coefficients,
    gauss_legendre_box,
    q_epr,
    q_epr_marginal,
    q_generic,
    q_generic_marginal,
    q_sts,
    q_sts_marginals,
    sts_coefficients,
)

points = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
orders = st.sampled_from([-0.2, -0.5, -1.0, -1.5, -2.0, -3.0])


def test_q_epr_values():
    assert q_epr(0, 0, 0, -1) == pytest.approx(1 / math.pi**2)
    R, S = epr_coefficients(1.0, -1.0)
    assert R == pytest.approx(9.52440, abs=1e-5)
    assert S == pytest.approx(4.76220, abs=1e-5)
    assert q_epr(1, 1, 1, -1) == pytest.approx(0.02642, abs=1e-5)
    assert q_epr(1, 0, 0, -1) == pytest.approx(0.042552, abs=1e-6)


def test_q_epr_marginal_values():
    assert q_epr_marginal(0, 0, -1) == pytest.approx(1 / math.pi)
    assert q_epr_marginal(1, 0, -1) == pytest.approx(2 / (math.pi * (math.cosh(2) + 1)), rel=1e-14)
    assert q_epr_marginal(1, 0, -1) == pytest.approx(0.133685, abs=5e-6)


def test_positive_s_rejected():
    for fn in (lambda: q_epr(0.5, 0, 0, 0.1), lambda: q_epr_marginal(0.5, 0, 1.0),
               lambda: q_sts(StsParams(1.2, 1.2, 0.5), 0, 0, 0.3)):
        with pytest.raises(DomainError):
            fn()


def test_q_sts_values():
    assert q_sts(StsParams(1.2, 1.2, 0), 0, 0, -1) == pytest.approx(0.083736, abs=1e-6)
    A = sts_coefficients(StsParams(1.2, 1.2, 1.0), -1)[0]
    assert A == pytest.approx(4.8 * math.cosh(1) ** 2 + 0.04, abs=1e-12)
    assert q_sts(StsParams(1.2, 1.2, 1.0), 0, 0, -1) == pytest.approx(4 / (math.pi**2 * A))


def test_q_sts_marginal_values():
    assert q_sts_marginals(StsParams(1.2, 1.2, 0), 0, -1) == pytest.approx(0.289372, abs=1e-6)
    p = StsParams(1, 1, 0.6)
    for a in (0, 0.3 - 0.2j, 1.1j):
        assert q_sts_marginals(p, a, -0.7, "first") == pytest.approx(q_epr_marginal(0.6, a, -0.7), rel=1e-12)
    with pytest.raises(StructuralError):
        q_sts_marginals(p, 0, -1, "middle")


def test_asymmetric_marginal_assignment():
    # the first arm keeps the first mode, whose variance is v1 cosh^2 r + v2 sinh^2 r
    p = StsParams(1.1, 1.9, 0.4)
    state = sts_state(p)
    for a in (0.2, 0.5 - 0.7j):
        assert q_sts_marginals(p, a, -0.5, "first") == pytest.approx(q_generic_marginal(state, [0], [a], -0.5), rel=1e-12)
        assert q_sts_marginals(p, a, -0.5, "second") == pytest.approx(q_generic_marginal(state, [1], [a], -0.5), rel=1e-12)


def test_sts_reduces_to_epr():
    rng = np.random.default_rng(1)
    for _ in range(20):
        r = rng.uniform(0, 2)
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        s = rng.choice([-0.3, -1, -2.5])
        assert q_sts(StsParams(1, 1, r), a, b, s) == pytest.approx(q_epr(r, a, b, s), rel=1e-12)


@pytest.mark.parametrize("r", [0.3, 1.0, 2.0])
@pytest.mark.parametrize("s", [-0.5, -1.0, -2.0])
def test_generic_matches_closed_forms(r, s):
    rng = np.random.default_rng(7)
    p = StsParams(1.3, 1.05, r)
    for _ in range(50):
        a, b = complex(*rng.uniform(-2, 2, 2)), complex(*rng.uniform(-2, 2, 2))
        assert q_generic(epr_state(r), [a, b], s) == pytest.approx(q_epr(r, a, b, s), rel=1e-12, abs=1e-300)
        assert q_generic(sts_state(p), [a, b], s) == pytest.approx(q_sts(p, a, b, s), rel=1e-12, abs=1e-300)


def test_generic_single_mode_vacuum():
    assert q_generic(GaussianState(np.eye(2)), [0], -1) == pytest.approx(1 / math.pi)


def test_generic_marginal():
    state = epr_state(0.9)
    for a in (0, 0.4 + 0.1j):
        assert q_generic_marginal(state, [0], [a], -1) == pytest.approx(q_epr_marginal(0.9, a, -1), rel=1e-12)
    assert q_generic_marginal(state, [0, 1], [0.2, 0.3j], -1) == pytest.approx(q_generic(state, [0.2, 0.3j], -1))
    with pytest.raises(StructuralError):
        q_generic_marginal(state, [], [], -1)
    with pytest.raises(StructuralError):
        q_generic_marginal(state, [2], [0], -1)


def test_generic_rejects_mean():
    state = GaussianState(np.eye(2), mean=np.array([0.1, 0.0]))
    with pytest.raises(UnsupportedError):
        q_generic(state, [0], -1)


def test_combinators():
    assert c_combinator("+", 0.3, 0.3) == pytest.approx(0.6)
    assert c_combinator("-", 0.3, 0.3) == 0
    m = q_epr_marginal(1, 0, -1)
    assert d_combinator("-", m, m, m, m) == 0
    assert d_combinator("+", 1, 2, 3, 4) == 10


def _box(params, s):
    v1, v2, r = params
    var = max(v1, v2) * math.cosh(r) ** 2 + max(v1, v2) * math.sinh(r) ** 2 + abs(s)
    return 6 * math.sqrt(var) / 2


@pytest.mark.parametrize("params", [(1, 1, 0.5), (1.2, 1.6, 0.3)])
@pytest.mark.parametrize("s", [-0.5, -1.0, -2.0])
def test_normalization(params, s):
    p = StsParams(*params)
    half = _box(params, s)

    def f(x):
        return q_sts(p, x[:, 0] + 1j * x[:, 1], x[:, 2] + 1j * x[:, 3], s)

    assert gauss_legendre_box(f, [half] * 4, nodes=48) == pytest.approx(1.0, abs=1e-6)


def test_marginal_by_quadrature():
    alpha = 0.3 + 0.2j
    half = _box((1, 1, 0.5), -1)
    got = gauss_legendre_box(lambda x: q_epr(0.5, alpha, x[:, 0] + 1j * x[:, 1], -1), [half] * 2, nodes=96)
    assert got == pytest.approx(q_epr_marginal(0.5, alpha, -1), abs=1e-6)
    p = StsParams(1.1, 1.7, 0.6)
    half = _box((1.1, 1.7, 0.6), -0.5)
    got = gauss_legendre_box(lambda x: q_sts(p, alpha, x[:, 0] + 1j * x[:, 1], -0.5), [half] * 2, nodes=96)
    assert got == pytest.approx(q_sts_marginals(p, alpha, -0.5, "first"), abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(st.floats(0, 2), st.floats(1, 3), st.floats(1, 3), points, points, orders)
def test_positive_and_generic(r, v1, v2, a, b, s):
    p = StsParams(v1, v2, r)
    val = q_sts(p, a, b, s)
    assert val >= 0
    assert q_generic(sts_state(p), [a, b], s) == pytest.approx(val, rel=1e-9, abs=1e-300)
