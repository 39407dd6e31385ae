import math

import numpy as np
import pytest

from cvnetbell import fock_oracle as fo
from cvnetbell.bell import two_point
from cvnetbell.errors import DomainError, ResourceError, StructuralError
from cvnetbell.gaussian import StsParams, epr_state, sts_state
from cvnetbell.quasiprob import q_epr, q_epr_marginal, q_sts, q_sts_marginals


def test_displacement_identity_and_vacuum_element():
    assert np.allclose(fo.displacement_matrix(0, 20).matrix, np.eye(21))
    d = fo.displacement_matrix(1.0, 20).matrix
    assert d[0, 0] == pytest.approx(math.exp(-0.5), abs=1e-14)


def test_displacement_matches_series_exponential():
    from scipy.linalg import expm

    n = 80
    a = np.diag(np.sqrt(np.arange(1, n + 1)), 1)
    alpha = 0.7 - 0.4j
    ref = expm(alpha * a.T - np.conj(alpha) * a)
    got = fo.displacement_matrix(alpha, n).matrix
    assert np.max(np.abs(got[:30, :30] - ref[:30, :30])) < 1e-12


def test_displacement_unitarity_on_retained_block():
    # the lower half at cutoff 60 still feels truncation at |alpha| = 2;
    # a 20-level block at cutoff 60, or the half block at 120, does not
    for alpha in (2.0, 2j, -1.2 + 1.5j):
        d = fo.displacement_matrix(alpha, 60).matrix
        assert np.max(np.abs((d.conj().T @ d)[:20, :20] - np.eye(20))) < 1e-10
        d = fo.displacement_matrix(alpha, 120).matrix
        assert np.max(np.abs((d.conj().T @ d)[:60, :60] - np.eye(60))) < 1e-10


def test_displacement_small_cutoff_rejected():
    with pytest.raises(DomainError):
        fo.displacement_matrix(0.3, 6)


def test_pi_and_o_at_origin():
    pi = fo.pi_operator(0, -1, 12).matrix
    expect = np.zeros((13, 13))
    expect[0, 0] = 1
    assert np.allclose(pi, expect)
    o = fo.o_operator(0, -1, 12).matrix
    assert np.allclose(o, np.diag([1.0] + [-1.0] * 12))


def test_o_spectrum_bounded():
    o = fo.o_operator(0.7, -0.5, 60).matrix
    assert np.max(np.abs(o - o.conj().T)) < 1e-12
    ev = np.linalg.eigvalsh(o)
    assert ev.min() >= -1 - 1e-9 and ev.max() <= 1 + 1e-9
    assert np.min(np.abs(ev - 1.0)) < 1e-9
    assert fo.o_spectrum(-0.5, 5)[0] == 1.0


def test_positive_s_rejected():
    with pytest.raises(DomainError):
        fo.pi_operator(0.1, 0.2, 10)


def test_epr_density_vacuum_and_trace():
    rho = fo.epr_density(0.0, 10)
    m = rho.matrix()
    assert m[0, 0] == pytest.approx(1.0)
    assert np.isclose(np.trace(m).real, 1.0)
    rho = fo.epr_density(1.0, 40, tol=1e-9)
    assert rho.trace() == pytest.approx(1 - math.tanh(1) ** 82, abs=1e-15)
    assert 1 - rho.trace() == pytest.approx(2.0e-10, rel=0.2)


def test_epr_density_insufficient_cutoff_suggests_n():
    with pytest.raises(ResourceError, match="N >="):
        fo.epr_density(1.0, 20)


def test_sts_density_psd_and_matches_epr():
    rho = fo.sts_density(1.3, 1.1, 0.3, 24, tol=1e-6)
    m = rho.matrix()
    assert np.max(np.abs(m - m.conj().T)) < 1e-12
    assert np.linalg.eigvalsh(m).min() > -1e-10
    assert 1 - rho.tail_bound - 1e-12 <= rho.trace() <= 1 + 1e-12
    for r in (0.4, 1.0):
        n = fo.required_cutoff(lambda c: fo.sts_tail(1.0, 1.0, r, c))
        a = fo.sts_density(1.0, 1.0, r, n).matrix() if n <= 62 else None
        b = fo.epr_density(r, n)
        if a is not None:
            assert np.max(np.abs(a - b.matrix())) < 1e-9
        alpha, beta = 0.3 + 0.2j, -0.5 + 0.1j
        assert fo.q_oracle(fo.sts_density(1.0, 1.0, r, n), alpha, beta, -1) == pytest.approx(
            fo.q_oracle(b, alpha, beta, -1), abs=1e-12
        )


def test_marginal_is_thermal():
    r = 0.8
    rho = fo.epr_density(r, 120)
    diag = np.diag(rho.reduced_first())
    n = np.arange(121)
    assert np.allclose(diag, np.tanh(r) ** (2 * n) / np.cosh(r) ** 2, atol=1e-14)


def test_two_point_vacuum_and_epr_origin():
    assert fo.two_point_trace(fo.epr_density(0.0, 10), 0, 0, -1) == pytest.approx(1.0, abs=1e-12)
    for r in (0.3, 1.0):
        assert fo.two_point_trace(fo.epr_density(r, 60), 0, 0, -1) == pytest.approx(1.0, abs=1e-9)


def test_q_oracle_reference_value():
    got = fo.q_oracle(fo.epr_density(1.0, 60), 1, 1, -1)
    assert got == pytest.approx(q_epr(1.0, 1, 1, -1), abs=1e-8)
    assert got == pytest.approx(0.02642, abs=1e-5)


def test_cutoff_mismatch_is_structural():
    rho = fo.epr_density(0.2, 20)
    with pytest.raises(StructuralError):
        fo.q_oracle(rho, 0.1, 0.1, -1, cutoff=30)


@pytest.mark.parametrize("s", [-0.2, -0.5, -1.0, -1.5, -2.0])
def test_closed_forms_against_oracle(s):
    rng = np.random.default_rng(int(-10 * s))
    for _ in range(3):
        r = rng.uniform(0, 1.2)
        v1, v2 = rng.uniform(1, 1.8, 2)
        a, b = complex(*rng.uniform(-1.4, 1.4, 2)), complex(*rng.uniform(-1.4, 1.4, 2))
        n = fo.required_cutoff(lambda c: fo.sts_tail(v1, v2, r, c))
        rho = fo.sts_density(v1, v2, r, n)
        p = StsParams(v1, v2, r)
        assert fo.q_oracle(rho, a, b, s) == pytest.approx(q_sts(p, a, b, s), abs=1e-10)
        assert fo.two_point_trace(rho, a, b, s) == pytest.approx(two_point(sts_state(p), a, b, s), abs=1e-9)
        assert fo.q_marginal_oracle(rho, a, s, "first") == pytest.approx(q_sts_marginals(p, a, s, "first"), abs=1e-10)
        assert fo.q_marginal_oracle(rho, b, s, "second") == pytest.approx(q_sts_marginals(p, b, s, "second"), abs=1e-10)
        ne = fo.required_cutoff(lambda c: fo.epr_tail(r, c))
        rho = fo.epr_density(r, ne)
        assert fo.q_oracle(rho, a, b, s) == pytest.approx(q_epr(r, a, b, s), abs=1e-10)
        assert fo.q_marginal_oracle(rho, a, s) == pytest.approx(q_epr_marginal(r, a, s), abs=1e-10)
        assert fo.two_point_trace(rho, a, b, s) == pytest.approx(two_point(epr_state(r), a, b, s), abs=1e-9)


def test_network_oracle_chain3_matches_expanded_engine():
    from cvnetbell.bell import BellAssignment, bell_value
    from cvnetbell.network import canonical_independent_set, chain, cycle

    rng = np.random.default_rng(3)
    for topo in (chain(3), cycle(3)):
        K = canonical_independent_set(topo)
        rs = rng.uniform(0.2, 0.8, topo.source_count)
        states = [epr_state(r) for r in rs]
        dens = [fo.epr_density(r, fo.required_cutoff(lambda c: fo.epr_tail(r, c))) for r in rs]
        z = rng.uniform(-1, 1, (topo.source_count, 4)) + 1j * rng.uniform(-1, 1, (topo.source_count, 4))
        asg = BellAssignment.from_arrays(z[:, :2], z[:, 2:])
        i_val, j_val = fo.network_bell_oracle(topo, K, dens, asg, -1.0)
        ev = bell_value(topo, K, states, asg, -1.0, form="expanded")
        assert ev.i_value == pytest.approx(i_val, abs=1e-9)
        assert ev.j_value == pytest.approx(j_val, abs=1e-9)
