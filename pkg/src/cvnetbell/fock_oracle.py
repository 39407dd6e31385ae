"""Brute-force reference values in a truncated Fock basis.

Nothing here uses the phase-space closed forms: states are built from their
number-basis definitions, measurement operators from displaced number
states, and expectations are plain matrix contractions.  The results are
used to cross-check ``quasiprob`` and ``bell``.

Two-mode states are stored as a weighted mixture of pure two-mode states,
each confined to a fixed photon-number difference.  The full density matrix
is only materialized on request, which keeps large cutoffs cheap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import eval_genlaguerre, gammaln

from .errors import DomainError, ResourceError, StructuralError
from .quasiprob import check_s

OPERATOR_MARGIN = 40
SQUEEZE_MARGIN = 10
DEFAULT_TAIL = 1e-12
THERMAL_WEIGHT_FLOOR = 1e-16


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    cutoff: int
    matrix: np.ndarray


@dataclass(frozen=True, eq=False)
class TruncatedDensity:
    """Mixture sum_t w_t |psi_t><psi_t| of two-mode pure states at a common cutoff.

    Every component lives in one sector of fixed photon-number difference
    ``diffs[t] = n1 - n2``; ``coeffs[t, n]`` is the amplitude of
    |n + max(d, 0), n + max(-d, 0)>.  Both the EPR state and the squeezed
    thermal state decompose this way, and expectations of product operators
    then cost O(N^2) per component instead of O(N^3).
    """

    cutoff: int
    weights: np.ndarray
    diffs: np.ndarray
    coeffs: np.ndarray  # shape (terms, N+1); entries past N - |d| are zero
    tail_bound: float = 0.0

    def component(self, t: int) -> np.ndarray:
        """Dense (N+1) x (N+1) amplitude matrix psi[n1, n2] of component ``t``."""
        n = self.cutoff + 1
        d = int(self.diffs[t])
        length = n - abs(d)
        psi = np.zeros((n, n), dtype=complex)
        idx = np.arange(length)
        psi[idx + max(d, 0), idx + max(-d, 0)] = self.coeffs[t, :length]
        return psi

    def matrix(self) -> np.ndarray:
        """Dense density matrix on the (N+1)^2-dimensional space (small cutoffs only)."""
        dim = (self.cutoff + 1) ** 2
        if dim > 4096:
            raise ResourceError(f"refusing to materialize a {dim}x{dim} density matrix")
        vecs = np.array([self.component(t).ravel() for t in range(len(self.weights))])
        return np.einsum("t,ti,tj->ij", self.weights, vecs, vecs.conj())

    def trace(self) -> float:
        return float(np.sum(self.weights * np.sum(np.abs(self.coeffs) ** 2, axis=1)))

    def reduced_first(self) -> np.ndarray:
        """Reduced density matrix of the first mode (diagonal for these states)."""
        n = self.cutoff + 1
        out = np.zeros(n)
        for w, d, c in zip(self.weights, self.diffs, self.coeffs):
            length = n - abs(int(d))
            out[max(int(d), 0) : max(int(d), 0) + length] += w * np.abs(c[:length]) ** 2
        return np.diag(out)


def displacement_matrix(alpha: complex, cutoff: int) -> TruncatedOperator:
    """Matrix elements <m|D(alpha)|n>, D(alpha) = exp(alpha a^dag - conj(alpha) a).

    Uses the associated Laguerre closed form, so every retained element is
    exact; only the retained block is returned.
    """
    if cutoff < 8:
        raise DomainError(f"cutoff must be >= 8, got {cutoff}")
    alpha = complex(alpha)
    x = abs(alpha) ** 2
    idx = np.arange(cutoff + 1)
    m, n = np.meshgrid(idx, idx, indexing="ij")
    lo, hi = np.minimum(m, n), np.maximum(m, n)
    k = hi - lo
    if alpha == 0:
        return TruncatedOperator(cutoff, np.eye(cutoff + 1, dtype=complex))
    log_mag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + k * math.log(abs(alpha)) - x / 2
    lag = eval_genlaguerre(lo, k, x)
    phase_up = (alpha / abs(alpha)) ** k  # m >= n: alpha^(m-n)
    phase_down = (-np.conj(alpha) / abs(alpha)) ** k  # m < n: (-alpha*)^(n-m)
    phase = np.where(m >= n, phase_up, phase_down)
    return TruncatedOperator(cutoff, np.exp(log_mag) * lag * phase)


def _pi_ratio(s: float) -> float:
    return (s + 1) / (s - 1)


def pi_operator(alpha: complex, s: float, cutoff: int) -> TruncatedOperator:
    """sum_n ((s+1)/(s-1))^n D(alpha)|n><n|D(alpha)^dag, restricted to levels 0..N.

    The inner sum runs to N + OPERATOR_MARGIN so the retained block is not
    affected by truncating the displacement.
    """
    s = check_s(s)
    big = cutoff + OPERATOR_MARGIN
    d = displacement_matrix(alpha, big).matrix
    ratio = _pi_ratio(s)
    weights = np.array([ratio**j if j else 1.0 for j in range(big + 1)])
    full = (d * weights) @ d.conj().T
    return TruncatedOperator(cutoff, full[: cutoff + 1, : cutoff + 1])


def o_operator(alpha: complex, s: float, cutoff: int) -> TruncatedOperator:
    """Bounded observable built from Pi: (1-s)Pi + s for -1 < s <= 0, 2Pi - 1 for s <= -1."""
    s = check_s(s)
    pi = pi_operator(alpha, s, cutoff).matrix
    eye = np.eye(cutoff + 1)
    mat = (1 - s) * pi + s * eye if s > -1 else 2 * pi - eye
    return TruncatedOperator(cutoff, mat)


def o_spectrum(s: float, count: int) -> np.ndarray:
    """Eigenvalues xi_m of O(alpha; s) for m = 0..count-1 (independent of alpha)."""
    s = check_s(s)
    r = np.array([_pi_ratio(s) ** m if m else 1.0 for m in range(count)])
    return (1 - s) * r + s if s > -1 else 2 * r - 1


def epr_tail(r: float, cutoff: int) -> float:
    return math.tanh(r) ** (2 * (cutoff + 1))


def required_cutoff(tail_fn, tol: float = DEFAULT_TAIL, start: int = 8, limit: int = 2000) -> int:
    n = start
    while tail_fn(n) >= tol:
        n += 1
        if n > limit:
            raise ResourceError(f"no cutoff below {limit} meets tail bound {tol}")
    return n


def epr_density(r: float, cutoff: int, tol: float = DEFAULT_TAIL) -> TruncatedDensity:
    """sech r * sum_n tanh^n r |n, n>, truncated at n = cutoff."""
    if not np.isfinite(r) or r < 0:
        raise DomainError(f"squeeze parameter must be >= 0, got {r!r}")
    tail = epr_tail(r, cutoff)
    if tail >= tol:
        need = required_cutoff(lambda n: epr_tail(r, n), tol)
        raise ResourceError(f"cutoff {cutoff} too small for r={r} (tail {tail:.2e}); use N >= {need}")
    amp = np.array([math.tanh(r) ** n if n else 1.0 for n in range(cutoff + 1)]) / math.cosh(r)
    return TruncatedDensity(cutoff, np.ones(1), np.zeros(1, dtype=int), amp[None].astype(complex), tail)


def _thermal_ratio(v: float) -> float:
    return (v - 1) / (v + 1)


def sts_tail(v1: float, v2: float, r: float, cutoff: int) -> float:
    """Union bound on the probability that either mode exceeds ``cutoff`` photons.

    Each reduced state is thermal with variance a (or b), i.e. mean photon
    number (a - 1)/2, whose photon-number tail beyond N is x^(N+1).
    """
    ch2, sh2 = math.cosh(r) ** 2, math.sinh(r) ** 2
    tail = 0.0
    for var in (v1 * ch2 + v2 * sh2, v1 * sh2 + v2 * ch2):
        tail += _thermal_ratio(var) ** (cutoff + 1)
    return tail


def _squeeze_block(diff: int, size: int, r: float) -> np.ndarray:
    """exp(r (a1^dag a2^dag - a1 a2)) on the sector n1 - n2 = diff, basis |n + diff, n>."""
    n = np.arange(size - 1)
    off = np.sqrt((n + diff + 1.0) * (n + 1.0))
    gen = np.diag(off, -1) - np.diag(off, 1)
    return expm(r * gen)


def sts_density(v1: float, v2: float, r: float, cutoff: int, tol: float = DEFAULT_TAIL) -> TruncatedDensity:
    """Two-mode squeezer applied to a product of thermal states.

    The squeezer conserves n1 - n2, so it is exponentiated sector by sector
    (each sector generator is real skew-symmetric and tridiagonal) at
    cutoff + SQUEEZE_MARGIN and then truncated.
    """
    if v1 < 1 or v2 < 1 or r < 0:
        raise DomainError(f"invalid squeezed thermal parameters ({v1}, {v2}, {r})")
    tail = sts_tail(v1, v2, r, cutoff)
    if tail >= tol:
        need = required_cutoff(lambda n: sts_tail(v1, v2, r, n), tol)
        raise ResourceError(f"cutoff {cutoff} too small (tail {tail:.2e}); use N >= {need}")
    x1, x2 = _thermal_ratio(v1), _thermal_ratio(v2)
    big = cutoff + SQUEEZE_MARGIN
    weights, diffs, comps = [], [], []
    blocks = {}
    for j in range(big + 1):
        pj = (1 - x1) * x1**j if j else 1 - x1
        if pj < THERMAL_WEIGHT_FLOOR:
            break
        for k in range(big + 1):
            pk = (1 - x2) * x2**k if k else 1 - x2
            if pj * pk < THERMAL_WEIGHT_FLOOR:
                break
            diff = j - k
            if diff not in blocks:
                blocks[diff] = _squeeze_block(abs(diff), big + 1 - abs(diff), r)
            if abs(diff) > cutoff:
                continue
            col = blocks[diff][:, min(j, k)]
            coeffs = np.zeros(cutoff + 1, dtype=complex)
            length = cutoff + 1 - abs(diff)
            coeffs[:length] = col[:length]
            weights.append(pj * pk)
            diffs.append(diff)
            comps.append(coeffs)
    return TruncatedDensity(cutoff, np.array(weights), np.array(diffs), np.array(comps), tail)


def _check_cutoff(rho: TruncatedDensity, cutoff: int | None):
    if cutoff is not None and cutoff != rho.cutoff:
        raise StructuralError(f"operator cutoff {cutoff} does not match density cutoff {rho.cutoff}")


def expect_product(rho: TruncatedDensity, a: np.ndarray, b: np.ndarray) -> complex:
    """Tr[(A x B) rho] without forming A x B.

    For a component with amplitudes c_n on |n + d1, n + d2> the trace is
    c^H (A[d1 + m, d1 + n] * B[d2 + m, d2 + n]) c.
    """
    size = rho.cutoff + 1
    total = 0j
    for w, d, c in zip(rho.weights, rho.diffs, rho.coeffs):
        d1, d2 = max(int(d), 0), max(-int(d), 0)
        length = size - abs(int(d))
        kernel = a[d1 : d1 + length, d1 : d1 + length] * b[d2 : d2 + length, d2 : d2 + length]
        v = c[:length]
        total += w * np.vdot(v, kernel @ v)
    return total


def two_point_trace(rho: TruncatedDensity, alpha, beta, s: float, cutoff: int | None = None) -> float:
    _check_cutoff(rho, cutoff)
    n = rho.cutoff
    val = expect_product(rho, o_operator(alpha, s, n).matrix, o_operator(beta, s, n).matrix)
    return float(val.real)


def q_oracle(rho: TruncatedDensity, alpha, beta, s: float, cutoff: int | None = None) -> float:
    """(2/(pi(1-s)))^2 Tr[(Pi(alpha) x Pi(beta)) rho]."""
    _check_cutoff(rho, cutoff)
    n = rho.cutoff
    s = check_s(s)
    val = expect_product(rho, pi_operator(alpha, s, n).matrix, pi_operator(beta, s, n).matrix)
    return float((2 / (np.pi * (1 - s))) ** 2 * val.real)


def q_marginal_oracle(rho: TruncatedDensity, alpha, s: float, arm: str = "first") -> float:
    n = rho.cutoff
    s = check_s(s)
    pi = pi_operator(alpha, s, n).matrix
    eye = np.eye(n + 1)
    if arm == "first":
        val = expect_product(rho, pi, eye)
    elif arm == "second":
        val = expect_product(rho, eye, pi)
    else:
        raise StructuralError(f"arm must be 'first' or 'second', got {arm!r}")
    return float(2 / (np.pi * (1 - s)) * val.real)


def network_bell_oracle(topology, K, densities: Sequence[TruncatedDensity], assignment, s: float):
    """Expectation of the operator products defining I and J, by enumeration.

    Every InK party receives one input x_i used on all of its modes; NotInK
    parties use input 0 for I and input 1 for J.  Because the sources are
    independent, each term is a product of per-source traces.
    Returns (I, J).
    """
    members = list(K.members)
    k = len(members)
    cache = {}

    def trace(j, xp, xq):
        key = (j, xp, xq)
        if key not in cache:
            d = assignment.sources[j]
            cache[key] = two_point_trace(densities[j], d.first(xp), d.second(xq), s)
        return cache[key]

    totals = []
    for other in (0, 1):
        acc = 0.0
        for xs in itertools.product((0, 1), repeat=k):
            inputs = dict(zip(members, xs))
            sign = (-1) ** sum(xs) if other else 1
            term = 1.0
            for j, (p, q) in enumerate(topology.sources):
                term *= trace(j, inputs.get(p, other), inputs.get(q, other))
            acc += sign * term
        totals.append(acc / 2**k)
    return totals[0], totals[1]
