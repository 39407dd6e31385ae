"""s-ordered quasiprobability functions of Gaussian states.

For a Gaussian state with covariance ``G`` the order-s function (s <= 0) is
the Wigner-shaped density with covariance ``G + |s| I``.  Closed forms are
provided for the two-mode squeezed vacuum (EPR) and the two-mode squeezed
thermal state (STS); ``q_generic`` covers any zero-mean state.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError, StructuralError, UnsupportedError
from .gaussian import GaussianState, StsParams, gaussian_density, phase_space_vector


def check_s(s: float) -> float:
    s = float(s)
    if not np.isfinite(s) or s > 0:
        raise DomainError(f"quasiprobability order must satisfy s <= 0, got s={s}")
    return s


def _check_r(r: float) -> float:
    if not np.isfinite(r) or r < 0:
        raise DomainError(f"squeeze parameter must be finite and >= 0, got r={r!r}")
    return float(r)


def epr_coefficients(r: float, s: float) -> tuple[float, float]:
    """Return (R, S) for the EPR closed form."""
    ch = np.cosh(2 * r)
    return s * s - 2 * s * ch + 1, ch - s


def sts_coefficients(p: StsParams, s: float) -> tuple[float, float, float, float]:
    """Return (A, A1, A2, c) for the STS closed form.

    ``A1`` weights |alpha|^2 (first arm) in the joint exponent and sets the
    second-arm marginal; ``A2`` does the opposite.
    """
    ch2 = np.cosh(p.r) ** 2
    vsum = p.v1 + p.v2
    A = (p.v1 + s) * (p.v2 + s) - 2 * s * vsum * ch2
    A1 = vsum * ch2 - p.v1 - s
    A2 = vsum * ch2 - p.v2 - s
    c = 0.5 * vsum * np.sinh(2 * p.r)
    return A, A1, A2, c


def _joint(A, A1, A2, c, alpha, beta):
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    cross = 2.0 * (alpha * beta).real
    expo = -(2.0 / A) * (A1 * np.abs(alpha) ** 2 + A2 * np.abs(beta) ** 2 - c * cross)
    return np.exp(np.log(4.0 / (np.pi**2 * A)) + expo)


def _single(width, alpha):
    alpha = np.asarray(alpha, dtype=complex)
    return np.exp(np.log(2.0 / (np.pi * width)) - 2.0 * np.abs(alpha) ** 2 / width)


def q_epr(r: float, alpha, beta, s: float):
    """Order-s quasiprobability of the EPR state; broadcasts over alpha and beta."""
    r, s = _check_r(r), check_s(s)
    R, S = epr_coefficients(r, s)
    return _joint(R, S, S, np.sinh(2 * r), alpha, beta)


def q_epr_marginal(r: float, alpha, s: float):
    r, s = _check_r(r), check_s(s)
    return _single(epr_coefficients(r, s)[1], alpha)


def q_sts(p: StsParams, alpha, beta, s: float):
    s = check_s(s)
    A, A1, A2, c = sts_coefficients(p, s)
    return _joint(A, A1, A2, c, alpha, beta)


def q_sts_marginals(p: StsParams, alpha, s: float, arm: str = "first"):
    """Single-mode marginal on the ``first`` or ``second`` arm."""
    s = check_s(s)
    _, A1, A2, _ = sts_coefficients(p, s)
    if arm == "first":
        return _single(A2, alpha)
    if arm == "second":
        return _single(A1, alpha)
    raise StructuralError(f"arm must be 'first' or 'second', got {arm!r}")


def smoothed_cov(state: GaussianState, s: float) -> np.ndarray:
    return state.cov + abs(check_s(s)) * np.eye(state.cov.shape[0])


def q_generic(state: GaussianState, point, s: float) -> float:
    """Order-s quasiprobability of any zero-mean Gaussian state.

    Args:
        state: n-mode state with zero mean.
        point: sequence of n complex phase-space coordinates.
        s: order parameter, s <= 0.
    """
    if not state.is_zero_mean:
        raise UnsupportedError("quasiprobabilities are implemented for zero-mean states only")
    point = np.atleast_1d(np.asarray(point, dtype=complex))
    if point.shape != (state.modes,):
        raise StructuralError(f"expected {state.modes} phase-space coordinates, got {point.shape}")
    return gaussian_density(smoothed_cov(state, s), phase_space_vector(*point))


def q_generic_marginal(state: GaussianState, kept, point, s: float) -> float:
    """Marginal over the modes not listed in ``kept`` (0-based mode indices)."""
    if not state.is_zero_mean:
        raise UnsupportedError("quasiprobabilities are implemented for zero-mean states only")
    kept = sorted(set(int(m) for m in kept))
    if not kept or kept[0] < 0 or kept[-1] >= state.modes:
        raise StructuralError(f"kept modes {kept} invalid for a {state.modes}-mode state")
    point = np.atleast_1d(np.asarray(point, dtype=complex))
    if point.shape != (len(kept),):
        raise StructuralError(f"expected {len(kept)} coordinates, got {point.shape}")
    idx = np.ravel([[2 * m, 2 * m + 1] for m in kept])
    cov = smoothed_cov(state, s)[np.ix_(idx, idx)]
    return gaussian_density(cov, phase_space_vector(*point))


def c_combinator(sign: str, q_first: float, q_second: float) -> float:
    """C+/- = Q(a1, a2) +/- Q(a1', a2')."""
    return q_first + _sign(sign) * q_second


def d_combinator(sign: str, qa: float, qb: float, qa2: float, qb2: float) -> float:
    """D+/- = Q(a1) + Q(a2) +/- (Q(a1') + Q(a2'))."""
    return qa + qb + _sign(sign) * (qa2 + qb2)


def _sign(sign: str) -> int:
    if sign in ("+", 1):
        return 1
    if sign in ("-", -1):
        return -1
    raise StructuralError(f"sign must be '+' or '-', got {sign!r}")


def gauss_legendre_box(f, half_widths, nodes: int = 96, chunk: int = 1 << 21) -> float:
    """Tensor-product Gauss-Legendre integral of ``f`` over a centred box.

    ``f`` receives an array of shape (m, d) of real points and returns m
    values.  Points are generated in chunks so that 4-d integrals with 96
    nodes per axis fit in memory.
    """
    half_widths = np.asarray(half_widths, dtype=float)
    d = half_widths.size
    x, w = leggauss(nodes)
    total = 0.0
    n_pts = nodes**d
    for start in range(0, n_pts, chunk):
        flat = np.arange(start, min(start + chunk, n_pts))
        digits = np.stack(np.unravel_index(flat, (nodes,) * d), axis=1)
        pts = x[digits] * half_widths
        wts = np.prod(w[digits], axis=1)
        total += float(wts @ f(pts))
    return total * float(np.prod(half_widths))
