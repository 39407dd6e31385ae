"""Zero-mean Gaussian states described by a covariance matrix.

Convention: quadratures are scaled so that the vacuum covariance is the
identity, and a complex phase-space point alpha maps to the real vector
(2 Re alpha, 2 Im alpha).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError, StructuralError

SYMMETRY_RTOL = 1e-12
PSD_TOL = -1e-10
COND_LIMIT = 1e12


def symplectic_form(n: int) -> np.ndarray:
    """Block-diagonal symplectic form with blocks [[0, 1], [-1, 0]]."""
    if int(n) != n or n < 1:
        raise DomainError(f"number of modes must be a positive integer, got {n!r}")
    return np.kron(np.eye(int(n)), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True)
class ValidityReport:
    valid: bool
    symmetry_defect: float
    min_eigenvalue: float


@dataclass(frozen=True, eq=False)
class GaussianState:
    """An n-mode Gaussian state (covariance ``cov`` and mean ``mean``).

    Instances are immutable; the arrays are copied and flagged read-only.
    """

    cov: np.ndarray
    mean: np.ndarray = field(default=None)

    def __post_init__(self):
        cov = np.array(self.cov, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] % 2:
            raise StructuralError(f"covariance must be 2n x 2n, got shape {cov.shape}")
        mean = np.zeros(cov.shape[0]) if self.mean is None else np.array(self.mean, dtype=float)
        if mean.shape != (cov.shape[0],):
            raise StructuralError(
                f"mean must have length {cov.shape[0]}, got shape {mean.shape}"
            )
        cov.setflags(write=False)
        mean.setflags(write=False)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "mean", mean)

    @property
    def modes(self) -> int:
        return self.cov.shape[0] // 2

    @property
    def is_zero_mean(self) -> bool:
        return not np.any(self.mean)

    def __repr__(self) -> str:
        return f"GaussianState(modes={self.modes}, cov={self.cov.tolist()})"


def validate(state: GaussianState) -> ValidityReport:
    """Check symmetry of the covariance and the uncertainty relation.

    The state is physical when ``cov + i*Omega`` is positive semidefinite.
    """
    cov = state.cov
    scale = max(np.max(np.abs(cov)), 1.0)
    sym = float(np.max(np.abs(cov - cov.T)) / scale)
    herm = cov + 1j * symplectic_form(state.modes)
    herm = 0.5 * (herm + herm.conj().T)
    min_eig = float(np.linalg.eigvalsh(herm)[0])
    # eigen-solvers resolve eigenvalues only to eps * norm, so the PSD
    # tolerance grows with the largest entry
    return ValidityReport(sym <= SYMMETRY_RTOL and min_eig >= PSD_TOL * scale, sym, min_eig)


def _checked(state: GaussianState) -> GaussianState:
    rep = validate(state)
    if not rep.valid:
        raise DomainError(
            f"unphysical covariance (symmetry defect {rep.symmetry_defect:.3g}, "
            f"min eigenvalue {rep.min_eigenvalue:.3g})"
        )
    return state


@dataclass(frozen=True)
class StsParams:
    """Squeezed thermal state parameters: thermal variances v1, v2 and squeeze r."""

    v1: float
    v2: float
    r: float

    def __post_init__(self):
        for name in ("v1", "v2", "r"):
            val = getattr(self, name)
            if not np.isfinite(val):
                raise DomainError(f"{name} must be finite, got {val!r}")
        if self.v1 < 1 or self.v2 < 1:
            raise DomainError(f"thermal variances must be >= 1, got v1={self.v1}, v2={self.v2}")
        if self.r < 0:
            raise DomainError(f"squeeze factor must be >= 0, got r={self.r}")


def _two_mode_cov(a: float, b: float, c: float) -> np.ndarray:
    return np.array(
        [
            [a, 0.0, c, 0.0],
            [0.0, a, 0.0, -c],
            [c, 0.0, b, 0.0],
            [0.0, -c, 0.0, b],
        ]
    )


def epr_state(r: float) -> GaussianState:
    """Two-mode squeezed vacuum with squeeze parameter ``r``."""
    if not np.isfinite(r) or r < 0:
        raise DomainError(f"squeeze parameter must be finite and >= 0, got r={r!r}")
    ch, sh = np.cosh(2 * r), np.sinh(2 * r)
    return _checked(GaussianState(_two_mode_cov(ch, ch, sh)))


def sts_state(p: StsParams) -> GaussianState:
    """Two-mode squeezed thermal state."""
    ch2, sh2 = np.cosh(p.r) ** 2, np.sinh(p.r) ** 2
    a = p.v1 * ch2 + p.v2 * sh2
    b = p.v1 * sh2 + p.v2 * ch2
    c = 0.5 * (p.v1 + p.v2) * np.sinh(2 * p.r)
    return _checked(GaussianState(_two_mode_cov(a, b, c)))


def sts_is_separable(p: StsParams) -> bool:
    return bool(np.cosh(p.r) ** 2 <= (p.v1 + 1) * (p.v2 + 1) / (2 * (p.v1 + p.v2)))


def phase_space_vector(*points) -> np.ndarray:
    """Real vector (2 Re a1, 2 Im a1, 2 Re a2, ...) for complex points.

    Array-valued points broadcast; the coordinates then sit on the last axis.
    """
    z = np.stack(np.broadcast_arrays(*[np.asarray(p, dtype=complex) for p in points]), axis=-1)
    return 2.0 * np.stack([z.real, z.imag], axis=-1).reshape(*z.shape[:-1], 2 * z.shape[-1])


def gaussian_density(cov: np.ndarray, x: np.ndarray) -> float:
    """Evaluate 2^n / (pi^n sqrt(det cov)) exp(-x^T cov^-1 x / 2).

    This is the phase-space density shared by the Wigner function and the
    smoothed quasiprobabilities; working in log space keeps it finite for
    large arguments.
    """
    cov = np.asarray(cov, dtype=float)
    n = cov.shape[0] // 2
    if np.linalg.cond(cov) > COND_LIMIT:
        raise NumericError("covariance is singular or ill-conditioned")
    sign, logdet = np.linalg.slogdet(cov)
    if sign <= 0:
        raise NumericError("covariance is not positive definite")
    x = np.asarray(x, dtype=float)
    quad = np.einsum("...i,ij,...j->...", x, np.linalg.inv(cov), x)
    out = np.exp(n * np.log(2 / np.pi) - 0.5 * logdet - 0.5 * quad)
    return float(out) if out.ndim == 0 else out


def wigner(state: GaussianState, alpha: complex, beta: complex) -> float:
    """Wigner function of a zero-mean two-mode state at (alpha, beta)."""
    if state.modes != 2:
        raise StructuralError(f"expected a two-mode state, got {state.modes} modes")
    if not state.is_zero_mean:
        raise StructuralError("wigner expects a zero-mean state")
    return gaussian_density(state.cov, phase_space_vector(alpha, beta))


def characteristic_fn(state: GaussianState, u) -> complex:
    u = np.asarray(u, dtype=float)
    if u.shape != state.mean.shape:
        raise StructuralError(f"u must have length {state.mean.size}, got shape {u.shape}")
    return complex(np.exp(-0.25 * u @ state.cov @ u + 1j * state.mean @ u))
