"""Bell functional for networks of bipartite Gaussian sources.

Every party measures, on each mode it receives, the bounded observable
O(alpha; s) built from the displaced-parity-like operator Pi(alpha; s).  The
expectation of O(alpha) x O(beta) on one source only needs the source's
order-s quasiprobability and its two marginals (``two_point``).  Those
per-source numbers are assembled into I, J and B = |I|^(1/k) + |J|^(1/k).

Two assemblies are offered:

``factorized``
    I (resp. J) is 2^-k times a product of one factor per source, each factor
    summing (resp. differencing) over the inputs of the source's InK endpoint.
    This is the closed form used by the chain/star/tree/cycle expressions and
    is the default.

``expanded``
    The expectation of the operator product itself: an InK party attached to
    several sources uses one input for all of them, so the sum over its input
    is taken after multiplying its sources together.  Both assemblies agree
    whenever every InK party has exactly one source.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ContractViolation, StructuralError, UnsupportedError
from .gaussian import GaussianState
from .network import (
    IndependentSet,
    NetworkTopology,
    PartyClass,
    canonical_independent_set,
    classify_parties,
)
from .quasiprob import (
    c_combinator,
    check_s,
    d_combinator,
    q_generic,
    q_generic_marginal,
    smoothed_cov,
)

FORMS = ("factorized", "expanded")


@dataclass(frozen=True)
class SourceDisplacements:
    """Displacements of one source: a0/a1 on the first arm, b0/b1 on the second."""

    a0: complex = 0j
    a1: complex = 0j
    b0: complex = 0j
    b1: complex = 0j

    def __post_init__(self):
        for name in ("a0", "a1", "b0", "b1"):
            val = complex(getattr(self, name))
            if not np.isfinite(val.real) or not np.isfinite(val.imag):
                raise StructuralError(f"displacement {name} is not finite: {val!r}")
            object.__setattr__(self, name, val)

    def first(self, x: int) -> complex:
        return self.a1 if x else self.a0

    def second(self, x: int) -> complex:
        return self.b1 if x else self.b0


@dataclass(frozen=True)
class BellAssignment:
    sources: tuple[SourceDisplacements, ...]

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))

    def __len__(self):
        return len(self.sources)

    @classmethod
    def zeros(cls, n: int) -> "BellAssignment":
        return cls(tuple(SourceDisplacements() for _ in range(n)))

    @classmethod
    def from_arrays(cls, a, b) -> "BellAssignment":
        """Build from complex arrays ``a`` and ``b`` of shape (n, 2) (columns = input)."""
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        return cls(tuple(SourceDisplacements(x[0], x[1], y[0], y[1]) for x, y in zip(a, b)))

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        a = np.array([[d.a0, d.a1] for d in self.sources], dtype=complex).reshape(-1, 2)
        b = np.array([[d.b0, d.b1] for d in self.sources], dtype=complex).reshape(-1, 2)
        return a, b


@dataclass(frozen=True)
class BellEvaluation:
    i_value: float
    j_value: float
    k: int
    b_value: float

    @classmethod
    def from_ij(cls, i_value: float, j_value: float, k: int) -> "BellEvaluation":
        return cls(float(i_value), float(j_value), int(k), b_from_ij(i_value, j_value, k))

    def as_dict(self) -> dict:
        return {"I": self.i_value, "J": self.j_value, "k": self.k, "B": self.b_value}


def b_from_ij(i_value: float, j_value: float, k: int) -> float:
    return float(abs(i_value) ** (1.0 / k) + abs(j_value) ** (1.0 / k))


def branch_coefficients(s: float) -> tuple[float, float, float]:
    """(c_joint, c_marg, c_const) with two_point = c_joint*Q + c_marg*(Qa + Qb) + c_const."""
    s = check_s(s)
    if s > -1:
        return np.pi**2 * (1 - s) ** 4 / 4, np.pi * s * (1 - s) ** 2 / 2, s * s
    return np.pi**2 * (1 - s) ** 2, -np.pi * (1 - s), 1.0


class SourceKernel:
    """Order-s quasiprobabilities of one zero-mean (1+1)-mode source.

    The smoothed covariance is inverted once so that repeated evaluations
    reduce to a few small quadratic forms.
    """

    def __init__(self, state: GaussianState, s: float):
        if state.modes != 2:
            raise UnsupportedError(f"sources must be (1+1)-mode states, got {state.modes} modes")
        if not state.is_zero_mean:
            raise UnsupportedError("the Bell engine requires zero-mean source states")
        self.s = check_s(s)
        g = smoothed_cov(state, self.s)
        sign, logdet = np.linalg.slogdet(g)
        if sign <= 0:
            raise ContractViolation("smoothed covariance is not positive definite")
        m = np.linalg.inv(g)
        self.m_aa, self.m_ab, self.m_bb = m[:2, :2], m[:2, 2:], m[2:, 2:]
        self.log_joint = 2 * np.log(2 / np.pi) - 0.5 * logdet
        ga, gb = g[:2, :2], g[2:, 2:]
        self.marg_a = np.linalg.inv(ga)
        self.marg_b = np.linalg.inv(gb)
        self.log_a = np.log(2 / np.pi) - 0.5 * np.log(np.linalg.det(ga))
        self.log_b = np.log(2 / np.pi) - 0.5 * np.log(np.linalg.det(gb))
        self.coeffs = branch_coefficients(self.s)
        self.log_joint, self.log_a, self.log_b = (
            float(self.log_joint), float(self.log_a), float(self.log_b)
        )
        self.coeffs = tuple(float(c) for c in self.coeffs)
        self._flat = tuple(float(v) for v in (
            self.m_aa[0, 0], self.m_aa[0, 1], self.m_aa[1, 1],
            self.m_bb[0, 0], self.m_bb[0, 1], self.m_bb[1, 1],
            self.m_ab[0, 0], self.m_ab[0, 1], self.m_ab[1, 0], self.m_ab[1, 1],
            self.marg_a[0, 0], self.marg_a[0, 1], self.marg_a[1, 1],
            self.marg_b[0, 0], self.marg_b[0, 1], self.marg_b[1, 1],
        ))

    def table(self, a0: complex, a1: complex, b0: complex, b1: complex):
        """2x2 two_point table as nested tuples, in plain floats.

        Used by optimizers that share one set of displacements between many
        identical sources, where numpy call overhead would dominate.
        """
        (aa00, aa01, aa11, bb00, bb01, bb11, ab00, ab01, ab10, ab11,
         ma00, ma01, ma11, mb00, mb01, mb11) = self._flat
        cj, cm, c0 = self.coeffs
        out = []
        pa, pb = [], []
        for z in (a0, a1):
            x, y = 2 * z.real, 2 * z.imag
            pa.append((x, y, aa00 * x * x + 2 * aa01 * x * y + aa11 * y * y,
                       math.exp(self.log_a - 0.5 * (ma00 * x * x + 2 * ma01 * x * y + ma11 * y * y))))
        for z in (b0, b1):
            x, y = 2 * z.real, 2 * z.imag
            pb.append((x, y, bb00 * x * x + 2 * bb01 * x * y + bb11 * y * y,
                       math.exp(self.log_b - 0.5 * (mb00 * x * x + 2 * mb01 * x * y + mb11 * y * y))))
        for xa, ya, qa, ma in pa:
            row = []
            for xb, yb, qb, mb in pb:
                cross = xa * (ab00 * xb + ab01 * yb) + ya * (ab10 * xb + ab11 * yb)
                joint = math.exp(self.log_joint - 0.5 * (qa + qb + 2 * cross))
                row.append(cj * joint + cm * (ma + mb) + c0)
            out.append(tuple(row))
        return tuple(out)


def _real2(z) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape + (2,))
    out[..., 0] = 2.0 * z.real
    out[..., 1] = 2.0 * z.imag
    return out


def two_point(state: GaussianState, alpha, beta, s: float):
    """Expectation of O(alpha; s) x O(beta; s) on a (1+1)-mode source.

    Broadcasts over ``alpha`` and ``beta``.
    """
    ker = SourceKernel(state, s)
    xa, xb = np.broadcast_arrays(_real2(alpha), _real2(beta))
    qa_quad = np.einsum("...i,ij,...j->...", xa, ker.m_aa, xa)
    qb_quad = np.einsum("...i,ij,...j->...", xb, ker.m_bb, xb)
    cross = np.einsum("...i,ij,...j->...", xa, ker.m_ab, xb)
    q = np.exp(ker.log_joint - 0.5 * (qa_quad + qb_quad + 2 * cross))
    qa = np.exp(ker.log_a - 0.5 * np.einsum("...i,ij,...j->...", xa, ker.marg_a, xa))
    qb = np.exp(ker.log_b - 0.5 * np.einsum("...i,ij,...j->...", xb, ker.marg_b, xb))
    cj, cm, c0 = ker.coeffs
    out = cj * q + cm * (qa + qb) + c0
    return float(out) if np.ndim(out) == 0 else out


# Endpoint weights over the two inputs: row 0 is used for I, row 1 for J.
_WEIGHTS = {
    PartyClass.IN_K: np.array([[1.0, 1.0], [1.0, -1.0]]),
    PartyClass.NOT_IN_K: np.array([[1.0, 0.0], [0.0, 1.0]]),
}


def source_factor(state, disp: SourceDisplacements, class_p, class_q, which: str, s: float) -> float:
    """Per-source factor of I (``which='I'``) or J (``which='J'``)."""
    if class_p is PartyClass.IN_K and class_q is PartyClass.IN_K:
        raise ContractViolation("a source cannot have both endpoints in the independent set")
    row = {"I": 0, "J": 1}.get(which)
    if row is None:
        raise StructuralError(f"which must be 'I' or 'J', got {which!r}")
    wp, wq = _WEIGHTS[class_p][row], _WEIGHTS[class_q][row]
    total = 0.0
    for xp in (0, 1):
        for xq in (0, 1):
            w = wp[xp] * wq[xq]
            if w:
                total += w * two_point(state, disp.first(xp), disp.second(xq), s)
    return total


class BellEngine:
    """Vectorized Bell functional for a fixed network, source list and s.

    Construction validates everything once; ``tables`` and ``evaluate`` then
    work on plain arrays and are cheap enough for an optimizer inner loop.
    """

    def __init__(
        self,
        topology: NetworkTopology,
        K: IndependentSet,
        states: Sequence[GaussianState],
        s: float,
        form: str = "factorized",
    ):
        if form not in FORMS:
            raise StructuralError(f"form must be one of {FORMS}, got {form!r}")
        states = list(states)
        if len(states) != topology.source_count:
            raise StructuralError(
                f"{len(states)} source states given for {topology.source_count} sources"
            )
        self.topology, self.K, self.form = topology, K, form
        self.s = check_s(s)
        self.k = K.k
        classes = classify_parties(topology, K)
        self.kernels = [SourceKernel(st, self.s) for st in states]
        self.coeffs = branch_coefficients(self.s)
        self._stack()

        cls = [(classes[p - 1], classes[q - 1]) for p, q in topology.sources]
        self.w_first = np.array([_WEIGHTS[cp] for cp, _ in cls])  # (n, 2 rows, 2 inputs)
        self.w_second = np.array([_WEIGHTS[cq] for _, cq in cls])
        self._w_outer = np.einsum("nri,nrj->nrij", self.w_first, self.w_second)
        self.free = np.array(
            [cp is PartyClass.NOT_IN_K and cq is PartyClass.NOT_IN_K for cp, cq in cls]
        )
        # For the expanded form: per InK party, its sources and the arm it sits on.
        self.groups = []
        for i in K.members:
            idx = [j for j, (p, q) in enumerate(topology.sources) if i in (p, q)]
            arm = [0 if topology.sources[j][0] == i else 1 for j in idx]
            self.groups.append((np.array(idx), np.array(arm)))
        self._patterns = Counter(
            (tuple(wp[0]), tuple(wq[0]), tuple(wp[1]), tuple(wq[1]))
            for wp, wq in zip(self.w_first.tolist(), self.w_second.tolist())
        )
        self._free_count = int(self.free.sum())
        self._group_counts = [
            (int(np.sum(arm == 0)), int(np.sum(arm == 1))) for _, arm in self.groups
        ]
        self._weights_py = [
            (tuple(wp[0]), tuple(wq[0]), tuple(wp[1]), tuple(wq[1]))
            for wp, wq in zip(self.w_first.tolist(), self.w_second.tolist())
        ]
        self._free_py = [j for j, f in enumerate(self.free) if f]
        self._groups_py = [
            list(zip(idx.tolist(), arm.tolist())) for idx, arm in self.groups
        ]

    def _stack(self):
        ks = self.kernels
        self.m_aa = np.array([k.m_aa for k in ks])
        self.m_ab = np.array([k.m_ab for k in ks])
        self.m_bb = np.array([k.m_bb for k in ks])
        self.marg_a = np.array([k.marg_a for k in ks])
        self.marg_b = np.array([k.marg_b for k in ks])
        self.log_joint = np.array([k.log_joint for k in ks])
        self.log_a = np.array([k.log_a for k in ks])
        self.log_b = np.array([k.log_b for k in ks])
        self._quad_a = np.stack([self.m_aa, self.marg_a], axis=1)
        self._quad_b = np.stack([self.m_bb, self.marg_b], axis=1)

    @property
    def n_sources(self) -> int:
        return len(self.kernels)

    def tables(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """two_point values T[..., n, x_first, x_second] for displacements of shape (..., n, 2)."""
        xa, xb = _real2(a), _real2(b)  # (..., n, 2 inputs, 2)
        # Joint and marginal quadratic forms of each arm in one contraction.
        qa, pa = np.einsum("...nxi,nkij,...nxj->k...nx", xa, self._quad_a, xa)
        qb, pb = np.einsum("...nyi,nkij,...nyj->k...ny", xb, self._quad_b, xb)
        cross = np.einsum("...nxi,nij,...nyj->...nxy", xa, self.m_ab, xb)
        joint = np.exp(
            self.log_joint[:, None, None] - 0.5 * (qa[..., :, None] + qb[..., None, :] + 2 * cross)
        )
        ma = np.exp(self.log_a[:, None] - 0.5 * pa)
        mb = np.exp(self.log_b[:, None] - 0.5 * pb)
        cj, cm, c0 = self.coeffs
        return cj * joint + cm * (ma[..., :, None] + mb[..., None, :]) + c0

    def assemble(self, T: np.ndarray):
        """Combine two_point tables into (I, J); leading batch axes give arrays."""
        if self.form == "factorized":
            fac = np.einsum("nrij,...nij->...rn", self._w_outer, T)
            i_val, j_val = _signed_product(fac[..., 0, :]), _signed_product(fac[..., 1, :])
        else:
            i_val = _signed_product(T[..., self.free, 0, 0])
            j_val = _signed_product(T[..., self.free, 1, 1])
            for idx, arm in self.groups:
                # Rows of T indexed by this party's input; the other endpoint is
                # NotInK and sits at input 0 for I and input 1 for J.
                sub = T[..., idx, :, :]
                t = np.where(arm[:, None, None] == 0, sub, np.swapaxes(sub, -1, -2))
                pi = np.prod(t[..., 0], axis=-2)
                pj = np.prod(t[..., 1], axis=-2)
                i_val = i_val * (pi[..., 0] + pi[..., 1])
                j_val = j_val * (pj[..., 0] - pj[..., 1])
        scale = 0.5**self.k
        return i_val * scale, j_val * scale

    def assemble_shared(self, t) -> tuple[float, float]:
        """(I, J) when every source has the same 2x2 table ``t``."""
        if self.form == "factorized":
            i_val = j_val = 1.0
            for (ip, iq, jp, jq), count in self._patterns.items():
                fi = sum(ip[x] * iq[u] * t[x][u] for x in (0, 1) for u in (0, 1))
                fj = sum(jp[x] * jq[u] * t[x][u] for x in (0, 1) for u in (0, 1))
                i_val *= fi**count
                j_val *= fj**count
        else:
            i_val = t[0][0] ** self._free_count
            j_val = t[1][1] ** self._free_count
            for c0, c1 in self._group_counts:
                i_val *= (t[0][0] ** c0) * (t[0][0] ** c1) + (t[1][0] ** c0) * (t[0][1] ** c1)
                j_val *= (t[0][1] ** c0) * (t[1][0] ** c1) - (t[1][1] ** c0) * (t[1][1] ** c1)
        scale = 0.5**self.k
        return i_val * scale, j_val * scale

    def assemble_list(self, tables) -> tuple[float, float]:
        """Same as :meth:`assemble` for a list of plain 2x2 tuples, one per source."""
        if self.form == "factorized":
            i_val = j_val = 1.0
            for (ip, iq, jp, jq), t in zip(self._weights_py, tables):
                i_val *= sum(ip[x] * iq[u] * t[x][u] for x in (0, 1) for u in (0, 1))
                j_val *= sum(jp[x] * jq[u] * t[x][u] for x in (0, 1) for u in (0, 1))
        else:
            i_val = j_val = 1.0
            for j in self._free_py:
                i_val *= tables[j][0][0]
                j_val *= tables[j][1][1]
            for group in self._groups_py:
                pi = [1.0, 1.0]
                pj = [1.0, 1.0]
                for j, arm in group:
                    t = tables[j]
                    for x in (0, 1):
                        if arm == 0:
                            pi[x] *= t[x][0]
                            pj[x] *= t[x][1]
                        else:
                            pi[x] *= t[0][x]
                            pj[x] *= t[1][x]
                i_val *= pi[0] + pi[1]
                j_val *= pj[0] - pj[1]
        if not (math.isfinite(i_val) and math.isfinite(j_val)) or (i_val == 0.0 or j_val == 0.0):
            t = np.array(tables, dtype=float)
            return self.assemble(t)
        scale = 0.5**self.k
        return i_val * scale, j_val * scale

    def evaluate_arrays(self, a: np.ndarray, b: np.ndarray) -> tuple[float, float, float]:
        """Return (B, I, J) for displacement arrays of shape (n, 2)."""
        i_val, j_val = self.assemble(self.tables(a, b))
        return b_from_ij(i_val, j_val, self.k), float(i_val), float(j_val)

    def evaluate(self, assignment: BellAssignment) -> BellEvaluation:
        if len(assignment) != self.n_sources:
            raise StructuralError(
                f"assignment has {len(assignment)} sources, network has {self.n_sources}"
            )
        a, b = assignment.arrays()
        i_val, j_val = self.assemble(self.tables(a, b))
        return BellEvaluation.from_ij(i_val, j_val, self.k)


def _signed_product(values: np.ndarray):
    """Product over the last axis; falls back to sign and summed logs when it under- or overflows."""
    values = np.asarray(values, dtype=float)
    if values.shape[-1] == 0:
        out = np.ones(values.shape[:-1])
        return float(out) if out.ndim == 0 else out
    direct = np.prod(values, axis=-1)
    bad = (direct == 0) | ~np.isfinite(direct) | (np.abs(direct) <= 1e-280)
    if np.any(bad):
        with np.errstate(divide="ignore"):
            logs = np.sum(np.log(np.abs(values)), axis=-1)
        sign = np.where(np.count_nonzero(values < 0, axis=-1) % 2, -1.0, 1.0)
        fallback = np.where(np.any(values == 0, axis=-1), 0.0, sign * np.exp(logs))
        direct = np.where(bad, fallback, direct)
    return float(direct) if np.ndim(direct) == 0 else direct


def bell_value(
    topology: NetworkTopology,
    K: IndependentSet,
    states: Sequence[GaussianState],
    assignment: BellAssignment,
    s: float,
    form: str = "factorized",
) -> BellEvaluation:
    """Evaluate I, J and B for one assignment of displacements."""
    return BellEngine(topology, K, states, s, form).evaluate(assignment)


# ---------------------------------------------------------------------------
# Family-specific closed forms written out with the C/D combinators.  These
# deliberately avoid the engine above so they can serve as a regression check.


class _SourceQ:
    def __init__(self, state: GaussianState, s: float):
        self.state, self.s = state, s

    def joint(self, x, y):
        return q_generic(self.state, [x, y], self.s)

    def first(self, x):
        return q_generic_marginal(self.state, [0], [x], self.s)

    def second(self, y):
        return q_generic_marginal(self.state, [1], [y], self.s)


def _bracket(q: _SourceQ, s: float, sign: str, x1, y1, x2, y2, const: float) -> float:
    """c1 * C(x1,y1; x2,y2) + c2 * D(x1,y1; x2,y2) + const, with branch coefficients."""
    if s > -1:
        c1, c2 = np.pi**2 * (1 - s) ** 4 / 4, np.pi * s * (1 - s) ** 2 / 2
    else:
        c1, c2 = np.pi**2 * (1 - s) ** 2, -np.pi * (1 - s)
    cterm = c_combinator(sign, q.joint(x1, y1), q.joint(x2, y2))
    dterm = d_combinator(sign, q.first(x1), q.second(y1), q.first(x2), q.second(y2))
    return c1 * cterm + c2 * dterm + const


def _in_k_first(q, d: SourceDisplacements, s):
    """(I, J) brackets for a source whose first-arm party is independent."""
    const = 2 * s * s if s > -1 else 2.0
    i_term = _bracket(q, s, "+", d.a0, d.b0, d.a1, d.b0, const)
    j_term = _bracket(q, s, "-", d.a0, d.b1, d.a1, d.b1, 0.0)
    return i_term, j_term


def _in_k_second(q, d: SourceDisplacements, s):
    """(I, J) brackets for a source whose second-arm party is independent."""
    const = 2 * s * s if s > -1 else 2.0
    i_term = _bracket(q, s, "+", d.a0, d.b0, d.a0, d.b1, const)
    j_term = _bracket(q, s, "-", d.a1, d.b0, d.a1, d.b1, 0.0)
    return i_term, j_term


def _neither_in_k(q, d: SourceDisplacements, s):
    """(I, J) brackets for a source with no independent endpoint.

    Written with repeated arguments and halved coefficients, as printed.
    """
    const = s * s if s > -1 else 1.0
    i_term = 0.5 * _bracket(q, s, "+", d.a0, d.b0, d.a0, d.b0, 2 * const)
    j_term = 0.5 * _bracket(q, s, "+", d.a1, d.b1, d.a1, d.b1, 2 * const)
    return i_term, j_term


THEOREM_FAMILIES = ("chain", "star", "tree", "cycle_odd", "cycle_even")


def theorem_expression(
    family: str,
    topology: NetworkTopology,
    states: Sequence[GaussianState],
    assignment: BellAssignment,
    s: float,
) -> BellEvaluation:
    """Closed-form I, J, B for a named family with its canonical independent set.

    Each source's bracket is chosen from the party indices alone, following
    the family's index pattern, rather than from a generic class map.
    """
    s = check_s(s)
    if family not in THEOREM_FAMILIES:
        raise StructuralError(f"family must be one of {THEOREM_FAMILIES}, got {family!r}")
    base = "cycle" if family.startswith("cycle") else family
    if topology.family != base:
        raise StructuralError(f"topology {topology.label()} does not match family {family!r}")
    y = topology.party_count
    if family == "cycle_odd" and y % 2 == 0 or family == "cycle_even" and y % 2 == 1:
        raise StructuralError(f"{family} does not apply to a cycle of {y} parties")
    if len(states) != topology.source_count or len(assignment) != topology.source_count:
        raise StructuralError("states and assignment must match the source count")
    K = canonical_independent_set(topology)
    qs = [_SourceQ(st, s) for st in states]
    disp = assignment.sources
    brackets = []

    if family == "chain":
        for i in range(1, y):
            rule = _in_k_first if i in K else _in_k_second
            brackets.append(rule(qs[i - 1], disp[i - 1], s))
    elif family == "star":
        for j in range(1, y):
            brackets.append(_in_k_first(qs[j - 1], disp[j - 1], s))
    elif family == "tree":
        _, f = topology.params
        for i in range(1, y):
            parent = -(-i // f)
            rule = _in_k_first if parent in K else _in_k_second
            brackets.append(rule(qs[i - 1], disp[i - 1], s))
    elif family == "cycle_odd":
        # K = {1, 3, ..., y-2}: source (y-1, y) touches no member of K and the
        # closing source (y, 1) has its independent party on the second arm.
        for i in range(1, y - 1):
            rule = _in_k_first if i % 2 else _in_k_second
            brackets.append(rule(qs[i - 1], disp[i - 1], s))
        brackets.append(_neither_in_k(qs[y - 2], disp[y - 2], s))
        brackets.append(_in_k_second(qs[y - 1], disp[y - 1], s))
    else:
        # K = {2, 4, ..., y}: the closing source (y, 1) starts at a member of K.
        for i in range(1, y):
            rule = _in_k_first if i % 2 == 0 else _in_k_second
            brackets.append(rule(qs[i - 1], disp[i - 1], s))
        brackets.append(_in_k_first(qs[y - 1], disp[y - 1], s))

    i_val = float(np.prod([b[0] for b in brackets])) / 2**K.k
    j_val = float(np.prod([b[1] for b in brackets])) / 2**K.k
    return BellEvaluation.from_ij(i_val, j_val, K.k)
