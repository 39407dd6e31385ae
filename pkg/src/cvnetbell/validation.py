"""Self-check suites behind ``cvnetbell validate``.

Every suite is deterministic for a given seed and reports the largest
deviation it saw, so two runs with the same arguments print identical text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import fock_oracle as fo
from .bell import BellAssignment, bell_value, branch_coefficients, theorem_expression, two_point
from .errors import CvNetBellError
from .gaussian import StsParams, epr_state, sts_state
from .network import build, canonical_independent_set
from .quasiprob import (
    gauss_legendre_box,
    q_epr,
    q_epr_marginal,
    q_generic,
    q_generic_marginal,
    q_sts,
    q_sts_marginals,
)

S_SAMPLES = (-0.2, -0.5, -1.0, -1.5, -2.0)
ORACLE_TOL = 1e-8
CONVERGENCE_TOL = 1e-9
REGRESSION_TOL = 1e-12
QUADRATURE_TOL = 1e-6
LOCAL_TOL = 1e-9
# Truncating a pure state with tail probability eps moves expectations by
# O(sqrt(eps)) through cross terms, so comparisons at 1e-8 need eps ~ 1e-16.
ORACLE_TAIL = 1e-16


@dataclass
class SuiteResult:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    detail: str = ""


@dataclass
class ValidationReport:
    suites: list[SuiteResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def render(self) -> str:
        lines = []
        for s in self.suites:
            status = "PASS" if s.passed else "FAIL"
            line = f"{status} {s.name}: max deviation {s.max_deviation:.3e} (tolerance {s.tolerance:.0e})"
            if s.detail:
                line += f"; {s.detail}"
            lines.append(line)
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _disk(rng, radius=2.0) -> complex:
    rho = radius * np.sqrt(rng.uniform())
    return complex(rho * np.exp(2j * np.pi * rng.uniform()))


def _sample(rng, kind: str):
    r = float(rng.uniform(0.0, 1.5))
    if kind == "epr":
        params = (1.0, 1.0, r)
    else:
        params = (float(rng.uniform(1.0, 2.0)), float(rng.uniform(1.0, 2.0)), r)
    return params, _disk(rng), _disk(rng), float(rng.choice(S_SAMPLES))


def _density(params, cutoff):
    v1, v2, r = params
    if v1 == 1.0 and v2 == 1.0:
        n = cutoff if cutoff is not None else fo.required_cutoff(lambda c: fo.epr_tail(r, c), ORACLE_TAIL)
        return fo.epr_density(r, n, ORACLE_TAIL)
    n = cutoff if cutoff is not None else fo.required_cutoff(lambda c: fo.sts_tail(v1, v2, r, c), ORACLE_TAIL)
    return fo.sts_density(v1, v2, r, n, ORACLE_TAIL)


def _closed_q(params, a, b, s):
    v1, v2, r = params
    if v1 == 1.0 and v2 == 1.0:
        return q_epr(r, a, b, s)
    return q_sts(StsParams(v1, v2, r), a, b, s)


def _state(params):
    v1, v2, r = params
    return epr_state(r) if v1 == 1.0 and v2 == 1.0 else sts_state(StsParams(v1, v2, r))


def oracle_suite(seed: int, points: int, cutoff: int | None) -> list[SuiteResult]:
    """Closed forms against the truncated Fock-basis computation."""
    rng = np.random.default_rng([seed, 1])
    out = []
    checks = (
        ("oracle q_epr", "epr", lambda rho, p, a, b, s: (fo.q_oracle(rho, a, b, s), _closed_q(p, a, b, s))),
        ("oracle q_sts", "sts", lambda rho, p, a, b, s: (fo.q_oracle(rho, a, b, s), _closed_q(p, a, b, s))),
        (
            "oracle two_point",
            "mixed",
            lambda rho, p, a, b, s: (fo.two_point_trace(rho, a, b, s), float(two_point(_state(p), a, b, s))),
        ),
    )
    for name, kind, fn in checks:
        worst, detail, ok = 0.0, "", True
        try:
            for i in range(points):
                k = kind if kind != "mixed" else ("epr" if i % 2 == 0 else "sts")
                params, a, b, s = _sample(rng, k)
                got, want = fn(_density(params, cutoff), params, a, b, s)
                worst = max(worst, abs(float(got) - float(want)))
        except CvNetBellError as exc:
            ok, detail, worst = False, str(exc), float("inf")
        out.append(SuiteResult(name, ok and worst < ORACLE_TOL, worst, ORACLE_TOL, detail))
    return out


def convergence_suite(seed: int, points: int, cutoff: int | None) -> SuiteResult:
    """Doubling the cutoff must leave oracle values unchanged."""
    rng = np.random.default_rng([seed, 2])
    worst, detail = 0.0, ""
    try:
        for i in range(points):
            params, a, b, s = _sample(rng, "epr" if i % 2 == 0 else "sts")
            lo = _density(params, cutoff)
            hi = _density(params, 2 * lo.cutoff)
            for fn in (fo.q_oracle, fo.two_point_trace):
                worst = max(worst, abs(fn(lo, a, b, s) - fn(hi, a, b, s)))
    except CvNetBellError as exc:
        return SuiteResult("cutoff convergence", False, float("inf"), CONVERGENCE_TOL, str(exc))
    ok = worst < CONVERGENCE_TOL
    if not ok and cutoff is not None:
        v1, v2, r = params
        need = fo.required_cutoff(lambda c: fo.sts_tail(v1, v2, r, c), ORACLE_TAIL)
        detail = f"cutoff {cutoff} is too small; use N >= {need}"
    return SuiteResult("cutoff convergence", ok, worst, CONVERGENCE_TOL, detail)


def _box_q(params, s, nodes):
    v1, v2, r = params
    state = _state(params)
    # four standard deviations of the widest smoothed quadrature, in alpha units
    half = 4 * np.sqrt(np.max(np.linalg.eigvalsh(state.cov)) + abs(s)) / 2 + 1.0

    def f(pts):
        a = pts[:, 0] + 1j * pts[:, 1]
        b = pts[:, 2] + 1j * pts[:, 3]
        return _closed_q(params, a, b, s)

    return gauss_legendre_box(f, [half] * 4, nodes=nodes)


def normalization_suite(nodes: int = 48) -> SuiteResult:
    worst = 0.0
    for params in ((1.0, 1.0, 0.4), (1.2, 1.5, 0.3)):
        for s in (-0.5, -1.0, -2.0):
            worst = max(worst, abs(_box_q(params, s, nodes) - 1.0))
    return SuiteResult("normalization", worst < QUADRATURE_TOL, worst, QUADRATURE_TOL)


def marginal_suite(seed: int, cutoff: int | None, nodes: int = 64) -> list[SuiteResult]:
    """Integrating out one arm reproduces the closed-form marginals."""
    rng = np.random.default_rng([seed, 3])
    worst_quad = 0.0
    for params in ((1.0, 1.0, 0.5), (1.2, 1.6, 0.4)):
        v1, v2, r = params
        state = _state(params)
        for _ in range(3):
            alpha, s = _disk(rng, 1.5), float(rng.choice(S_SAMPLES))
            half = 4 * np.sqrt(np.max(np.linalg.eigvalsh(state.cov)) + abs(s)) / 2 + 1.0

            def f(pts, alpha=alpha, s=s):
                return _closed_q(params, alpha, pts[:, 0] + 1j * pts[:, 1], s)

            got = gauss_legendre_box(f, [half, half], nodes=nodes)
            if v1 == v2 == 1.0:
                want = float(q_epr_marginal(r, alpha, s))
            else:
                want = float(q_sts_marginals(StsParams(v1, v2, r), alpha, s, "first"))
            worst_quad = max(worst_quad, abs(got - want))
    quad = SuiteResult("marginal quadrature", worst_quad < QUADRATURE_TOL, worst_quad, QUADRATURE_TOL)

    worst_oracle, detail = 0.0, ""
    try:
        for params in ((1.0, 1.0, 0.8), (1.3, 1.1, 0.6)):
            rho = _density(params, cutoff)
            state = _state(params)
            for arm, mode in (("first", 0), ("second", 1)):
                for _ in range(3):
                    alpha, s = _disk(rng), float(rng.choice(S_SAMPLES))
                    got = fo.q_marginal_oracle(rho, alpha, s, arm)
                    want = q_generic_marginal(state, [mode], [alpha], s)
                    worst_oracle = max(worst_oracle, abs(got - want))
    except CvNetBellError as exc:
        detail, worst_oracle = str(exc), float("inf")
    oracle = SuiteResult("marginal oracle", worst_oracle < ORACLE_TOL, worst_oracle, ORACLE_TOL, detail)
    return [quad, oracle]


LOCAL_NETWORKS = (
    ("chain", (3,)), ("chain", (4,)), ("chain", (5,)), ("chain", (6,)),
    ("star", (3,)), ("star", (4,)), ("star", (5,)), ("star", (6,)),
    ("tree", (2, 2)), ("tree", (2, 3)), ("tree", (2, 4)), ("tree", (2, 5)),
    ("cycle", (3,)), ("cycle", (4,)), ("cycle", (5,)), ("cycle", (6,)),
)


def local_bound_worst(form: str, seed: int, draws: int) -> tuple[float, list[str]]:
    """Largest B over random assignments with separable sources, and the offending networks."""
    from .bell import BellEngine

    rng = np.random.default_rng([seed, 4])
    worst, offenders = 0.0, []
    separable = (epr_state(0.0), sts_state(StsParams(1.2, 1.2, 0.05)))
    for family, size in LOCAL_NETWORKS:
        topo = build(family, *size)
        K = canonical_independent_set(topo)
        net_worst = 0.0
        for state in separable:
            for s in (-0.5, -1.0, -2.0):
                engine = BellEngine(topo, K, [state] * topo.source_count, s, form)
                n = topo.source_count
                z = rng.uniform(-2, 2, (draws, n, 4)) + 1j * rng.uniform(-2, 2, (draws, n, 4))
                i_val, j_val = engine.assemble(engine.tables(z[..., :2], z[..., 2:]))
                b = np.abs(i_val) ** (1.0 / engine.k) + np.abs(j_val) ** (1.0 / engine.k)
                net_worst = max(net_worst, float(np.max(b)))
        if net_worst > 1 + LOCAL_TOL:
            offenders.append(f"{topo.label()}={net_worst:.4f}")
        worst = max(worst, net_worst)
    return worst, offenders


def local_bound_suite(seed: int, draws: int, form: str) -> SuiteResult:
    worst, offenders = local_bound_worst(form, seed, draws)
    detail = "exceeded by " + ", ".join(offenders) if offenders else ""
    return SuiteResult(f"local bound ({form})", not offenders, max(worst - 1.0, 0.0), LOCAL_TOL, detail)


def branch_continuity_suite() -> SuiteResult:
    """Both branches of the correlator coefficients meet at s = -1."""
    s = -1.0
    low = (np.pi**2 * (1 - s) ** 4 / 4, np.pi * s * (1 - s) ** 2 / 2, s * s)
    high = branch_coefficients(s)
    worst = max(abs(a - b) for a, b in zip(low, high))
    near = branch_coefficients(np.nextafter(-1.0, 0.0))
    worst = max(worst, max(abs(a - b) / max(1.0, abs(b)) for a, b in zip(near, high)))
    return SuiteResult("branch continuity", worst < REGRESSION_TOL, worst, REGRESSION_TOL)


REGRESSION_NETWORKS = (
    ("chain", (3,), "chain"), ("chain", (6,), "chain"), ("star", (4,), "star"), ("star", (6,), "star"),
    ("tree", (3, 2), "tree"), ("tree", (2, 3), "tree"), ("cycle", (5,), "cycle_odd"), ("cycle", (6,), "cycle_even"),
)


def regression_suite(seed: int, draws: int) -> SuiteResult:
    """Generic engine against the per-family closed expressions, plus q_generic against closed forms."""
    rng = np.random.default_rng([seed, 5])
    worst = 0.0
    for family, size, tag in REGRESSION_NETWORKS:
        topo = build(family, *size)
        K = canonical_independent_set(topo)
        for _ in range(draws):
            s = float(rng.choice((-0.5, -1.5)))
            states = [
                sts_state(StsParams(*rng.uniform(1.0, 1.6, 2), rng.uniform(0.1, 1.0)))
                for _ in range(topo.source_count)
            ]
            z = rng.uniform(-1.5, 1.5, (topo.source_count, 4)) + 1j * rng.uniform(-1.5, 1.5, (topo.source_count, 4))
            assignment = BellAssignment.from_arrays(z[:, :2], z[:, 2:])
            a = bell_value(topo, K, states, assignment, s)
            b = theorem_expression(tag, topo, states, assignment, s)
            for x, y in ((a.i_value, b.i_value), (a.j_value, b.j_value), (a.b_value, b.b_value)):
                worst = max(worst, abs(x - y) / max(1.0, abs(y)))
    for _ in range(draws):
        params, a_pt, b_pt, s = _sample(rng, "sts")
        got = q_generic(_state(params), [a_pt, b_pt], s)
        want = _closed_q(params, a_pt, b_pt, s)
        worst = max(worst, abs(got - float(want)) / max(1.0, abs(float(want))))
    return SuiteResult("formula regression", worst < REGRESSION_TOL, worst, REGRESSION_TOL)


def run_validation(
    cutoff: int | None = None,
    seed: int = 0,
    points: int = 100,
    form: str = "factorized",
) -> ValidationReport:
    """Run every suite.

    ``cutoff`` forces one Fock cutoff for the oracle suites instead of
    choosing it from the tail bound.
    """
    report = ValidationReport()
    report.suites.extend(oracle_suite(seed, points, cutoff))
    report.suites.append(convergence_suite(seed, max(4, points // 10), cutoff))
    report.suites.append(normalization_suite())
    report.suites.extend(marginal_suite(seed, cutoff))
    report.suites.append(local_bound_suite(seed, max(20, points), form))
    report.suites.append(branch_continuity_suite())
    report.suites.append(regression_suite(seed, max(5, points // 10)))
    return report
