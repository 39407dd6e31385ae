"""Multistart Nelder-Mead search for the supremum of B over displacements.

The result is always a lower bound on the supremum: the search is local and
bounded to a box, so "no value above 1 was found" is a statement about the
configured budget, never a proof.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .bell import BellAssignment, BellEngine, BellEvaluation, b_from_ij
from .errors import ContractViolation, DomainError, StructuralError
from .gaussian import GaussianState
from .network import IndependentSet, NetworkTopology, canonical_independent_set

ANSATZE = ("auto", "full", "symmetric_sources", "real_only")
BOUNDARY_TOL = 1e-6
# Below this many sources, plain float arithmetic beats numpy call overhead.
SMALL_NETWORK = 12
START_SCALES = (1.0, 0.25)


@dataclass(frozen=True)
class OptimizerConfig:
    """Search settings.

    ``start_radius`` bounds the random starting points (default: half the
    box); ``box_radius`` bounds the search itself.  ``ansatz='auto'`` shares
    one set of displacements between sources when the network is a named
    family with identical sources, and searches every source independently
    otherwise.
    """

    restarts: int = 64
    eval_budget: int = 20_000
    tolerance: float = 1e-10
    box_radius: float = 3.0
    seed: int = 0
    ansatz: str = "auto"
    start_radius: float | None = None

    def __post_init__(self):
        if int(self.restarts) != self.restarts or self.restarts < 1:
            raise DomainError(f"restarts must be a positive integer, got {self.restarts!r}")
        if int(self.eval_budget) != self.eval_budget or self.eval_budget < 1:
            raise DomainError(f"eval_budget must be a positive integer, got {self.eval_budget!r}")
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be > 0, got {self.tolerance!r}")
        if not self.box_radius > 0:
            raise DomainError(f"box_radius must be > 0, got {self.box_radius!r}")
        if self.start_radius is not None and not 0 < self.start_radius <= self.box_radius:
            raise DomainError("start_radius must lie in (0, box_radius]")
        if self.ansatz not in ANSATZE:
            raise DomainError(f"ansatz must be one of {ANSATZE}, got {self.ansatz!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def effective_start_radius(self) -> float:
        return self.box_radius / 2 if self.start_radius is None else self.start_radius


@dataclass(frozen=True)
class SupremumResult:
    best: BellEvaluation
    argmax: BellAssignment
    restarts_run: int
    evals_used: int
    per_restart_best: tuple[float, ...]
    boundary_hit: bool = False
    ansatz: str = "full"


def identical_states(states: Sequence[GaussianState]) -> bool:
    first = states[0]
    return all(np.array_equal(st.cov, first.cov) for st in states[1:])


def resolve_ansatz(ansatz: str, topology: NetworkTopology, states) -> str:
    if ansatz != "auto":
        return ansatz
    if topology.family != "custom" and identical_states(states):
        return "symmetric_sources"
    return "full"


class Objective:
    """Map a real parameter vector to -B for a given ansatz.

    Parameter layout per source (``full``):
    [Re a0, Im a0, Re a1, Im a1, Re b0, Im b0, Re b1, Im b1].
    ``symmetric_sources`` uses one such block for every source and
    ``real_only`` keeps only the four real parts of each source.
    """

    def __init__(self, engine: BellEngine, ansatz: str):
        n = engine.n_sources
        if ansatz == "symmetric_sources":
            states_equal = all(
                np.array_equal(k.m_aa, engine.kernels[0].m_aa)
                and np.array_equal(k.m_ab, engine.kernels[0].m_ab)
                and np.array_equal(k.m_bb, engine.kernels[0].m_bb)
                for k in engine.kernels
            )
            if not states_equal:
                raise ContractViolation("symmetric_sources needs identical source states")
            self.dim = 8
        elif ansatz == "full":
            self.dim = 8 * n
        elif ansatz == "real_only":
            self.dim = 4 * n
        else:
            raise StructuralError(f"unresolved ansatz {ansatz!r}")
        self.engine, self.ansatz, self.n = engine, ansatz, n

    def arrays(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Displacement arrays of shape (..., n, 2) for parameters of shape (..., dim)."""
        x = np.asarray(x, dtype=float)
        lead = x.shape[:-1]
        if self.ansatz == "real_only":
            z = x.reshape(*lead, self.n, 4).astype(complex)
        else:
            z = (x[..., 0::2] + 1j * x[..., 1::2]).reshape(*lead, -1, 4)
            if self.ansatz == "symmetric_sources":
                z = np.repeat(z, self.n, axis=-2)
        return z[..., 0:2], z[..., 2:4]

    def batch(self, X: np.ndarray) -> np.ndarray:
        """-B for every row of ``X``."""
        a, b = self.arrays(X)
        i_val, j_val = self.engine.assemble(self.engine.tables(a, b))
        k = self.engine.k
        return -(np.abs(i_val) ** (1.0 / k) + np.abs(j_val) ** (1.0 / k))

    def evaluate(self, x) -> tuple[float, float, float]:
        if self.ansatz == "symmetric_sources":
            x = [float(v) for v in x]
            t = self.engine.kernels[0].table(
                complex(x[0], x[1]), complex(x[2], x[3]), complex(x[4], x[5]), complex(x[6], x[7])
            )
            i_val, j_val = self.engine.assemble_shared(t)
        elif self.n <= SMALL_NETWORK:
            x = [float(v) for v in x]
            if self.ansatz == "real_only":
                z = [complex(v) for v in x]
            else:
                z = [complex(x[i], x[i + 1]) for i in range(0, len(x), 2)]
            tables = [k.table(*z[4 * j:4 * j + 4]) for j, k in enumerate(self.engine.kernels)]
            i_val, j_val = self.engine.assemble_list(tables)
        else:
            a, b = self.arrays(x)
            i_val, j_val = self.engine.assemble(self.engine.tables(a, b))
        return b_from_ij(i_val, j_val, self.engine.k), float(i_val), float(j_val)

    def __call__(self, x) -> float:
        return -self.evaluate(x)[0]

    def assignment(self, x) -> BellAssignment:
        return BellAssignment.from_arrays(*self.arrays(x))


def _initial_simplices(x0: np.ndarray, bound: float) -> np.ndarray:
    # Same construction as the usual Nelder-Mead default: 5% steps, or 0.00025 at zero.
    r, dim = x0.shape
    sim = np.repeat(x0[:, None, :], dim + 1, axis=1)
    diag = np.where(x0 != 0, 1.05 * x0, 0.00025)
    idx = np.arange(dim)
    sim[:, idx + 1, idx] = diag
    return np.clip(sim, -bound, bound)


def nelder_mead_batch(
    fn: Callable[[np.ndarray], np.ndarray],
    x0: np.ndarray,
    bound: float,
    budget: int,
    tol: float,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Minimize ``fn`` from every row of ``x0`` with independent bounded simplices.

    All searches advance in lockstep so each step costs a few batched calls
    to ``fn``, but every row follows exactly the path it would follow alone.
    A search stops once the spread of values over its simplex is at most
    ``tol`` or it has used ``budget`` evaluations.  Adaptive coefficients
    scale with the dimension.

    Returns (best x per row, best value per row, evaluations per row).
    """
    x0 = np.atleast_2d(np.asarray(x0, dtype=float))
    r, dim = x0.shape
    rho, chi = 1.0, 1.0 + 2.0 / dim
    psi, sigma = 0.75 - 1.0 / (2.0 * dim), 1.0 - 1.0 / dim

    sim = _initial_simplices(x0, bound)
    fsim = fn(sim.reshape(-1, dim)).reshape(r, dim + 1)
    nfev = np.full(r, dim + 1)
    active = np.arange(r)

    while True:
        order = np.argsort(fsim[active], axis=1, kind="stable")
        sim[active] = np.take_along_axis(sim[active], order[:, :, None], axis=1)
        fsim[active] = np.take_along_axis(fsim[active], order, axis=1)
        f_ = fsim[active]
        spread = np.max(np.abs(f_[:, 1:] - f_[:, :1]), axis=1)
        active = active[(spread > tol) & (nfev[active] < budget)]
        if active.size == 0:
            break

        s_, f_ = sim[active], fsim[active]
        xbar = s_[:, :-1].mean(axis=1)
        worst, f_worst = s_[:, -1], f_[:, -1]
        xr = np.clip((1 + rho) * xbar - rho * worst, -bound, bound)
        fr = fn(xr)
        nfev[active] += 1

        expand = fr < f_[:, 0]
        accept_r = ~expand & (fr < f_[:, -2])
        outside = ~expand & ~accept_r & (fr < f_worst)
        inside = ~expand & ~accept_r & ~outside
        second = np.where(
            expand[:, None],
            (1 + rho * chi) * xbar - rho * chi * worst,
            np.where(
                outside[:, None],
                (1 + psi * rho) * xbar - psi * rho * worst,
                (1 - psi) * xbar + psi * worst,
            ),
        )
        second = np.clip(second, -bound, bound)
        need = ~accept_r
        f2 = np.full(active.size, np.inf)
        if np.any(need):
            f2[need] = fn(second[need])
            nfev[active[need]] += 1

        new_x, new_f = xr.copy(), fr.copy()
        take_e = expand & (f2 < fr)
        new_x[take_e], new_f[take_e] = second[take_e], f2[take_e]
        take_oc = outside & (f2 <= fr)
        take_ic = inside & (f2 < f_worst)
        take_c = take_oc | take_ic
        new_x[take_c], new_f[take_c] = second[take_c], f2[take_c]
        shrink = (outside | inside) & ~take_c
        keep = ~shrink
        sim[active[keep], -1] = new_x[keep]
        fsim[active[keep], -1] = new_f[keep]

        if np.any(shrink):
            who = active[shrink]
            best = sim[who, :1]
            pts = np.clip(best + sigma * (sim[who, 1:] - best), -bound, bound)
            sim[who, 1:] = pts
            fsim[who, 1:] = fn(pts.reshape(-1, dim)).reshape(who.size, dim)
            nfev[who] += dim

    return sim[:, 0], fsim[:, 0], nfev


def _run_chunk(args):
    objective, x0, bound, budget, tol = args
    x_best, f_best, nfev = nelder_mead_batch(objective.batch, x0, bound, budget, tol)
    return [(-float(f), x, int(n)) for x, f, n in zip(x_best, f_best, nfev)]


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def start_points(config: OptimizerConfig, dim: int) -> list[np.ndarray]:
    """Starting points, one independent stream per restart.

    Restart i always receives the same point for a given seed, so adding
    restarts never changes the earlier ones.  Restarts alternate between the
    full start radius and a quarter of it: near the far-displacement plateau
    B barely varies, and the basins of weak-squeezing optima are small and
    close to the origin.
    """
    children = np.random.SeedSequence(int(config.seed)).spawn(config.restarts)
    radius = config.effective_start_radius
    return [
        np.random.default_rng(c).uniform(-1.0, 1.0, dim) * radius * START_SCALES[i % len(START_SCALES)]
        for i, c in enumerate(children)
    ]


def supremum_b(
    topology: NetworkTopology,
    K: IndependentSet | None,
    states: Sequence[GaussianState],
    s: float,
    config: OptimizerConfig | None = None,
    form: str = "factorized",
    workers: int = 1,
) -> SupremumResult:
    """Largest B found by multistart Nelder-Mead over the displacements."""
    config = OptimizerConfig() if config is None else config
    K = canonical_independent_set(topology) if K is None else K
    engine = BellEngine(topology, K, states, s, form)
    ansatz = resolve_ansatz(config.ansatz, topology, states)
    objective = Objective(engine, ansatz)
    starts = np.array(start_points(config, objective.dim))
    chunks = np.array_split(starts, max(1, min(workers, len(starts))))
    tasks = [
        (objective, chunk, config.box_radius, config.eval_budget, config.tolerance)
        for chunk in chunks
    ]
    runs = [run for part in _map(_run_chunk, tasks, workers) for run in part]
    per_best = tuple(float(r[0]) for r in runs)
    top = int(np.argmax(per_best))
    x_best = runs[top][1]
    b_val, i_val, j_val = objective.evaluate(x_best)
    hit = bool(np.any(np.abs(x_best) >= config.box_radius - BOUNDARY_TOL))
    return SupremumResult(
        best=BellEvaluation(i_val, j_val, engine.k, b_val),
        argmax=objective.assignment(x_best),
        restarts_run=len(runs),
        evals_used=sum(r[2] for r in runs),
        per_restart_best=per_best,
        boundary_hit=hit,
        ansatz=ansatz,
    )


@dataclass(frozen=True)
class SweepRow:
    family: str
    params: str
    s: float
    r1: float
    r2: float
    B: float
    I: float
    J: float
    k: int
    restarts: int
    evals: int
    boundary_hit: bool
    seed: int
    argmax: BellAssignment = field(repr=False, compare=False, default=None)


def topology_params(topology: NetworkTopology) -> str:
    if topology.family == "tree":
        m, f = topology.params
        return f"m={m};f={f}"
    return f"y={topology.party_count}"


def sweep(
    topology: NetworkTopology,
    sources: Callable[[float, float], Sequence[GaussianState]],
    grid: Sequence[tuple[float, float]],
    s_values: Sequence[float],
    config: OptimizerConfig | None = None,
    K: IndependentSet | None = None,
    form: str = "factorized",
    workers: int = 1,
    label: str | None = None,
) -> list[SweepRow]:
    """Run ``supremum_b`` on every (s, r1, r2) cell.

    Args:
        topology: network to evaluate.
        sources: callable returning the per-source states for (r1, r2).
        grid: (r1, r2) pairs; identical-source sweeps pass (r, r).
        s_values: orders to evaluate.
        config: optimizer settings shared by every cell.
        label: optional ``params`` column text (defaults to the network size).

    Returns:
        Rows sorted by (s, r1, r2).
    """
    if not grid or not s_values:
        raise StructuralError("sweep grids must be non-empty")
    config = OptimizerConfig() if config is None else config
    K = canonical_independent_set(topology) if K is None else K
    cells = sorted((float(s), float(r1), float(r2)) for s in s_values for r1, r2 in grid)
    params = label if label is not None else topology_params(topology)
    rows = []
    for s, r1, r2 in cells:
        res = supremum_b(topology, K, sources(r1, r2), s, config, form, workers)
        rows.append(
            SweepRow(
                topology.family, params, s, r1, r2,
                res.best.b_value, res.best.i_value, res.best.j_value, res.best.k,
                res.restarts_run, res.evals_used, res.boundary_hit, int(config.seed),
                res.argmax,
            )
        )
    return rows


def with_overrides(config: OptimizerConfig, **kw) -> OptimizerConfig:
    return replace(config, **{k: v for k, v in kw.items() if v is not None})
