"""Sweep definitions behind each reproducible figure id."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

BRANCH_LOW = (-0.2, -0.5, -0.8)
BRANCH_HIGH = (-1.0, -1.5, -2.0)
SURFACE_S = (-0.5, -1.0, -2.0)
EPR_SLICES = (0.1, 0.5, 1.0, 3.0, 5.0)
STS_SLICES = (0.8, 1.0, 1.2, 1.4, 2.0, 5.0)

DEFAULT_LINE_STEP = 0.05
DEFAULT_SURFACE_STEP = 0.5


@dataclass(frozen=True)
class FigureJob:
    name: str
    family: str
    size: tuple[int, ...]
    source: str
    grid: tuple[tuple[float, float], ...]
    s_values: tuple[float, ...]
    description: str


def _axis(lo: float, hi: float, step: float) -> list[float]:
    n = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 10) for i in range(n)]


def _line(step: float) -> tuple[tuple[float, float], ...]:
    return tuple((r, r) for r in _axis(step, 3.0, step))


def _surface(step: float) -> tuple[tuple[float, float], ...]:
    axis = _axis(0.0, 5.0, step)
    return tuple((a, b) for a in axis for b in axis)


def _slices(fixed, step: float) -> tuple[tuple[float, float], ...]:
    return tuple((r1, r2) for r2 in fixed for r1 in _axis(0.0, 5.0, step))


def _branch_pair(prefix, family, size, source, what, step):
    line = _line(step)
    return [
        FigureJob(f"{prefix}_a", family, size, source, line, BRANCH_LOW, f"{what}, -1 < s <= 0"),
        FigureJob(f"{prefix}_b", family, size, source, line, BRANCH_HIGH, f"{what}, s <= -1"),
    ]


def _surfaces(prefix, source, what, step):
    grid = _surface(step)
    return [
        FigureJob(f"{prefix}_s{abs(s):g}", "chain", (3,), source, grid, (s,), f"{what} surface at s={s:g}")
        for s in SURFACE_S
    ]


def _jobs(fig: str, line_step: float, surface_step: float) -> list[FigureJob]:
    epr, sts = "epr", "sts:v=1.2"
    if fig == "fig2":
        return _surfaces("chain3_epr", epr, "chain(3) EPR x EPR", surface_step) + _branch_pair(
            "chain6_epr", "chain", (6,), epr, "chain(6) EPR", line_step
        )
    if fig == "fig3":
        return [
            FigureJob("chain3_epr_slices", "chain", (3,), epr, _slices(EPR_SLICES, line_step * 2), (-1.0,),
                      "chain(3) EPR x EPR at s=-1 against r1 for fixed r2"),
        ] + _branch_pair("chain6_sts", "chain", (6,), sts, "chain(6) STS(1.2,1.2,r)", line_step)
    if fig == "fig4":
        return _surfaces("chain3_sts", sts, "chain(3) STS x STS", surface_step) + [
            FigureJob("chain3_sts_slices", "chain", (3,), sts, _slices(STS_SLICES, line_step * 2), (-1.0,),
                      "chain(3) STS x STS at s=-1 against r1 for fixed r2"),
        ]
    table = {
        "fig5": ("star6_epr", "star", (6,), epr, "star(6) EPR"),
        "fig6": ("star6_sts", "star", (6,), sts, "star(6) STS(1.2,1.2,r)"),
        "fig8": ("tree32_epr", "tree", (3, 2), epr, "tree(3,2) EPR"),
        "fig9": ("tree32_sts", "tree", (3, 2), sts, "tree(3,2) STS(1.2,1.2,r)"),
        "fig11": ("cycle5_epr", "cycle", (5,), epr, "cycle(5) EPR"),
        "fig12": ("cycle5_sts", "cycle", (5,), sts, "cycle(5) STS(1.2,1.2,r)"),
    }
    return _branch_pair(*table[fig], line_step)


FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6", "fig8", "fig9", "fig11", "fig12")


def figure_jobs(fig: str, r_step: float | None = None) -> list[FigureJob]:
    """Jobs for one figure id.

    ``r_step`` replaces both the line spacing (default 0.05) and the surface
    spacing (default 0.5), which is mostly useful for quick smoke runs.
    """
    if fig not in FIGURES:
        raise KeyError(fig)
    line = DEFAULT_LINE_STEP if r_step is None else r_step
    surface = DEFAULT_SURFACE_STEP if r_step is None else r_step
    return _jobs(fig, line, surface)
