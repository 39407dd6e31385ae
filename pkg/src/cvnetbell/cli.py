"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 input error, 3 domain or
physics error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bell import FORMS, BellAssignment, SourceDisplacements, bell_value
from .errors import (
    ContractViolation,
    DomainError,
    NumericError,
    ResourceError,
    StructuralError,
    UnsupportedError,
)
from .gaussian import GaussianState, StsParams, epr_state, sts_state
from .network import (
    FAMILIES,
    NetworkTopology,
    build,
    canonical_independent_set,
    exact_independent_set,
)
from .optimize import ANSATZE, OptimizerConfig, SweepRow, supremum_b, sweep, topology_params

CSV_HEADER = ["family", "params", "s", "r1", "r2", "B", "I", "J", "k", "restarts", "evals", "boundary_hit", "seed"]

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_DOMAIN, EXIT_IO = 0, 1, 2, 3, 4


class InputError(Exception):
    """Malformed command-line or file input."""


# -- parsing helpers ---------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise InputError(f"bad grid {text!r}: need start <= stop and step > 0")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + i * step, 10) for i in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse grid {text!r}: {exc}") from None


def parse_s_values(values: list[str]) -> list[float]:
    out = []
    for v in values:
        out.extend(parse_grid(v) if ":" in v else [float(x) for x in v.split(",") if x.strip()])
    return out


def _kv(spec: str) -> dict[str, float]:
    out = {}
    for part in filter(None, spec.split(",")):
        if "=" not in part:
            raise InputError(f"expected key=value in source descriptor, got {part!r}")
        key, val = part.split("=", 1)
        try:
            out[key.strip()] = float(val)
        except ValueError:
            raise InputError(f"non-numeric value in source descriptor: {part!r}") from None
    return out


def source_factory(desc: str):
    """Turn ``epr``, ``epr:r=0.5``, ``sts:v=1.2`` or ``sts:v1=..,v2=..,r=..`` into r -> state.

    A fixed ``r`` in the descriptor overrides the grid value.
    """
    kind, _, rest = desc.partition(":")
    opts = _kv(rest)
    if kind == "epr":
        unknown = set(opts) - {"r"}
        if unknown:
            raise InputError(f"unknown epr options {sorted(unknown)}")
        return lambda r: epr_state(opts.get("r", r))
    if kind == "sts":
        unknown = set(opts) - {"v", "v1", "v2", "r"}
        if unknown:
            raise InputError(f"unknown sts options {sorted(unknown)}")
        v1 = opts.get("v1", opts.get("v", 1.0))
        v2 = opts.get("v2", opts.get("v", 1.0))
        return lambda r: sts_state(StsParams(v1, v2, opts.get("r", r)))
    raise InputError(f"unknown source kind {kind!r}; expected 'epr' or 'sts'")


def source_label(desc: str) -> str:
    return desc.replace(",", "/")


def state_from_json(obj) -> GaussianState:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError(f"state must be an object with a 'kind' field, got {obj!r}")
    kind = obj["kind"]
    try:
        if kind == "epr":
            return epr_state(float(obj["r"]))
        if kind == "sts":
            return sts_state(StsParams(float(obj["v1"]), float(obj["v2"]), float(obj["r"])))
        if kind == "custom":
            return GaussianState(np.array(obj["cov"], dtype=float))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise InputError(f"malformed {kind} state {obj!r}: {exc}") from None
    raise InputError(f"unknown state kind {kind!r}")


def topology_from_json(obj) -> NetworkTopology:
    try:
        family = obj.get("family", "custom")
        parties = int(obj["parties"])
        sources = [tuple(int(v) for v in pq) for pq in obj["sources"]]
    except (AttributeError, KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed topology: {exc}") from None
    topo = NetworkTopology(parties, tuple(sources), "custom")
    if family in FAMILIES:
        # Keep the family tag only if the sources match the constructor exactly.
        params = obj.get("params")
        try:
            ref = build(family, *params) if params else build(family, parties)
        except (DomainError, StructuralError, TypeError):
            ref = None
        if ref is not None and ref.sources == topo.sources:
            return ref
    return topo


def assignment_from_json(obj) -> BellAssignment:
    def cx(v):
        if isinstance(v, (int, float)):
            return complex(v)
        if isinstance(v, (list, tuple)) and len(v) == 2:
            return complex(float(v[0]), float(v[1]))
        raise InputError(f"displacement must be [re, im], got {v!r}")

    try:
        srcs = obj["sources"]
        return BellAssignment(
            tuple(SourceDisplacements(*(cx(d[key]) for key in ("a0", "a1", "b0", "b1"))) for d in srcs)
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed assignment: {exc}") from None


def assignment_to_json(assignment: BellAssignment) -> dict:
    return {
        "sources": [
            {key: [getattr(d, key).real, getattr(d, key).imag] for key in ("a0", "a1", "b0", "b1")}
            for d in assignment.sources
        ]
    }


def read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


# -- shared argument groups ----------------------------------------------------


def add_topology_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("network")
    g.add_argument("--family", choices=FAMILIES + ("custom",), help="named network family")
    g.add_argument("--y", type=int, help="party count for chain, star and cycle")
    g.add_argument("--m", type=int, help="tree depth")
    g.add_argument("--f", type=int, help="tree fan-out")
    g.add_argument("--topology", help="JSON topology file (overrides --family)")
    g.add_argument("--K", help="comma-separated independent parties (default: canonical set)")


def add_source_args(p: argparse.ArgumentParser, sweep_mode: bool = False):
    g = p.add_argument_group("sources")
    help_src = (
        "shared source descriptor: epr, sts:v=1.2 (r taken from the grid)"
        if sweep_mode
        else "shared source descriptor, e.g. epr:r=0.75 or sts:v1=1.2,v2=1.2,r=1"
    )
    g.add_argument("--source", help=help_src)
    if not sweep_mode:
        g.add_argument("--states", help="JSON file with a list of per-source state objects")


def add_optimizer_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("optimizer")
    d = OptimizerConfig()
    g.add_argument("--restarts", type=int, default=d.restarts)
    g.add_argument("--eval-budget", type=int, default=d.eval_budget)
    g.add_argument("--tolerance", type=float, default=d.tolerance)
    g.add_argument("--box-radius", type=float, default=d.box_radius)
    g.add_argument("--start-radius", type=float, default=None, help="default: half the box radius; odd restarts start within a quarter of it")
    g.add_argument("--seed", type=int, default=d.seed)
    g.add_argument("--ansatz", choices=ANSATZE, default=d.ansatz)
    g.add_argument("--form", choices=FORMS, default="factorized")
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker processes")


def config_from_args(args) -> OptimizerConfig:
    return OptimizerConfig(
        restarts=args.restarts,
        eval_budget=args.eval_budget,
        tolerance=args.tolerance,
        box_radius=args.box_radius,
        seed=args.seed,
        ansatz=args.ansatz,
        start_radius=args.start_radius,
    )


def topology_from_args(args) -> NetworkTopology:
    if args.topology:
        return topology_from_json(read_json(args.topology))
    if args.family is None or args.family == "custom":
        raise InputError("give --family with its size, or --topology FILE")
    if args.family == "tree":
        if args.m is None or args.f is None:
            raise InputError("tree networks need --m and --f")
        return build("tree", args.m, args.f)
    if args.y is None:
        raise InputError(f"{args.family} networks need --y")
    return build(args.family, args.y)


def independent_set_from_args(args, topology):
    from .network import IndependentSet

    if getattr(args, "K", None):
        try:
            return IndependentSet(int(v) for v in args.K.split(","))
        except ValueError:
            raise InputError(f"cannot parse --K {args.K!r}") from None
    if topology.family == "custom":
        return exact_independent_set(topology)
    return canonical_independent_set(topology)


def states_from_args(args, topology) -> list[GaussianState]:
    if getattr(args, "states", None):
        data = read_json(args.states)
        if isinstance(data, dict):
            data = data.get("states")
        if not isinstance(data, list):
            raise InputError("states file must hold a list of state objects")
        states = [state_from_json(obj) for obj in data]
        if len(states) == 1:
            states *= topology.source_count
        return states
    if not args.source:
        raise InputError("give --source or --states")
    kind, _, rest = args.source.partition(":")
    if "r" not in _kv(rest) and not (kind == "sts" and "r" in _kv(rest)):
        raise InputError("the source descriptor needs an r value here, e.g. epr:r=0.75")
    return [source_factory(args.source)(0.0)] * topology.source_count


# -- output ------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([_fmt(getattr(row, col)) for col in CSV_HEADER])
    return buf.getvalue()


def write_text(path: str | None, text: str):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8")


def argmax_bundle(rows: list[SweepRow]) -> dict:
    return {
        "rows": [
            {"s": r.s, "r1": r.r1, "r2": r.r2, "B": r.B, "assignment": assignment_to_json(r.argmax)}
            for r in rows
        ]
    }


def write_outputs(rows: list[SweepRow], out: str | None, save_argmax: bool):
    write_text(out, rows_to_csv(rows))
    if save_argmax:
        if out in (None, "-"):
            raise InputError("--save-argmax needs --out FILE")
        Path(out + ".argmax.json").write_text(json.dumps(argmax_bundle(rows), indent=1), encoding="utf-8")


# -- commands ----------------------------------------------------------------


def cmd_eval(args) -> int:
    topo = topology_from_args(args)
    K = independent_set_from_args(args, topo)
    states = states_from_args(args, topo)
    data = read_json(args.assignment)
    if isinstance(data, dict) and "rows" in data:
        try:
            data = data["rows"][args.row]["assignment"]
        except (IndexError, KeyError, TypeError):
            raise InputError(f"row {args.row} not found in argmax bundle") from None
    assignment = assignment_from_json(data)
    if len(assignment) != topo.source_count:
        raise InputError(
            f"assignment has {len(assignment)} sources but the network has {topo.source_count}"
        )
    ev = bell_value(topo, K, states, assignment, args.s, form=args.form)
    print(json.dumps(ev.as_dict()))
    return EXIT_OK


def _label(topo: NetworkTopology, source: str | None) -> str:
    base = topology_params(topo)
    return f"{base};source={source_label(source)}" if source else base


def cmd_sup(args) -> int:
    topo = topology_from_args(args)
    K = independent_set_from_args(args, topo)
    states = states_from_args(args, topo)
    config = config_from_args(args)
    res = supremum_b(topo, K, states, args.s, config, form=args.form, workers=args.threads)
    r_val = _kv(args.source.partition(":")[2]).get("r", float("nan")) if args.source else float("nan")
    row = SweepRow(
        topo.family, _label(topo, args.source if args.source else "file"), float(args.s), r_val, r_val,
        res.best.b_value, res.best.i_value, res.best.j_value, res.best.k,
        res.restarts_run, res.evals_used, res.boundary_hit, int(config.seed), res.argmax,
    )
    write_text(args.out, rows_to_csv([row]))
    if args.save_argmax:
        if args.out in (None, "-"):
            raise InputError("--save-argmax needs --out FILE")
        Path(args.out + ".argmax.json").write_text(
            json.dumps(assignment_to_json(res.argmax), indent=1), encoding="utf-8"
        )
    return EXIT_OK


def _sweep_grid(args) -> list[tuple[float, float]]:
    if args.r is not None:
        if args.r1 is not None or args.r2 is not None:
            raise InputError("use either --r or --r1/--r2")
        return [(r, r) for r in parse_grid(args.r)]
    if args.r1 is None or args.r2 is None:
        raise InputError("give --r, or both --r1 and --r2")
    return [(a, b) for a in parse_grid(args.r1) for b in parse_grid(args.r2)]


def run_sweep(topo, source: str, grid, s_values, config, form="factorized", workers=1, K=None):
    make = source_factory(source)
    n = topo.source_count
    two_valued = any(r1 != r2 for r1, r2 in grid)
    if two_valued and n != 2:
        raise InputError("--r1/--r2 grids need a network with exactly two sources")

    def states(r1, r2):
        return [make(r1), make(r2)] if n == 2 else [make(r1)] * n

    return sweep(topo, states, grid, s_values, config, K, form, workers, label=_label(topo, source))


def cmd_sweep(args) -> int:
    topo = topology_from_args(args)
    K = independent_set_from_args(args, topo)
    if not args.source:
        raise InputError("sweep needs --source")
    rows = run_sweep(
        topo, args.source, _sweep_grid(args), parse_s_values(args.s), config_from_args(args),
        args.form, args.threads, K,
    )
    write_outputs(rows, args.out, args.save_argmax)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    from .figures import FIGURES, figure_jobs

    if args.figure not in FIGURES:
        raise InputError(f"unknown figure {args.figure!r}; valid ids: {', '.join(FIGURES)}")
    config = config_from_args(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = {"figure": args.figure, "seed": config.seed, "config": dict(config.__dict__), "files": []}
    for job in figure_jobs(args.figure, args.r_step):
        topo = build(job.family, *job.size)
        rows = run_sweep(topo, job.source, job.grid, job.s_values, config, args.form, args.threads)
        path = out_dir / f"{args.figure}_{job.name}.csv"
        path.write_text(rows_to_csv(rows), encoding="utf-8")
        manifest["files"].append({"name": path.name, "description": job.description})
    manifest["form"] = args.form
    manifest["version"] = __version__
    (out_dir / f"{args.figure}_manifest.json").write_text(json.dumps(manifest, indent=1), encoding="utf-8")
    print(json.dumps(manifest["files"]))
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import run_validation

    report = run_validation(cutoff=args.cutoff, seed=args.seed, points=args.points, form=args.form)
    print(report.render())
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cvnetbell",
        description="Bell functionals for continuous-variable networks of Gaussian sources.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate B for one assignment")
    add_topology_args(p)
    add_source_args(p)
    p.add_argument("--assignment", required=True, help="assignment JSON (or an argmax bundle)")
    p.add_argument("--row", type=int, default=0, help="row to use from an argmax bundle")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--form", choices=FORMS, default="factorized")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sup", help="search for the supremum of B")
    add_topology_args(p)
    add_source_args(p)
    add_optimizer_args(p)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--save-argmax", action="store_true")
    p.set_defaults(func=cmd_sup)

    p = sub.add_parser("sweep", help="supremum over an (s, r) grid, written as CSV")
    add_topology_args(p)
    add_source_args(p, sweep_mode=True)
    add_optimizer_args(p)
    p.add_argument("--r", help="grid for identical sources: start:stop:step or a,b,c")
    p.add_argument("--r1", help="grid for the first of two sources")
    p.add_argument("--r2", help="grid for the second of two sources")
    p.add_argument("--s", nargs="+", required=True, help="one or more s values (comma lists allowed)")
    p.add_argument("--out", default="-")
    p.add_argument("--save-argmax", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("reproduce", help="regenerate the data behind a figure")
    p.add_argument("figure")
    p.add_argument("--out-dir", default="reproduce_out")
    p.add_argument("--r-step", type=float, default=None, help="override the r grid spacing")
    add_optimizer_args(p)
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("validate", help="run the oracle and property checks")
    p.add_argument("--cutoff", type=int, default=None, help="force a Fock cutoff")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--form", choices=FORMS, default="factorized", help="assembly checked by the local-bound suite")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, StructuralError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DomainError, NumericError, UnsupportedError, ResourceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
