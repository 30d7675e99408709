"""Command-line front end: ``nodes``, ``solve`` and ``table``.

Exit codes: 0 success, 2 usage, 3 numerical failure, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

import numpy as np

from . import harness
from .collocation import SingularSystemError
from .domain import BOUNDARIES, get_boundary, plan_refinement, read_boundary_csv, uniform_nodes
from .rectmesh import adapt

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _fmt(v: float) -> str:
    return repr(float(v))


def nodes_csv(nodes) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "tag"])
    for (x, y), b in zip(nodes.points, nodes.is_boundary):
        w.writerow([_fmt(x), _fmt(y), "boundary" if b else "interior"])
    return buf.getvalue()


def read_nodes_csv(text: str):
    rows = list(csv.DictReader(io.StringIO(text)))
    pts = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    tags = np.array([r["tag"] == "boundary" for r in rows])
    return pts, tags


def _write(path, text: str) -> None:
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text)


def _resolve_boundary(source: str):
    if source in BOUNDARIES:
        return get_boundary(source)
    path = Path(source)
    if not path.exists():
        raise UsageError(f"boundary {source!r} is neither a registered key nor a file")
    return read_boundary_csv(path)


def cmd_nodes(args) -> int:
    if args.problem:
        problem = harness.get_problem(args.problem)
        nodes = harness.build_nodes(
            problem,
            args.ntheta,
            args.nr,
            mode=args.mode,
            monitor=args.monitor,
            include_origin=args.include_origin,
            recompute_plan=args.recompute_plan,
        )
    else:
        try:
            boundary = _resolve_boundary(args.boundary)
        except ValueError as exc:
            raise OSError(f"invalid boundary file: {exc}") from exc
        if args.mode == "adaptive":
            # monitors need a solution; a bare boundary gets the constant monitor
            logging.getLogger(__name__).info("no problem given: adaptive mode uses a constant monitor")
            plan = plan_refinement(boundary, args.ntheta, args.nr)
            one = lambda t, r: np.ones(np.shape(t))  # noqa: E731
            nodes = adapt(boundary, one, one, args.ntheta, plan=plan,
                          recompute_plan=args.recompute_plan, include_origin=args.include_origin)
        else:
            nodes = uniform_nodes(boundary, args.ntheta, args.nr, include_origin=args.include_origin)
    _write(args.out, nodes_csv(nodes))
    return EXIT_OK


def cmd_solve(args) -> int:
    report = harness.run_case(
        args.problem,
        args.ntheta,
        args.nr,
        mode=args.mode,
        monitor=args.monitor,
        seed=args.seed,
        n_test=args.n_test,
        include_origin=args.include_origin,
        recompute_plan=args.recompute_plan,
        augment=args.augment_polynomials,
    )
    _write(args.out, report.to_json(indent=2) + "\n")
    if args.samples:
        problem = harness.get_problem(args.problem)
        pts = harness.sample_test_points(problem.boundary, args.n_test, args.seed, report.nodes.points)
        approx = report.solution(pts)
        exact = problem.u_exact(pts[:, 0], pts[:, 1])
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "u_approx", "u_exact"])
        for (x, y), a, e in zip(pts, approx, exact):
            w.writerow([_fmt(x), _fmt(y), _fmt(a), _fmt(e)])
        Path(args.samples).write_text(buf.getvalue())
    return EXIT_OK


def _parse_columns(items):
    cols = []
    for item in items:
        try:
            a, b = item.split(",")
            cols.append((int(a), int(b)))
        except ValueError:
            raise UsageError(f"column {item!r} is not of the form NTHETA,NR") from None
    return cols


def cmd_table(args) -> int:
    if args.columns is not None:
        columns = _parse_columns(args.columns)
        if not columns:
            raise UsageError("empty column list")
    else:
        columns = None
    table = harness.run_table(
        args.problem,
        columns,
        monitor=args.monitor,
        seed=args.seed,
        n_test=args.n_test,
        include_origin=args.include_origin,
        recompute_plan=args.recompute_plan,
        augment=args.augment_polynomials,
    )
    _write(args.out, table.to_text() + "\n")
    if args.json:
        Path(args.json).write_text(table.to_json(indent=2) + "\n")
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptnodes", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, need_grid=True):
        p.add_argument("--monitor", choices=["exact", "iterative"], default="exact")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--n-test", type=_positive_int, default=200)
        p.add_argument("--include-origin", action="store_true")
        p.add_argument("--recompute-plan", action="store_true")
        p.add_argument("--augment-polynomials", action="store_true")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        if need_grid:
            p.add_argument("--ntheta", type=_positive_int, required=True)
            p.add_argument("--nr", type=_positive_int, default=None)
            p.add_argument("--mode", choices=["uniform", "adaptive"], default="adaptive")

    p = sub.add_parser("nodes", help="write a node set as CSV (x,y,tag)")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--problem", choices=sorted(harness.PROBLEMS))
    src.add_argument("--boundary", help="registered boundary key or CSV file with theta,x,y")
    common(p)
    p.set_defaults(func=cmd_nodes)

    p = sub.add_parser("solve", help="solve one problem and print the run report")
    p.add_argument("--problem", choices=sorted(harness.PROBLEMS), required=True)
    p.add_argument("--samples", default=None, help="CSV of x,y,u_approx,u_exact at the test points")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="uniform vs adaptive error table")
    p.add_argument("--problem", choices=sorted(harness.PROBLEMS), required=True)
    p.add_argument("--columns", nargs="*", default=None, metavar="NTHETA,NR")
    p.add_argument("--json", default=None, help="also write the table as JSON")
    common(p, need_grid=False)
    p.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except harness.RunError as exc:
        print(f"error in stage '{exc.stage}': {exc.cause}", file=sys.stderr)
        return EXIT_IO if isinstance(exc.cause, OSError) else EXIT_NUMERIC
    except SingularSystemError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
