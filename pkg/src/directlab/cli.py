"""Command line front end: ``directlab solve | bench | profile``.

Exit codes: 0 when a run is solved or a suite/profile completes, 2 when a
single run ends with a failure status, 1 on usage errors.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import bench
from .problems import ProblemError, lookup_problem, parse_descriptor
from .solve import ALGORITHMS, FAILURE_SENTINEL, IncompatibleProblemError, RunConfig, export_trace, run


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="directlab", description="DIRECT-type global optimization toolbox")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run one algorithm on one problem")
    s.add_argument("--alg", required=True)
    s.add_argument("--problem", required=True, help="registered name or a path to a descriptor file")
    s.add_argument("--n", type=int)
    s.add_argument("--eps-pe", type=float, default=1e-2)
    s.add_argument("--max-evals", type=int, default=FAILURE_SENTINEL)
    s.add_argument("--max-time", type=float)
    s.add_argument("--max-iters", type=int)
    s.add_argument("--workers", type=int)
    s.add_argument("--storage", choices=("static", "dynamic"), default="static")
    s.add_argument("--trace", help="write the per-iteration trace as JSON lines")

    b = sub.add_parser("bench", help="run a suite and write a results CSV")
    b.add_argument("--algs", required=True, help="comma separated algorithm names")
    b.add_argument("--suite", required=True, choices=("box", "linear", "nonlinear", "hidden", "engineering"))
    b.add_argument("--out", required=True)
    b.add_argument("--max-n", type=int)
    b.add_argument("--max-evals", type=int, default=FAILURE_SENTINEL)
    b.add_argument("--max-time", type=float)
    b.add_argument("--workers", type=int)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--report", help="also write the aggregate text report here")

    q = sub.add_parser("profile", help="performance profile from a results CSV")
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--metric", choices=("fevals", "time"), default="fevals")
    q.add_argument("--out", required=True, help="SVG output path")
    q.add_argument("--csv", help="numeric profile CSV (default: next to the SVG)")
    return p


def _load_problem(name: str, n: Optional[int]):
    path = Path(name)
    if path.is_file():
        spec = parse_descriptor(path.read_text())
        if n is not None and n != spec.n:
            raise UsageError(f"--n {n} disagrees with the descriptor dimension {spec.n}")
        return spec
    return lookup_problem(name, n)


def _solve(a) -> int:
    if a.alg not in ALGORITHMS:
        raise UsageError(f"unknown algorithm {a.alg!r}")
    try:
        spec = _load_problem(a.problem, a.n)
        cfg = RunConfig(algorithm=a.alg, eps_pe=a.eps_pe, max_evals=a.max_evals, max_time=a.max_time,
                        max_iters=a.max_iters, workers=a.workers, storage=a.storage)
        res = run(spec, cfg)
    except (ProblemError, KeyError, ValueError, IncompatibleProblemError) as exc:
        raise UsageError(str(exc)) from exc
    if a.trace:
        export_trace(res, a.trace)
    x = "none" if res.x_min is None else " ".join(f"{v:.10g}" for v in res.x_min)
    f = res.f_min if math.isfinite(res.f_min) else float("nan")
    print(f"status={res.status} f_min={f:.12g} evals={res.evals} iters={res.iters} "
          f"time_s={res.elapsed:.3f} x=[{x}]")
    return 0 if res.solved else 2


def _bench(a) -> int:
    algs = [s.strip() for s in a.algs.split(",") if s.strip()]
    unknown = [s for s in algs if s not in ALGORITHMS]
    if not algs or unknown:
        raise UsageError(f"unknown algorithm(s): {unknown}" if unknown else "no algorithms given")
    try:
        cfg = RunConfig(max_evals=a.max_evals, max_time=a.max_time, workers=a.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    res = bench.run_suite(algs, bench.suite_problems(a.suite, a.max_n), cfg, jobs=a.jobs)
    bench.emit_csv(res.rows, a.out)
    text = bench.emit_report(res.rows, a.report)
    print(text)
    return 0


def _profile(a) -> int:
    try:
        rows = bench.read_csv(a.inp)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot read {a.inp}: {exc}") from exc
    prof = bench.perf_profile(bench.cost_matrix(rows, a.metric))
    bench.emit_profile_svg(prof, a.out, title=f"performance profile ({a.metric})")
    csv_path = a.csv or str(Path(a.out).with_suffix(".csv"))
    bench.emit_profile_csv(prof, csv_path)
    for s, name in enumerate(prof.solvers):
        print(f"{name}: wins={prof.chi[s, 0]:.3f} solved={prof.chi[s, -1]:.3f}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    a = _parser().parse_args(argv)
    try:
        return {"solve": _solve, "bench": _bench, "profile": _profile}[a.command](a)
    except UsageError as exc:
        print(f"directlab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
