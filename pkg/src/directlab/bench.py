"""Benchmark harness: algorithm x problem suites, aggregate reports and performance profiles.

Failed runs (budget or time exhausted) enter the cost matrix as the
2e6-evaluation sentinel; they receive an infinite performance ratio, so they
never count towards a profile curve.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .problems import ProblemSpec, list_problems, lookup_problem
from .solve import FAILURE_SENTINEL, IncompatibleProblemError, RunConfig, RunResult, run

__all__ = [
    "RunRow",
    "CostMatrix",
    "ProfileData",
    "SuiteResult",
    "suite_problems",
    "run_suite",
    "cost_matrix",
    "perf_profile",
    "aggregate",
    "emit",
    "emit_csv",
    "read_csv",
    "emit_report",
    "emit_profile_csv",
    "emit_profile_svg",
    "CSV_FIELDS",
    "NOT_APPLICABLE",
]

CSV_FIELDS = ("problem", "algorithm", "n", "class", "status", "fevals", "iters", "time_s", "f_min")
NOT_APPLICABLE = "n/a"
WINNER_TOL = 1e-12


@dataclass(frozen=True)
class RunRow:
    problem: str
    algorithm: str
    n: int
    cls: str
    status: str
    fevals: int
    iters: int
    time_s: float
    f_min: float

    @property
    def applicable(self) -> bool:
        return self.status != NOT_APPLICABLE

    @property
    def solved(self) -> bool:
        return self.status == "solved"


@dataclass
class CostMatrix:
    """Cost ``t[s, p]`` of solver ``s`` on problem ``p``; NaN marks a not-applicable pair."""

    solvers: list
    problems: list
    t: np.ndarray

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        if self.t.shape != (len(self.solvers), len(self.problems)):
            raise ValueError("cost matrix shape does not match solver/problem lists")
        finite = self.t[~np.isnan(self.t)]
        if np.any(finite <= 0):
            raise ValueError("costs must be positive")


@dataclass
class ProfileData:
    solvers: list
    ratios: np.ndarray  # (solvers, problems); inf for failures
    beta: np.ndarray
    chi: np.ndarray  # (solvers, len(beta))

    def chi_at(self, solver, beta: float) -> float:
        s = self.solvers.index(solver) if not isinstance(solver, int) else solver
        return _chi(self.ratios[s], np.array([beta]))[0]


@dataclass
class SuiteResult:
    rows: list
    results: dict = field(default_factory=dict)

    def matrix(self, metric: str = "fevals") -> CostMatrix:
        return cost_matrix(self.rows, metric)


def suite_problems(suite: str, max_n: Optional[int] = None) -> list[ProblemSpec]:
    kinds = {"box": "box", "linear": "linear", "nonlinear": "nonlinear", "hidden": "hidden",
             "engineering": "engineering"}
    if suite not in kinds:
        raise ValueError(f"unknown suite {suite!r}")
    return list_problems(kinds[suite], max_n=max_n)


def _row(spec: ProblemSpec, alg: str, res: Optional[RunResult]) -> RunRow:
    if res is None:
        return RunRow(spec.name, alg, spec.n, spec.problem_class, NOT_APPLICABLE, 0, 0, 0.0, math.nan)
    return RunRow(spec.name, alg, spec.n, spec.problem_class, res.status, res.bench_evals, res.iters,
                  res.elapsed, res.f_min)


def run_suite(algorithms: Sequence[str], problems: Sequence, cfg: RunConfig = RunConfig(), jobs: int = 1,
              ) -> SuiteResult:
    """Run every algorithm on every problem; incompatible pairs are recorded as not applicable.

    Errors raised by a run are recorded as failures rather than aborting the suite.
    """
    specs = [lookup_problem(p) if isinstance(p, str) else p for p in problems]
    pairs = [(a, s) for a in algorithms for s in specs]

    def one(pair):
        alg, spec = pair
        try:
            return run(spec, replace(cfg, algorithm=alg))
        except IncompatibleProblemError:
            return None
        except Exception as exc:  # recorded, not raised
            return RunResult(math.inf, None, FAILURE_SENTINEL, 0, 0.0, f"error: {type(exc).__name__}", [],
                             alg, spec.name)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            outs = list(ex.map(one, pairs))
    else:
        outs = [one(p) for p in pairs]
    rows, results = [], {}
    for (alg, spec), res in zip(pairs, outs):
        rows.append(_row(spec, alg, res))
        if res is not None:
            results[(alg, spec.name)] = res
    return SuiteResult(rows, results)


def cost_matrix(rows: Iterable[RunRow], metric: str = "fevals") -> CostMatrix:
    """Cost matrix from result rows; failures cost the sentinel (time failures too)."""
    rows = list(rows)
    solvers = list(dict.fromkeys(r.algorithm for r in rows))
    problems = list(dict.fromkeys(r.problem for r in rows))
    t = np.full((len(solvers), len(problems)), np.nan)
    for r in rows:
        if not r.applicable:
            continue
        if metric == "fevals":
            v = float(r.fevals) if r.solved else float(FAILURE_SENTINEL)
        elif metric == "time":
            v = max(r.time_s, 1e-9) if r.solved else float(FAILURE_SENTINEL)
        else:
            raise ValueError(f"unknown metric {metric!r}")
        t[solvers.index(r.algorithm), problems.index(r.problem)] = v
    return CostMatrix(solvers, problems, t)


def _chi(ratios: np.ndarray, beta: np.ndarray) -> np.ndarray:
    r = np.asarray(ratios, dtype=float)
    if r.size == 0:
        return np.zeros_like(beta, dtype=float)
    return np.array([np.count_nonzero(r <= b * (1 + WINNER_TOL)) / r.size for b in beta])


def perf_profile(m: CostMatrix, beta=None, failure_value: float = FAILURE_SENTINEL) -> ProfileData:
    """Performance ratios against the best solver per problem and their cumulative curves.

    ``beta`` defaults to 200 log-spaced points on ``[1, 1e4]``.  Entries equal
    to ``failure_value`` and not-applicable (NaN) entries get ratio ``inf``.
    """
    if beta is None:
        beta = np.logspace(0, 4, 200)
    beta = np.asarray(beta, dtype=float)
    t = np.array(m.t, dtype=float)
    bad = np.isnan(t) | (t >= failure_value)
    t = np.where(bad, np.inf, t)
    best = t.min(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        ratios = np.where(np.isfinite(t) & np.isfinite(best), t / best, np.inf)
    chi = np.vstack([_chi(ratios[s], beta) for s in range(len(m.solvers))]) if m.solvers else np.zeros((0, beta.size))
    return ProfileData(list(m.solvers), ratios, beta, chi)


# ---------------------------------------------------------------------------
# Aggregates
# ---------------------------------------------------------------------------

def _stats(rows: list[RunRow]) -> dict:
    app = [r for r in rows if r.applicable]
    if not app:
        return {"failed": "N/A", "avg_fevals": math.nan, "med_fevals": math.nan, "avg_time": math.nan,
                "med_time": math.nan, "avg_iters": math.nan, "med_iters": math.nan, "runs": 0}
    fe = np.array([r.fevals for r in app], dtype=float)
    tt = np.array([r.time_s for r in app], dtype=float)
    it = np.array([r.iters for r in app], dtype=float)
    failed = sum(not r.solved for r in app)
    return {"failed": f"{failed}/{len(app)}", "avg_fevals": float(fe.mean()), "med_fevals": float(np.median(fe)),
            "avg_time": float(tt.mean()), "med_time": float(np.median(tt)), "avg_iters": float(it.mean()),
            "med_iters": float(np.median(it)), "runs": len(app)}


SUBCLASSES = {
    "all": lambda r: True,
    "n<=4": lambda r: r.n <= 4,
    "n>=5": lambda r: r.n >= 5,
    "linear": lambda r: r.cls == "linear",
    "nonlinear": lambda r: r.cls == "nonlinear",
}


def aggregate(rows: Iterable[RunRow]) -> dict:
    """Per algorithm and subclass: failure count plus average/median evaluations, time and iterations.

    Medians and averages include failed runs at the sentinel cost.
    """
    rows = list(rows)
    out = {}
    for alg in dict.fromkeys(r.algorithm for r in rows):
        mine = [r for r in rows if r.algorithm == alg]
        out[alg] = {name: _stats([r for r in mine if pred(r)]) for name, pred in SUBCLASSES.items()}
    return out


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _fmt_float(v: float) -> str:
    return repr(float(v))


def emit_csv(rows: Iterable[RunRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_FIELDS)
        for r in rows:
            w.writerow([r.problem, r.algorithm, r.n, r.cls, r.status, r.fevals, r.iters, _fmt_float(r.time_s),
                        _fmt_float(r.f_min)])


def read_csv(path) -> list[RunRow]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or tuple(rd.fieldnames) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {rd.fieldnames}")
        return [RunRow(d["problem"], d["algorithm"], int(d["n"]), d["class"], d["status"], int(d["fevals"]),
                       int(d["iters"]), float(d["time_s"]), float(d["f_min"])) for d in rd]


def emit_report(rows: Iterable[RunRow], path=None) -> str:
    """Plain-text aggregate tables, one block per subclass with at least one applicable run."""
    agg = aggregate(rows)
    lines = []
    for sub in SUBCLASSES:
        block = [(alg, st[sub]) for alg, st in agg.items() if st[sub]["runs"]]
        if not block:
            continue
        lines.append(f"== {sub} ==")
        lines.append(f"{'algorithm':<20} {'Failed':>8} {'avg fevals':>12} {'med fevals':>12} "
                     f"{'avg time':>10} {'med time':>10} {'avg iters':>10} {'med iters':>10}")
        for alg, st in block:
            lines.append(f"{alg:<20} {st['failed']:>8} {st['avg_fevals']:>12.1f} {st['med_fevals']:>12.1f} "
                         f"{st['avg_time']:>10.3f} {st['med_time']:>10.3f} {st['avg_iters']:>10.1f} "
                         f"{st['med_iters']:>10.1f}")
        lines.append("")
    text = "\n".join(lines)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def emit_profile_csv(prof: ProfileData, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["beta"] + list(prof.solvers))
        for k, b in enumerate(prof.beta):
            w.writerow([_fmt_float(b)] + [_fmt_float(prof.chi[s, k]) for s in range(len(prof.solvers))])


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf")


def emit_profile_svg(prof: ProfileData, path, width: int = 640, height: int = 400, title: str = "") -> None:
    """Step curves of chi over a log10 beta axis."""
    ml, mr, mt, mb = 60, 170, 30, 50
    pw, ph = width - ml - mr, height - mt - mb
    lo, hi = math.log10(prof.beta[0]), math.log10(prof.beta[-1])
    span = hi - lo if hi > lo else 1.0

    def X(b):
        return ml + (math.log10(b) - lo) / span * pw

    def Y(c):
        return mt + (1.0 - c) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for d in range(int(math.floor(lo)), int(math.ceil(hi)) + 1):
        x = X(10.0 ** d)
        out.append(f'<line x1="{x:.2f}" y1="{mt + ph}" x2="{x:.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{mt + ph + 18}" text-anchor="middle">10^{d}</text>')
    for c in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = Y(c)
        out.append(f'<line x1="{ml - 5}" y1="{y:.2f}" x2="{ml}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{y + 4:.2f}" text-anchor="end">{c:g}</text>')
    out.append(f'<text x="{ml + pw / 2}" y="{height - 10}" text-anchor="middle">beta</text>')
    out.append(f'<text x="15" y="{mt + ph / 2}" transform="rotate(-90 15 {mt + ph / 2})" '
               f'text-anchor="middle">chi(beta)</text>')
    if title:
        out.append(f'<text x="{ml + pw / 2}" y="18" text-anchor="middle">{title}</text>')
    for s, name in enumerate(prof.solvers):
        color = _COLORS[s % len(_COLORS)]
        pts = []
        prev = None
        for b, c in zip(prof.beta, prof.chi[s]):
            if prev is not None and c != prev:
                pts.append(f"{X(b):.2f},{Y(prev):.2f}")
            pts.append(f"{X(b):.2f},{Y(c):.2f}")
            prev = c
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{" ".join(pts)}"/>')
        ly = mt + 15 + 18 * s
        out.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 30}" y2="{ly}" stroke="{color}" '
                   f'stroke-width="2"/>')
        out.append(f'<text x="{ml + pw + 35}" y="{ly + 4}">{_xml(name)}</text>')
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


def _xml(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def emit(results, fmt: str, path) -> None:
    """Write ``results`` (rows or a :class:`ProfileData`) as csv, report or profile_svg."""
    if fmt == "csv":
        emit_csv(results.rows if isinstance(results, SuiteResult) else results, path)
    elif fmt == "report":
        emit_report(results.rows if isinstance(results, SuiteResult) else results, path)
    elif fmt == "profile_svg":
        prof = results if isinstance(results, ProfileData) else perf_profile(
            cost_matrix(results.rows if isinstance(results, SuiteResult) else results))
        emit_profile_svg(prof, path)
    else:
        raise ValueError(f"unknown format {fmt!r}")
