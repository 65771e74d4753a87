"""The main loop, the algorithm catalog, local search and the parallel contract.

Every algorithm follows the same loop: select potentially optimal elements,
sample the new points their subdivision needs, then subdivide.  New points
do not depend on any value, so each iteration plans all of them first,
evaluates them as one batch (optionally on worker threads), scans the results
in order for the stopping rule and only then builds the children.  That makes
runs with any number of workers bit-identical to sequential ones.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import partition as P
from .constraints import (GlceState, HiddenConfig, glce_values, glh_values, nas_values, sub_step_due,
                          update_glce_state)
from .problems import ProblemSpec, evaluate_constraints, evaluate_objective, transform_equalities
from .selection import (SelectionContext, SelectionView, LevelState, gb_filter, gb_update, group_labels, level_step,
                        restart_epsilon_update, select_convex_hull, select_gl, select_group_extremes,
                        symmetric_discard, update_statistics)

__all__ = [
    "AlgorithmSpec",
    "RunConfig",
    "RunResult",
    "TraceRecord",
    "ParallelPlan",
    "IncompatibleProblemError",
    "CATALOG",
    "ALGORITHMS",
    "catalog",
    "run",
    "percent_error",
    "should_stop",
    "local_search",
    "balanced_split",
    "parallel_execute",
    "export_trace",
    "default_workers",
    "FAILURE_SENTINEL",
    "WORKERS_ENV",
]

FAILURE_SENTINEL = 2_000_000
WORKERS_ENV = "DIRECTLAB_WORKERS"


class IncompatibleProblemError(ValueError):
    """The algorithm cannot handle this problem's constraint class."""


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    partition: str = "trisect"  # trisect | bisect | adc | simplex
    axes: str = "all_longest"
    sampling: str = "midpoint"
    measure: str = "euclid_half_diagonal"
    selection: str = "hull"  # hull | aggressive | plor | gl | g | l
    per_group: str = "all_ties"
    scaling: str = "none"
    keep_collinear: bool = True
    epsilon: Optional[float] = 1e-4
    restart: bool = False
    epsilons: Optional[tuple] = None  # per level (2, 1, 0) for the W-cycle
    gb: bool = False
    symmetric: Optional[str] = None  # sym | sym2
    handler: str = "none"  # none | l1 | glc | glce | barrier | nas | glh
    sub_step: bool = False
    hybrid: str = "none"  # none | every | improve
    linear_cover: bool = False
    classes: frozenset = frozenset({"box"})
    aggregate: str = "min"
    parameters: tuple = ("epsilon",)

    @property
    def partitioning(self) -> str:
        return {"trisect": "n-dimensional trisection" if self.axes == "all_longest" else "1-dimensional trisection",
                "bisect": "1-dimensional bisection", "adc": "1-dimensional trisection",
                "simplex": "simplicial trisection"}[self.partition]


_BOX = frozenset({"box"})
_GENERAL = frozenset({"box", "linear", "nonlinear"})
_HIDDEN = frozenset({"box", "hidden"})
_NONE = ()


def _entries():
    A = AlgorithmSpec
    tri = dict(partition="trisect", sampling="midpoint")
    bis = dict(partition="bisect", sampling="two_diagonal_thirds")
    simc = dict(partition="simplex", sampling="simplex_center")
    simv = dict(partition="simplex", sampling="simplex_vertices")
    return [
        A("DIRECT", keep_collinear=False, **tri),
        A("DIRECT-restart", restart=True, epsilon=0.0, **tri),
        A("DIRECT-m", scaling="median", **tri),
        A("DIRECT-l", measure="longest_side", per_group="one_per_group", **tri),
        A("DIRECT-rev", axes="one_longest", per_group="one_per_group", hybrid="improve", **tri),
        A("DIRECT-a", scaling="average", **tri),
        A("DIRMIN", hybrid="every", **tri),
        A("PLOR", selection="plor", epsilon=None, parameters=_NONE, **tri),
        A("glbSolve", **tri),
        A("glbSolve-sym", symmetric="sym", **tri),
        A("glbSolve-sym2", symmetric="sym2", **tri),
        A("MrDIRECT", epsilons=(1e-4, 1e-4, 1e-4), **tri),
        A("MrDIRECT075", epsilons=(1e-5, 1e-7, 0.0), parameters=_NONE, **tri),
        A("BIRECT", **bis),
        A("GB-DISIMPL-C", gb=True, **simc),
        A("GB-DISIMPL-V", gb=True, **simv),
        A("Gb-BIRECT", gb=True, **bis),
        A("BIRMIN", gb=True, hybrid="improve", **bis),
        A("Gb-glbSolve", gb=True, **tri),
        A("DISIMPL-C", **simc),
        A("DISIMPL-V", **simv),
        A("ADC", partition="adc", sampling="two_diagonal_vertices", gb=True, aggregate="mean"),
        A("Aggressive DIRECT", selection="aggressive", epsilon=None, parameters=_NONE, **tri),
        A("DIRECT-G", selection="g", parameters=_NONE, **tri),
        A("DIRECT-L", selection="l", parameters=_NONE, **tri),
        A("DIRECT-GL", selection="gl", parameters=_NONE, **tri),
        A("Lc-DISIMPL-C", linear_cover=True, classes=frozenset({"box", "linear"}), **simc),
        A("Lc-DISIMPL-V", linear_cover=True, classes=frozenset({"box", "linear"}), **simv),
        A("DIRECT-L1", handler="l1", classes=_GENERAL, parameters=("epsilon", "gamma"), **tri),
        A("DIRECT-GLc", selection="gl", handler="glc", classes=_GENERAL, parameters=("eps_phi",), **tri),
        A("DIRECT-GLce", selection="gl", handler="glce", classes=_GENERAL, parameters=("eps_phi",), **tri),
        A("DIRECT-GLce-min", selection="gl", handler="glce", hybrid="improve", classes=_GENERAL,
          parameters=("eps_phi",), **tri),
        A("DIRECT-NAS", handler="nas", classes=_HIDDEN, **tri),
        A("DIRECT-Barrier", handler="barrier", classes=_HIDDEN, **tri),
        A("subDIRECT-Barrier", handler="barrier", sub_step=True, classes=_HIDDEN, **tri),
        A("DIRECT-GLh", selection="gl", handler="glh", classes=_HIDDEN, parameters=_NONE, **tri),
    ]


CATALOG: dict[str, AlgorithmSpec] = {a.name: a for a in _entries()}
ALGORITHMS = tuple(CATALOG)


def catalog(name: str) -> AlgorithmSpec:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown algorithm {name!r}") from None


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------

def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw is None or raw.strip() == "":
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
    return k


@dataclass(frozen=True)
class RunConfig:
    algorithm: str = "DIRECT"
    epsilon: Optional[float] = None
    eps_pe: float = 1e-2
    max_evals: int = FAILURE_SENTINEL
    max_time: Optional[float] = None
    max_iters: Optional[int] = None
    workers: Optional[int] = None
    storage: str = "static_pool"
    seedless: bool = True
    eps_phi: float = 1e-8
    eps_h: float = 1e-8
    gamma: float = 1e3
    hidden: HiddenConfig = field(default_factory=HiddenConfig)
    simplex_cap: int = 8

    def __post_init__(self):
        if self.max_evals is None or self.max_evals < 1:
            raise ValueError("max_evals must be positive")
        if self.max_time is not None and self.max_time <= 0:
            raise ValueError("max_time must be positive")
        if self.max_iters is not None and self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    @property
    def rho(self) -> int:
        return self.workers if self.workers is not None else default_workers()


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    evals: int
    f_min: float
    elapsed: float

    def key(self):
        """Everything except wall-clock time."""
        return (self.iteration, self.evals, self.f_min)


@dataclass
class RunResult:
    f_min: float
    x_min: Optional[np.ndarray]
    evals: int
    iters: int
    elapsed: float
    status: str
    trace: list
    algorithm: str = ""
    problem: str = ""

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    @property
    def bench_evals(self) -> int:
        """Evaluation count for benchmarking: failures are recorded as the 2e6 sentinel."""
        return self.evals if self.solved else FAILURE_SENTINEL

    def trace_keys(self):
        return [r.key() for r in self.trace]


def export_trace(result: RunResult, path) -> None:
    """Write one JSON record per trace entry: iteration, evals, f_min, elapsed_s."""
    with open(path, "w") as fh:
        for r in result.trace:
            f = r.f_min if math.isfinite(r.f_min) else None
            fh.write(json.dumps({"iteration": r.iteration, "evals": r.evals, "f_min": f,
                                 "elapsed_s": r.elapsed}) + "\n")


def percent_error(f: float, fstar: float) -> float:
    if fstar == 0:
        return 100.0 * f
    return 100.0 * (f - fstar) / abs(fstar)


@dataclass
class StopState:
    evals: int
    iters: int
    elapsed: float
    f_best: float
    fstar: Optional[float]


def should_stop(state: StopState, cfg: RunConfig) -> Optional[str]:
    if state.fstar is not None and math.isfinite(state.f_best):
        if percent_error(state.f_best, state.fstar) <= cfg.eps_pe:
            return "solved"
    if state.evals >= cfg.max_evals:
        return "budget_exceeded"
    if cfg.max_time is not None and state.elapsed >= cfg.max_time:
        return "time_exceeded"
    if cfg.max_iters is not None and state.iters >= cfg.max_iters:
        return "iter_capped"
    return None


# ---------------------------------------------------------------------------
# Parallel contract
# ---------------------------------------------------------------------------

def balanced_split(count: int, rho: int) -> list[np.ndarray]:
    """Contiguous index blocks whose sizes differ by at most one, larger blocks first."""
    if rho < 1:
        raise ValueError("rho must be at least 1")
    base, extra = divmod(count, rho)
    out, start = [], 0
    for w in range(rho):
        size = base + (1 if w < extra else 0)
        out.append(np.arange(start, start + size))
        start += size
    return out


@dataclass(frozen=True)
class ParallelPlan:
    rho: int
    split: tuple

    @classmethod
    def for_count(cls, count: int, rho: int) -> "ParallelPlan":
        return cls(rho, tuple(balanced_split(count, rho)))


def parallel_execute(plan: ParallelPlan, items: Sequence, body: Callable, executor=None) -> list:
    """Run ``body(share)`` for every worker share and concatenate results in worker order.

    A worker exception aborts the whole step and is re-raised with the worker index.
    """
    shares = [[items[i] for i in idx] for idx in plan.split]
    if executor is None or plan.rho == 1:
        results = []
        for w, share in enumerate(shares):
            results.append(_run_share(body, share, w))
    else:
        futures = [executor.submit(_run_share, body, share, w) for w, share in enumerate(shares)]
        results = [fu.result() for fu in futures]
    merged = []
    for part in results:
        merged.extend(part)
    return merged


def _run_share(body, share, w):
    if not share:
        return []
    try:
        return list(body(share))
    except Exception as exc:
        raise RuntimeError(f"worker {w} failed: {exc!r}") from exc


# ---------------------------------------------------------------------------
# Point table
# ---------------------------------------------------------------------------

class _Stop(Exception):
    def __init__(self, status):
        super().__init__(status)
        self.status = status


def _key(u: np.ndarray):
    return tuple(np.round(u, 13).tolist())


class PointTable:
    """Every evaluated point (unit coordinates) with its objective, violation and constraint values."""

    def __init__(self, n: int, ncons: int = 0, capacity: int = 1024):
        self.n, self.ncons = n, ncons
        self.size = 0
        self.u = np.empty((capacity, n))
        self.f = np.empty(capacity)
        self.phi = np.empty(capacity)
        self.cons = np.empty((capacity, ncons))
        self.index: dict = {}

    def _grow(self):
        cap = 2 * self.u.shape[0]
        for name in ("u", "f", "phi", "cons"):
            old = getattr(self, name)
            new = np.empty((cap,) + old.shape[1:])
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def lookup(self, u):
        return self.index.get(_key(u))

    def add(self, u, f, phi, cons=()) -> int:
        if self.size == self.u.shape[0]:
            self._grow()
        i = self.size
        self.u[i] = u
        self.f[i] = f
        self.phi[i] = phi
        if self.ncons:
            self.cons[i] = cons
        self.index[_key(u)] = i
        self.size += 1
        return i


# ---------------------------------------------------------------------------
# Local search
# ---------------------------------------------------------------------------

class _LSBudget(Exception):
    pass


def _compass_search(func, u0, f0, budget, step=0.05, min_step=1e-9):
    """Coordinate pattern search with step halving, kept inside the unit cube."""
    n = u0.size
    x, fx = u0.copy(), f0
    used = 0
    while step >= min_step and used < budget:
        moved = False
        for j in range(n):
            for s in (1.0, -1.0):
                y = x.copy()
                y[j] = min(1.0, max(0.0, y[j] + s * step))
                if y[j] == x[j]:
                    continue
                if used >= budget:
                    return x, fx, used
                fy, fresh = func(y)
                used += fresh
                if fy < fx:
                    x, fx, moved = y, fy, True
                    break
            if moved:
                break
        if not moved:
            step *= 0.5
    return x, fx, used


def _cobyla_search(func, cons_func, u0, budget, ncons):
    """Constrained local search with COBYLA; returns the best point by the merit ``func``."""
    from scipy.optimize import minimize

    best = {"x": u0.copy(), "f": func(u0)[0], "used": 0, "halt": None}
    # exceptions must not cross the Fortran callback boundary: latch them,
    # feed COBYLA a constant so it winds down, and re-raise afterwards

    def clip(u):
        return np.clip(np.asarray(u, float), 0.0, 1.0)

    def track(u):
        if best["halt"] is not None:
            return None
        u = clip(u)
        if best["used"] >= budget:
            best["halt"] = _LSBudget()
            return None
        try:
            val, fresh = func(u)
        except _Stop as exc:
            best["halt"] = exc
            return None
        best["used"] += fresh
        if val < best["f"]:
            best["x"], best["f"] = u.copy(), val
        return u

    def obj(u):
        u = track(u)
        if u is None:
            return 0.0
        f = cons_func(u)[0]
        return f if math.isfinite(f) else 1e30

    def cons(u):
        u = track(u)
        return np.zeros(ncons) if u is None else -np.asarray(cons_func(u)[1], float)

    minimize(obj, u0, method="COBYLA", constraints=[{"type": "ineq", "fun": cons}],
             bounds=[(0.0, 1.0)] * u0.size, options={"maxiter": max(budget, 1), "rhobeg": 0.1, "tol": 1e-10})
    if isinstance(best["halt"], _Stop):
        raise best["halt"]
    return best["x"], best["f"], best["used"]


def local_search(spec: ProblemSpec, x0, budget: int, gamma: float = 1e3, eps_h: float = 1e-8):
    """Budgeted bounded local minimization from ``x0`` (original coordinates).

    Box problems use a compass pattern search; constrained problems minimize
    the L1 merit ``f + gamma * phi`` with COBYLA and return the best merit point.
    Returns ``(x, value, evaluations used)``; the value is the merit.
    """
    x0 = np.asarray(x0, dtype=float)
    if budget <= 0:
        return x0.copy(), None, 0
    if spec.eq_constraints:
        spec = transform_equalities(spec, eps_h)
    view = P.UnitView(spec)
    cache: dict = {}

    def raw(u):
        k = _key(u)
        if k in cache:
            return cache[k], 0
        x = view.to_original(u)
        f = evaluate_objective(spec, x)
        g, _ = evaluate_constraints(spec, x)
        g = np.asarray(g, float)
        cache[k] = (f, g)
        return cache[k], 1

    def merit(u):
        (f, g), fresh = raw(u)
        v = f + gamma * float(np.sum(np.maximum(g, 0.0))) if math.isfinite(f) else math.inf
        return v, fresh

    def fc(u):
        (f, g), _ = raw(u)
        return f, g

    u0 = view.to_unit(x0)
    f0, used0 = merit(u0)
    if spec.ineq_constraints:
        u, fu, used = _cobyla_search(merit, fc, u0, budget - used0, spec.m)
    else:
        u, fu, used = _compass_search(merit, u0, f0, budget - used0)
    return view.to_original(u), fu, used + used0


# ---------------------------------------------------------------------------
# The run
# ---------------------------------------------------------------------------

class _Solver:
    def __init__(self, spec: ProblemSpec, cfg: RunConfig):
        self.alg = alg = catalog(cfg.algorithm)
        cls = spec.problem_class
        if cls not in alg.classes:
            raise IncompatibleProblemError(f"{alg.name} does not handle {cls} problems ({spec.name})")
        if alg.symmetric and "symmetric" not in spec.tags:
            raise IncompatibleProblemError(f"{alg.name} needs a problem symmetric under coordinate permutation")
        if alg.partition == "simplex" and not alg.linear_cover and spec.n > cfg.simplex_cap:
            raise IncompatibleProblemError(f"{alg.name}: n = {spec.n} exceeds the simplicial cap {cfg.simplex_cap}")
        if spec.eq_constraints and alg.linear_cover:
            raise IncompatibleProblemError(f"{alg.name} does not handle equality constraints")
        if spec.eq_constraints:
            spec = transform_equalities(spec, cfg.eps_h)
        self.spec, self.cfg = spec, cfg
        self.view = P.UnitView(spec)
        self.n = spec.n
        self.hidden = spec.is_hidden
        self.constrained = spec.is_constrained
        self.table = PointTable(self.n, spec.m)
        self.store = P.make_store(cfg.storage)
        eps = cfg.epsilon if cfg.epsilon is not None else (alg.epsilon or 0.0)
        self.ctx = SelectionContext(epsilon=eps)
        if alg.epsilons is not None:
            self.ctx.level_state = LevelState(epsilons=tuple(cfg.epsilon for _ in range(3))
                                              if cfg.epsilon is not None else alg.epsilons)
        self.glce = GlceState(eps_phi=cfg.eps_phi)
        self.kmax = self.n + 1 if alg.sampling == "simplex_vertices" else 2
        self.pidx = np.full((1024, self.kmax), -1, dtype=np.int64)
        self.nas_cache: dict[int, float] = {}
        self.rho = cfg.rho
        self.executor = ThreadPoolExecutor(max_workers=self.rho) if self.rho > 1 else None
        self.evals = 0
        self.iters = 0
        self.best_f = math.inf
        self.best_id: Optional[int] = None
        self.best_phi_id: Optional[int] = None
        self.trace: list[TraceRecord] = []
        self.t0 = time.monotonic()
        self.fstar = spec.known_fstar

    # -- evaluation -------------------------------------------------------

    def _feasible(self, f, phi) -> bool:
        if not math.isfinite(f):
            return False
        return (not self.constrained) or phi <= self.cfg.eps_phi

    def _evaluate(self, u):
        x = self.view.to_original(u)
        f = evaluate_objective(self.spec, x)
        if self.constrained:
            g, _ = evaluate_constraints(self.spec, x)
            g = np.asarray(g, float)
            return f, float(np.sum(np.maximum(g, 0.0))), g
        return f, 0.0, ()

    def _elapsed(self):
        return time.monotonic() - self.t0

    def _record_point(self, u, res, defer_stop=False) -> int:
        f, phi, cons = res
        i = self.table.add(u, f, phi, cons)
        self.evals += 1
        if self._feasible(f, phi) and f < self.best_f:
            self.best_f, self.best_id = f, i
        if self.constrained and (self.best_phi_id is None or phi < self.table.phi[self.best_phi_id]):
            self.best_phi_id = i
        if self.fstar is not None and math.isfinite(self.best_f) and \
                percent_error(self.best_f, self.fstar) <= self.cfg.eps_pe:
            if defer_stop:
                self._solved_pending = True
            else:
                raise _Stop("solved")
        return i

    def ensure_points(self, coords: Sequence[np.ndarray], owners: Optional[Sequence[int]] = None,
                      n_owners: int = 1) -> list[int]:
        """Table ids for ``coords``, evaluating the unseen ones as one ordered batch."""
        ids: list = [None] * len(coords)
        new_pos: dict = {}
        new_list: list = []
        for k, u in enumerate(coords):
            i = self.table.lookup(u)
            if i is not None:
                ids[k] = i
                continue
            key = _key(u)
            if key not in new_pos:
                new_pos[key] = len(new_list)
                new_list.append((k, u))
        if not new_list:
            return ids
        remaining = self.cfg.max_evals - self.evals
        truncated = len(new_list) > remaining
        batch = new_list[:remaining]
        if self.rho > 1 and len(batch) > 1:
            # split by owner element so each worker samples for its own share of the selected set
            owner_of = [owners[k] if owners is not None else t for t, (k, _) in enumerate(batch)]
            n_own = n_owners if owners is not None else len(batch)
            plan = ParallelPlan.for_count(n_own, self.rho)
            worker_of = np.empty(max(n_own, 1), dtype=np.int64)
            for w, idx in enumerate(plan.split):
                worker_of[idx] = w
            shares = [[] for _ in range(self.rho)]
            for t, o in enumerate(owner_of):
                shares[worker_of[o]].append(t)
            flat = [t for s in shares for t in s]
            sizes = [len(s) for s in shares]
            starts = np.concatenate([[0], np.cumsum(sizes)])
            item_plan = ParallelPlan(self.rho, tuple(np.arange(starts[w], starts[w + 1]) for w in range(self.rho)))
            results = parallel_execute(item_plan, [batch[t][1] for t in flat],
                                       lambda share: [self._evaluate(u) for u in share], self.executor)
            ordered = [None] * len(batch)
            for pos, t in enumerate(flat):
                ordered[t] = results[pos]
        else:
            ordered = [self._evaluate(u) for _, u in batch]
        # every point of the batch was sampled, so all of them are counted before stopping
        self._solved_pending = False
        for (k, u), res in zip(batch, ordered):
            ids[k] = self._record_point(u, res, defer_stop=True)
        if self._solved_pending:
            raise _Stop("solved")
        for k, u in enumerate(coords):
            if ids[k] is None:
                ids[k] = self.table.lookup(u)
        if truncated:
            raise _Stop("budget_exceeded")
        if self.cfg.max_time is not None and self._elapsed() >= self.cfg.max_time:
            raise _Stop("time_exceeded")
        return ids

    # -- values -------------------------------------------------------------

    def point_values(self) -> np.ndarray:
        t = self.table
        f, phi = t.f[: t.size], t.phi[: t.size]
        h = self.alg.handler
        if h == "none":
            if self.constrained:
                return f + self.cfg.gamma * phi
            return f
        if h == "l1":
            return f + self.cfg.gamma * phi
        if h in ("glc", "glce"):
            if not self.constrained:
                return f
            return glce_values(f, phi, self.glce, h)
        if h == "barrier":
            return np.where(np.isnan(f), self.cfg.hidden.barrier_value, f)
        if h == "nas":
            return f.copy()
        if h == "glh":
            out = f.copy()
            bad = np.isnan(f)
            if self.best_id is not None and np.any(bad):
                out[bad] = glh_values(t.u[: t.size][bad], self.best_f, t.u[self.best_id])
            return out
        raise ValueError(h)

    def element_values(self, ids: np.ndarray, pv: np.ndarray) -> np.ndarray:
        idx = self.pidx[ids]
        vals = np.where(idx >= 0, pv[np.maximum(idx, 0)], np.nan)
        if self.alg.aggregate == "mean":
            out = np.nanmean(vals, axis=1) if vals.size else np.zeros(0)
        else:
            # NaN samples (hidden failures) only count when no finite sample exists
            filled = np.where(np.isnan(vals), np.inf, vals)
            out = filled.min(axis=1) if vals.size else np.zeros(0)
            out[~np.isfinite(out) & np.all(np.isnan(vals), axis=1)] = np.nan
        if self.alg.handler == "nas":
            for k, e in enumerate(ids.tolist()):
                if e in self.nas_cache:
                    out[k] = self.nas_cache[e]
        return out

    # -- elements -----------------------------------------------------------

    def insert(self, elem) -> int:
        eid = self.store.insert(elem)
        if eid >= self.pidx.shape[0]:
            grown = np.full((2 * self.pidx.shape[0], self.kmax), -1, dtype=np.int64)
            grown[: self.pidx.shape[0]] = self.pidx
            self.pidx = grown
        ids = list(elem.point_ids)
        self.pidx[eid, : len(ids)] = ids
        if self.alg.handler == "none" and not self.constrained:
            v = self.table.f[ids]
            val = float(np.mean(v)) if self.alg.aggregate == "mean" else float(np.min(v))
            self.store.set_values([eid], [val])
        if self.alg.symmetric and isinstance(elem, P.HyperRect):
            if symmetric_discard(elem, strict=self.alg.symmetric == "sym"):
                self.store.set_excluded(eid, True)
        return eid

    def initialize(self):
        alg, n = self.alg, self.n
        if alg.partition == "simplex":
            if alg.linear_cover:
                simplices = P.feasible_cover_simplices(self.spec)
            else:
                simplices = P.initial_simplices(n, cap=self.cfg.simplex_cap)
            if alg.sampling == "simplex_center":
                pts = [s.vertices.mean(axis=0) for s in simplices]
                ids = self.ensure_points(pts)
                for s, p, i in zip(simplices, pts, ids):
                    s.samples, s.point_ids = p[None, :], (i,)
            else:
                pts = [v for s in simplices for v in s.vertices]
                ids = self.ensure_points(pts)
                for k, s in enumerate(simplices):
                    s.samples = s.vertices.copy()
                    s.point_ids = tuple(ids[k * (n + 1):(k + 1) * (n + 1)])
            for s in simplices:
                self.insert(s)
            return
        if alg.partition == "trisect":
            root = P.initial_rect(n, "midpoint", alg.measure)
        elif alg.partition == "bisect":
            root = P.initial_rect(n, "two_diagonal_thirds", alg.measure)
        else:
            root = P.initial_rect(n, "two_diagonal_vertices", alg.measure)
        ids = self.ensure_points(list(root.samples))
        root.point_ids = tuple(ids)
        root.values = tuple(float(self.table.f[i]) for i in ids)
        self.insert(root)

    def plan(self, elem):
        alg = self.alg
        if alg.partition == "trisect":
            axes, pts = P.trisect_plan(elem, alg.axes)
            return list(pts), axes
        if alg.partition == "bisect":
            _, pts = P.bisect_plan(elem)
            return list(pts), None
        if alg.partition == "adc":
            return list(P.adc_plan(elem)), None
        p1, p2, edge = P.simplex_new_points(elem)
        if alg.sampling == "simplex_vertices":
            return [p1, p2], edge
        children = P.subdivide_simplex(elem)
        return [children[0].vertices.mean(axis=0), children[2].vertices.mean(axis=0)], children

    def children(self, elem, planned, ids, pv):
        alg = self.alg
        if alg.partition == "trisect":
            axes = planned
            vals = pv[ids]
            return P.trisect_children(elem, axes, vals, ids, alg.measure)
        if alg.partition == "bisect":
            return P.bisect_children(elem, tuple(float(self.table.f[i]) for i in ids), tuple(ids), alg.measure)
        if alg.partition == "adc":
            return P.adc_children(elem, lambda p: (self.table.lookup(p), float(self.table.f[self.table.lookup(p)])),
                                  alg.measure)
        if alg.sampling == "simplex_vertices":
            kids = P.subdivide_simplex(elem)
            a, b = planned
            for c, kid in enumerate(kids):
                pid = list(elem.point_ids)
                if c == 0:
                    pid[b] = ids[0]
                elif c == 1:
                    pid[a], pid[b] = ids[0], ids[1]
                else:
                    pid[a] = ids[1]
                kid.samples = kid.vertices.copy()
                kid.point_ids = tuple(pid)
            return kids
        kids = planned
        kids[0].samples, kids[0].point_ids = kids[0].vertices.mean(axis=0)[None, :], (ids[0],)
        kids[1].samples, kids[1].point_ids = elem.samples.copy(), elem.point_ids
        kids[2].samples, kids[2].point_ids = kids[2].vertices.mean(axis=0)[None, :], (ids[1],)
        return kids

    def update_nas(self, new_ids: Sequence[int]):
        if self.alg.handler != "nas":
            return
        t = self.table
        fvals = t.f[: t.size]
        feas = ~np.isnan(fvals)
        fmax = float(np.max(fvals[feas])) if np.any(feas) else 0.0
        # feasible samples that are element centers
        ids_alive, _, _, _ = self.store.snapshot()
        center_ids = self.pidx[ids_alive, 0]
        cf = center_ids[feas[center_ids]]
        todo = [e for e in new_ids if np.isnan(fvals[self.pidx[e, 0]])]
        if not todo:
            return
        rects = [self.store.get(e) for e in todo]
        centers = np.array([r.samples[0] for r in rects])
        halves = np.array([0.5 * (r.hi - r.lo) for r in rects])
        vals = nas_values(centers, halves, t.u[cf], fvals[cf], fmax, self.cfg.hidden)
        for e, v in zip(todo, vals):
            self.nas_cache[e] = float(v)

    # -- local search -------------------------------------------------------

    def local_search_from(self, u0, budget):
        budget = min(budget, self.cfg.max_evals - self.evals)
        if budget <= 0:
            return
        gamma = self.cfg.gamma

        def merit(u):
            before = self.evals
            i = self.ensure_points([np.asarray(u, float)])[0]
            f, phi = self.table.f[i], self.table.phi[i]
            v = f + gamma * phi if math.isfinite(f) else math.inf
            return v, self.evals - before

        def fc(u):
            i = self.table.lookup(np.asarray(u, float))
            return self.table.f[i], self.table.cons[i]

        u0 = np.asarray(u0, float)
        f0, used0 = merit(u0)
        if self.constrained:
            _cobyla_search(merit, fc, u0, budget - used0, self.spec.m)
        else:
            _compass_search(merit, u0, f0, budget - used0)

    def incumbent_point(self):
        if self.best_id is not None:
            return self.table.u[self.best_id]
        if self.best_phi_id is not None:
            return self.table.u[self.best_phi_id]
        return None

    def merit_key(self):
        if self.best_id is not None:
            return (0, self.best_f)
        if self.best_phi_id is not None:
            return (1, float(self.table.phi[self.best_phi_id]))
        return (2, 0.0)

    # -- main loop ------------------------------------------------------------

    def trace_point(self):
        self.trace.append(TraceRecord(self.iters, self.evals, self.best_f, self._elapsed()))

    def iterate(self):
        alg, ctx = self.alg, self.ctx
        ids, deltas, vals, excl, gid = self.store.snapshot_groups()
        if alg.handler != "none" or self.constrained:
            pv = self.point_values()
            vals = self.element_values(ids, pv)
            self.store.set_values(ids, vals)
            finite_pv = np.where(np.isnan(pv), np.inf, pv)
            bi = int(np.argmin(finite_pv)) if pv.size else 0
            new_best = float(finite_pv[bi]) if pv.size else math.inf
        else:
            # plain box problem: point values are the objective, tracked incrementally
            bi = self.best_id if self.best_id is not None else 0
            new_best = self.best_f
        keep = ~excl
        view = SelectionView(ids[keep], deltas[keep], vals[keep], gid=gid[keep], greps=self.store.group_reps())
        improved = new_best < ctx.f_best
        if self.iters > 1:
            if alg.restart:
                restart_epsilon_update(ctx, improved)
            if alg.gb:
                fv = np.where(np.isnan(view.f), np.inf, view.f)
                inc_delta = float(view.delta[np.lexsort((view.ids, fv))[0]]) if len(view) else 0.0
                gb_update(ctx, improved, inc_delta)
        ctx.f_best = new_best
        ctx.x_best = self.table.u[bi].copy() if self.table.size else None
        if alg.scaling != "none":
            update_statistics(ctx, view.f)

        sel_view = view
        eps = ctx.epsilon
        if alg.gb:
            sel_view = gb_filter(sel_view, ctx)
        if alg.epsilons is not None:
            _, sel_view, eps = level_step(sel_view, ctx)
        if alg.selection in ("gl", "g", "l"):
            xb = ctx.x_best
            if alg.handler == "glh" and self.best_id is not None:
                xb = self.table.u[self.best_id]
            if xb is not None:
                idx = self.pidx[sel_view.ids]
                pts = self.table.u[np.maximum(idx, 0)]
                d = np.linalg.norm(pts - xb, axis=2)
                d[idx < 0] = np.inf
                sel_view.dist = d.min(axis=1)
            else:
                sel_view.dist = np.zeros(len(sel_view))

        if alg.handler == "glh" and self.best_id is None:
            # nothing feasible yet: explore every element of the largest measure group
            reps, labels = group_labels(sel_view)
            poh = sel_view.ids[labels == reps.size - 1].tolist()
        elif alg.selection == "hull":
            poh = select_convex_hull(sel_view, ctx, alg.scaling, alg.per_group, alg.keep_collinear, eps)
        elif alg.selection in ("aggressive", "plor"):
            poh = select_group_extremes(sel_view, alg.selection)
        else:
            poh = select_gl(sel_view, ctx, {"gl": "GL", "g": "G", "l": "L"}[alg.selection])
        if alg.sub_step and sub_step_due(self.iters, self.cfg.hidden.sub_base):
            fcent = self.table.f[self.pidx[view.ids, 0]]
            extra = view.ids[np.isnan(fcent)].tolist()
            seen = set(poh)
            poh = poh + [e for e in extra if e not in seen]
        poh = sorted(set(poh))

        if alg.hybrid == "every":
            for e in poh:
                elem = self.store.get(e)
                self.local_search_from(elem.samples[0], 100 * self.n)

        before = self.merit_key()
        # sampling: plan every new point, then evaluate the batch in order
        plans = [self.plan(self.store.get(e)) for e in poh]
        coords, owners, slices = [], [], []
        for k, (pts, _) in enumerate(plans):
            slices.append((len(coords), len(coords) + len(pts)))
            coords.extend(pts)
            owners.extend([k] * len(pts))
        all_ids = self.ensure_points(coords, owners, len(poh))
        pv = self.point_values()

        # subdivision: each worker builds the children of its share; merged in share order
        def body(share):
            out = []
            for k in share:
                a, b = slices[k]
                out.append(self.children(self.store.get(poh[k]), plans[k][1], all_ids[a:b], pv))
            return out

        plan = ParallelPlan.for_count(len(poh), self.rho)
        kids_all = parallel_execute(plan, list(range(len(poh))), body, self.executor)
        new_ids = []
        for e, kids in zip(poh, kids_all):
            self.store.remove(e)
            for kid in kids:
                new_ids.append(self.insert(kid))
        if self.constrained:
            update_glce_state(self.glce, self.table.f[: self.table.size], self.table.phi[: self.table.size])
        self.update_nas(new_ids)
        if alg.hybrid == "improve" and self.merit_key() < before:
            u = self.incumbent_point()
            if u is not None:
                self.local_search_from(u, 1000 * self.n)
                if self.constrained:
                    update_glce_state(self.glce, self.table.f[: self.table.size],
                                      self.table.phi[: self.table.size])

    def run(self) -> RunResult:
        status = None
        try:
            try:
                self.initialize()
                if self.constrained:
                    update_glce_state(self.glce, self.table.f[: self.table.size], self.table.phi[: self.table.size])
                ids_alive = self.store.ids()
                self.update_nas(ids_alive.tolist())
                self.trace_point()
                if self.alg.hybrid == "improve" and self.incumbent_point() is not None:
                    self.local_search_from(self.incumbent_point(), 1000 * self.n)
                    self.trace[-1] = TraceRecord(0, self.evals, self.best_f, self._elapsed())
                while True:
                    status = should_stop(StopState(self.evals, self.iters, self._elapsed(), self.best_f, None),
                                         self.cfg)
                    if status:
                        break
                    self.iters += 1
                    self.iterate()
                    self.trace_point()
            except _Stop as stop:
                status = stop.status
                if not self.trace or self.trace[-1].evals != self.evals or self.trace[-1].f_min != self.best_f:
                    self.trace.append(TraceRecord(self.iters, self.evals, self.best_f, self._elapsed()))
        finally:
            if self.executor is not None:
                self.executor.shutdown(wait=True)
        x = self.view.to_original(self.table.u[self.best_id]) if self.best_id is not None else None
        return RunResult(f_min=self.best_f, x_min=x, evals=self.evals, iters=self.iters, elapsed=self._elapsed(),
                         status=status, trace=self.trace, algorithm=self.alg.name, problem=self.spec.name)


def run(spec: ProblemSpec, cfg: RunConfig) -> RunResult:
    """Minimize ``spec`` with the catalog algorithm named in ``cfg``."""
    return _Solver(spec, cfg).run()
