"""Selection of potentially optimal elements and the per-iteration strategy state.

Selectors work on a :class:`SelectionView`: parallel arrays of element ids,
measures and values (plus optional distances to the incumbent).  A view can be
taken from a :class:`~directlab.partition.PartitionStore` with :func:`as_view`;
excluded (discarded) elements never appear in it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .partition import PartitionStore, measure_groups

__all__ = [
    "SelectionView",
    "SelectionContext",
    "RestartState",
    "LevelState",
    "GbState",
    "as_view",
    "update_statistics",
    "select_convex_hull",
    "select_group_extremes",
    "select_gl",
    "level_step",
    "restart_epsilon_update",
    "gb_filter",
    "gb_update",
    "group_labels",
    "symmetric_discard",
    "W_CYCLE",
]

W_CYCLE = "21011012"


@dataclass
class SelectionView:
    ids: np.ndarray
    delta: np.ndarray
    f: np.ndarray
    dist: Optional[np.ndarray] = None
    # optional precomputed grouping: group id per element and the measure of every group id
    gid: Optional[np.ndarray] = None
    greps: Optional[np.ndarray] = None

    def __post_init__(self):
        self.ids = np.asarray(self.ids, dtype=np.int64)
        self.delta = np.asarray(self.delta, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        if self.dist is not None:
            self.dist = np.asarray(self.dist, dtype=float)

    def __len__(self):
        return self.ids.size

    def subset(self, mask) -> "SelectionView":
        mask = np.asarray(mask)
        return SelectionView(self.ids[mask], self.delta[mask], self.f[mask],
                             None if self.dist is None else self.dist[mask],
                             None if self.gid is None else self.gid[mask], self.greps)


@dataclass
class RestartState:
    epsilon: float = 0.0
    counter: int = 0


@dataclass
class LevelState:
    position: int = 0
    epsilons: tuple = (1e-4, 1e-4, 1e-4)  # for levels (2, 1, 0)


@dataclass
class GbState:
    phase: str = "usual"
    counter: int = 0
    delta_gb: float = 0.0
    refinements: int = 10
    factor: float = 4.0


@dataclass
class SelectionContext:
    epsilon: float = 1e-4
    f_best: float = math.inf
    x_best: Optional[np.ndarray] = None
    f_median: float = 0.0
    f_average: float = 0.0
    restart_state: RestartState = field(default_factory=RestartState)
    level_state: LevelState = field(default_factory=LevelState)
    gb_state: GbState = field(default_factory=GbState)


def as_view(store_or_view, ctx: Optional[SelectionContext] = None, with_dist: bool = False) -> SelectionView:
    if isinstance(store_or_view, SelectionView):
        view = store_or_view
    else:
        store: PartitionStore = store_or_view
        ids, deltas, values, excl, gid = store.snapshot_groups()
        keep = ~excl
        view = SelectionView(ids[keep], deltas[keep], values[keep], gid=gid[keep], greps=store.group_reps())
        if with_dist and ctx is not None and ctx.x_best is not None:
            xb = np.asarray(ctx.x_best, float)
            view.dist = np.array([np.min(np.linalg.norm(store.get(i).samples - xb, axis=1)) for i in view.ids])
    return view


def update_statistics(ctx: SelectionContext, values) -> None:
    """Refresh ``f_median``/``f_average`` from all finite sampled values."""
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size:
        ctx.f_median = float(np.median(v))
        ctx.f_average = float(np.mean(v))


def _labels_from_gid(gid, greps):
    present = np.zeros(greps.size, dtype=bool)
    present[gid] = True
    pg = np.flatnonzero(present)
    order = pg[np.argsort(greps[pg], kind="stable")]
    label_of = np.empty(greps.size, dtype=np.int64)
    label_of[order] = np.arange(order.size)
    return greps[order], label_of[gid]


def group_labels(view: SelectionView):
    """``(ascending group measures, group label per element)`` of a view."""
    if view.gid is not None and view.greps is not None:
        return _labels_from_gid(view.gid, view.greps)
    return measure_groups(view.delta)


def _group_minima(view: SelectionView):
    """Per measure group: representative measure, min value, and member masks."""
    if view.gid is not None and view.greps is not None:
        reps, labels = _labels_from_gid(view.gid, view.greps)
    else:
        reps, labels = measure_groups(view.delta)
    f = np.where(np.isnan(view.f), np.inf, view.f)
    gmin = np.full(reps.size, np.inf)
    np.minimum.at(gmin, labels, f)
    return reps, labels, gmin, f


def _pick(view, labels, f, g, gmin, per_group):
    members = np.flatnonzero((labels == g) & (f == gmin[g]))
    if members.size == 0:  # whole group has no finite value
        members = np.flatnonzero(labels == g)
    members = members[np.argsort(view.ids[members], kind="stable")]
    if per_group == "one_per_group":
        members = members[:1]
    return view.ids[members].tolist()


def _eps_threshold(ctx: SelectionContext, scaling: str, epsilon: float) -> float:
    fb = ctx.f_best
    if scaling == "none":
        return fb - epsilon * abs(fb)
    if scaling == "median":
        return fb - epsilon * abs(fb - ctx.f_median)
    if scaling == "average":
        return fb - epsilon * abs(fb - ctx.f_average)
    raise ValueError(f"unknown scaling {scaling!r}")


def select_convex_hull(store, ctx: SelectionContext, scaling: str = "none", per_group: str = "all_ties",
                       keep_collinear: bool = True, epsilon: Optional[float] = None) -> list[int]:
    """Potentially optimal elements: lower-right hull of group minima plus the epsilon cut.

    The hull is scanned over ``(measure, group minimum)`` points with measure
    at least that of the best point.  Points lying on a hull edge satisfy the
    definition with the edge slope as rate of change, so they are kept unless
    ``keep_collinear`` is off.  The epsilon test uses, for each hull point, the
    largest admissible rate of change (slope to the next hull point).
    """
    view = as_view(store)
    if len(view) == 0:
        return []
    eps = ctx.epsilon if epsilon is None else epsilon
    reps, labels, gmin, f = _group_minima(view)
    finite = np.isfinite(gmin)
    if not np.any(finite):
        # nothing comparable: fall back to the largest group
        return _pick(view, labels, f, reps.size - 1, gmin, per_group)
    fmin = gmin[finite].min()
    start = int(np.flatnonzero(gmin == fmin)[-1])
    hull: list[int] = []
    for g in range(start, reps.size):
        if not np.isfinite(gmin[g]):
            continue
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            cross = (reps[a] - reps[o]) * (gmin[g] - gmin[o]) - (gmin[a] - gmin[o]) * (reps[g] - reps[o])
            if cross < 0 or (cross == 0 and not keep_collinear):
                hull.pop()
            else:
                break
        hull.append(g)
    threshold = _eps_threshold(ctx, scaling, eps)
    chosen = []
    for k, g in enumerate(hull):
        if k + 1 < len(hull):
            nxt = hull[k + 1]
            slope = (gmin[nxt] - gmin[g]) / (reps[nxt] - reps[g])
            if gmin[g] - slope * reps[g] > threshold:
                continue
        chosen.extend(_pick(view, labels, f, g, gmin, per_group))
    return chosen


def select_group_extremes(store, mode: str = "aggressive") -> list[int]:
    """Group minimum of every measure group (aggressive) or of the largest and smallest only (plor)."""
    view = as_view(store)
    if len(view) == 0:
        return []
    reps, labels, gmin, f = _group_minima(view)
    if mode == "aggressive":
        groups = range(reps.size - 1, -1, -1)
    elif mode == "plor":
        groups = [reps.size - 1] if reps.size == 1 else [reps.size - 1, 0]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    out = []
    for g in groups:
        out.extend(_pick(view, labels, f, g, gmin, "one_per_group"))
    return out


def select_gl(store, ctx: SelectionContext, parts: str = "GL") -> list[int]:
    """Union of the global (G) and local (L) group scans.

    Starting at the incumbent element's measure and moving to larger groups,
    G takes each group's lowest value and L the element closest to ``x_best``.
    ``parts`` restricts the result to ``"G"`` or ``"L"``.
    """
    view = as_view(store, ctx, with_dist="L" in parts)
    if len(view) == 0:
        return []
    reps, labels, gmin, f = _group_minima(view)
    order = np.lexsort((view.ids, f))
    inc = order[0]
    g0 = labels[inc]
    dist = view.dist
    if dist is None:
        if "L" in parts:
            if ctx.x_best is None:
                raise ValueError("the L scan needs x_best or precomputed distances")
        dist = np.zeros(len(view))
    chosen: dict[int, float] = {}
    for g in range(g0, reps.size):
        members = np.flatnonzero(labels == g)
        if "G" in parts:
            best = members[np.lexsort((view.ids[members], f[members]))[0]]
            chosen[int(view.ids[best])] = reps[g]
        if "L" in parts:
            near = members[np.lexsort((view.ids[members], dist[members]))[0]]
            chosen[int(view.ids[near])] = reps[g]
    return sorted(chosen, key=lambda i: (-chosen[i], i))


def level_step(store, ctx: SelectionContext):
    """Advance the W-cycle and return ``(level, view, epsilon)`` for this iteration."""
    st = ctx.level_state
    level = int(W_CYCLE[st.position % len(W_CYCLE)])
    st.position = (st.position + 1) % len(W_CYCLE)
    view = as_view(store)
    eps = st.epsilons[2 - level]
    if level == 2 or len(view) == 0:
        return level, view, eps
    reps, labels, _, f = _group_minima(view)
    top = np.flatnonzero(labels == reps.size - 1)
    n_drop = math.ceil(0.1 * top.size)
    # worst first: descending value, larger id first among ties
    worst = top[np.lexsort((-view.ids[top], -f[top]))][:n_drop]
    keep = np.ones(len(view), dtype=bool)
    keep[worst] = False
    if not np.any(keep):
        keep[:] = True
    view = view.subset(keep)
    if level == 1:
        return level, view, eps
    n_best = math.ceil(0.1 * len(view))
    best = np.lexsort((view.ids, np.where(np.isnan(view.f), np.inf, view.f)))[:n_best]
    mask = np.zeros(len(view), dtype=bool)
    mask[best] = True
    return level, view.subset(mask), eps


def restart_epsilon_update(ctx: SelectionContext, improved: bool) -> float:
    st = ctx.restart_state
    if improved:
        st.counter = 0
    else:
        st.counter += 1
    st.epsilon = 0.01 if st.counter >= 5 else 0.0
    ctx.epsilon = st.epsilon
    return st.epsilon


def gb_update(ctx: SelectionContext, improved: bool, incumbent_delta: float) -> None:
    """Per-iteration Gb bookkeeping.

    A strict improvement returns to the usual phase.  Otherwise a counter of
    non-improving refinements grows; after ``refinements`` of them the global
    phase starts with threshold ``factor`` times the incumbent element's measure.
    """
    st = ctx.gb_state
    if improved:
        st.phase, st.counter = "usual", 0
        return
    st.counter += 1
    if st.phase == "usual" and st.counter >= st.refinements:
        st.phase = "global"
        st.delta_gb = st.factor * incumbent_delta


def gb_filter(store, ctx: SelectionContext) -> SelectionView:
    view = as_view(store)
    st = ctx.gb_state
    if st.phase != "global":
        return view
    mask = view.delta >= st.delta_gb * (1 - 1e-12)
    if not np.any(mask):
        return view
    return view.subset(mask)


def symmetric_discard(elem, strict: bool = True) -> bool:
    """True when the element lies outside the wedge ``x_1 <= x_2 <= ... <= x_n``.

    ``strict=False`` (the sym2 rule) also drops elements touching the wedge
    only along its boundary.
    """
    lo, hi = np.asarray(elem.lo), np.asarray(elem.hi)
    if lo.size < 2:
        return False
    if strict:
        return bool(np.any(lo[:-1] > hi[1:]))
    return bool(np.any(lo[:-1] >= hi[1:]))
