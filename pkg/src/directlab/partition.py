"""Partition geometry: normalization, hyper-rectangles, simplices and stores.

All geometry lives in the unit cube ``[0, 1]^n``.  Hyper-rectangles carry an
integer ``levels`` vector (how many times each side has been divided by the
scheme's base, 3 for trisection and 2 for bisection), so side lengths and
measures are computed from integers and equal-sized elements get bit-identical
measures.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .problems import ProblemSpec, evaluate_constraints, evaluate_objective

__all__ = [
    "UnitView",
    "normalize_domain",
    "HyperRect",
    "Simplex",
    "measure",
    "measure_from_levels",
    "rect_from_center",
    "longest_axes",
    "trisect",
    "trisect_plan",
    "trisect_children",
    "bisect_diagonal",
    "bisect_plan",
    "bisect_children",
    "adc_plan",
    "adc_children",
    "sample_points",
    "initial_rect",
    "initial_simplices",
    "subdivide_simplex",
    "simplex_volume",
    "simplex_measure",
    "feasible_cover_simplices",
    "PartitionError",
    "PartitionStore",
    "StaticPoolStore",
    "DynamicStore",
    "make_store",
    "measure_groups",
    "GROUP_RTOL",
]

GROUP_RTOL = 1e-12
MEASURES = ("euclid_half_diagonal", "longest_side")


class PartitionError(ValueError):
    """Invalid geometry request (bad scheme, dimension cap, empty polytope...)."""


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class UnitView:
    """A problem seen through the unit cube; evaluation maps back to ``D`` first."""

    spec: ProblemSpec

    @property
    def n(self) -> int:
        return self.spec.n

    def to_original(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        x = self.spec.lower + u * (self.spec.upper - self.spec.lower)
        # guard against roundoff pushing the upper corner past the bound
        return np.minimum(np.maximum(x, self.spec.lower), self.spec.upper)

    def to_unit(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return (x - self.spec.lower) / (self.spec.upper - self.spec.lower)

    def objective(self, u) -> float:
        return evaluate_objective(self.spec, self.to_original(u))

    def constraints(self, u):
        return evaluate_constraints(self.spec, self.to_original(u))


def normalize_domain(spec: ProblemSpec):
    view = UnitView(spec)
    return view, view.to_original


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class HyperRect:
    lo: np.ndarray
    hi: np.ndarray
    levels: np.ndarray
    base: int
    samples: np.ndarray  # (k, n) sample coordinates
    values: tuple = ()
    point_ids: tuple = ()
    # diagonal orientation for two-point schemes: True flips axis j so the
    # diagonal starts at hi_j instead of lo_j
    orient: Optional[np.ndarray] = None
    delta: float = float("nan")
    id: int = -1

    @property
    def n(self) -> int:
        return self.lo.size

    @property
    def side_levels(self) -> np.ndarray:
        return self.levels

    @property
    def sides(self) -> np.ndarray:
        return np.power(float(self.base), -self.levels.astype(float))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def volume(self) -> float:
        return float(np.prod(self.sides))

    def contains(self, u, closed: bool = False) -> bool:
        u = np.asarray(u)
        if closed:
            return bool(np.all(u >= self.lo) and np.all(u <= self.hi))
        # half-open cells [lo, hi), with the upper face of the cube included
        upper_ok = (u < self.hi) | ((self.hi >= 1.0) & (u <= self.hi))
        return bool(np.all(u >= self.lo) and np.all(upper_ok))


@dataclass(eq=False)
class Simplex:
    vertices: np.ndarray  # (n+1, n)
    samples: np.ndarray
    values: tuple = ()
    point_ids: tuple = ()
    delta: float = float("nan")
    id: int = -1

    @property
    def n(self) -> int:
        return self.vertices.shape[1]

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def volume(self) -> float:
        return simplex_volume(self.vertices)

    def contains(self, u, tol: float = 1e-12) -> bool:
        v0 = self.vertices[0]
        T = (self.vertices[1:] - v0).T
        lam = np.linalg.solve(T, np.asarray(u, float) - v0)
        return bool(np.all(lam >= -tol) and lam.sum() <= 1 + tol)


def measure_from_levels(levels: np.ndarray, base: int, kind: str = "euclid_half_diagonal") -> float:
    sides = np.power(float(base), -np.asarray(levels, dtype=float))
    if kind == "euclid_half_diagonal":
        return float(0.5 * math.sqrt(float(np.sum(sides * sides))))
    if kind == "longest_side":
        return float(np.max(sides))
    raise PartitionError(f"unknown measure {kind!r}")


def measure(elem, kind: str = "euclid_half_diagonal") -> float:
    """Size of an element: half the diagonal (default) or its longest side.

    Simplices always use half their longest edge.
    """
    if isinstance(elem, Simplex):
        return simplex_measure(elem.vertices)
    if kind not in MEASURES:
        raise PartitionError(f"unknown measure {kind!r}")
    if getattr(elem, "levels", None) is not None:
        return measure_from_levels(elem.levels, elem.base, kind)
    sides = np.asarray(elem.hi, float) - np.asarray(elem.lo, float)
    if kind == "euclid_half_diagonal":
        return float(0.5 * np.linalg.norm(sides))
    return float(np.max(sides))


def longest_axes(levels: np.ndarray) -> np.ndarray:
    """Axes with the fewest divisions (the longest sides), ascending."""
    return np.flatnonzero(levels == levels.min())


def rect_from_center(center, levels, base=3, kind="euclid_half_diagonal", point_ids=(), values=()) -> HyperRect:
    center = np.asarray(center, dtype=float)
    levels = np.asarray(levels, dtype=np.int64)
    half = 0.5 * np.power(float(base), -levels.astype(float))
    return HyperRect(lo=center - half, hi=center + half, levels=levels, base=base, samples=center[None, :].copy(),
                     values=tuple(values), point_ids=tuple(point_ids),
                     delta=measure_from_levels(levels, base, kind))


def _diag_point(lo, hi, orient, t):
    a = np.where(orient, hi, lo)
    b = np.where(orient, lo, hi)
    return a + t * (b - a)


def initial_rect(n: int, scheme: str = "midpoint", kind: str = "euclid_half_diagonal") -> HyperRect:
    """The unit cube with the sample points of ``scheme`` (values not yet attached)."""
    lo, hi = np.zeros(n), np.ones(n)
    levels = np.zeros(n, dtype=np.int64)
    if scheme == "midpoint":
        return rect_from_center(np.full(n, 0.5), levels, 3, kind)
    orient = np.zeros(n, dtype=bool)
    if scheme == "two_diagonal_thirds":
        pts = np.array([_diag_point(lo, hi, orient, 1 / 3), _diag_point(lo, hi, orient, 2 / 3)])
        base = 2
    elif scheme == "two_diagonal_vertices":
        pts = np.array([lo, hi])
        base = 3
    else:
        raise PartitionError(f"scheme {scheme!r} does not apply to hyper-rectangles")
    return HyperRect(lo=lo, hi=hi, levels=levels, base=base, samples=pts, orient=orient,
                     delta=measure_from_levels(levels, base, kind))


def sample_points(elem, scheme: str) -> np.ndarray:
    """Deterministic sample set of an element under a sampling scheme."""
    if isinstance(elem, Simplex):
        if scheme == "simplex_center":
            return elem.vertices.mean(axis=0)[None, :]
        if scheme == "simplex_vertices":
            return elem.vertices.copy()
        raise PartitionError(f"scheme {scheme!r} does not apply to simplices")
    lo, hi = np.asarray(elem.lo, float), np.asarray(elem.hi, float)
    orient = elem.orient if getattr(elem, "orient", None) is not None else np.zeros(lo.size, dtype=bool)
    if scheme == "midpoint":
        return (0.5 * (lo + hi))[None, :]
    if scheme == "two_diagonal_thirds":
        return np.array([_diag_point(lo, hi, orient, 1 / 3), _diag_point(lo, hi, orient, 2 / 3)])
    if scheme == "two_diagonal_vertices":
        return np.array([_diag_point(lo, hi, orient, 0.0), _diag_point(lo, hi, orient, 1.0)])
    raise PartitionError(f"scheme {scheme!r} does not apply to hyper-rectangles")


# ---------------------------------------------------------------------------
# Trisection of midpoint-sampled rectangles
# ---------------------------------------------------------------------------

def trisect_plan(elem: HyperRect, axes: str = "all_longest"):
    """Axes to split and the new sample points, ``c - d e_j, c + d e_j`` per axis."""
    cand = longest_axes(elem.levels)
    if axes == "one_longest":
        cand = cand[:1]
    elif axes != "all_longest":
        raise PartitionError(f"unknown axes rule {axes!r}")
    c = elem.samples[0]
    pts = np.empty((2 * cand.size, elem.n))
    for k, j in enumerate(cand):
        d = math.pow(3.0, -float(elem.levels[j]) - 1.0)
        pts[2 * k] = c
        pts[2 * k, j] = c[j] - d
        pts[2 * k + 1] = c
        pts[2 * k + 1, j] = c[j] + d
    return cand, pts


def trisect_children(elem: HyperRect, split_axes, new_values, new_ids=None, kind="euclid_half_diagonal"):
    """Build the ``2k+1`` children once the new points have values.

    Axes are split in ascending order of ``w_j = min(f-, f+)`` (ties by axis
    index), so the best values end up in the largest children.  Values that
    are NaN (failed evaluations) rank last.
    """
    new_values = np.asarray(new_values, dtype=float)
    k = len(split_axes)
    if new_ids is None:
        new_ids = [None] * (2 * k)
    pair = new_values.reshape(k, 2)
    w = np.where(np.isnan(pair), np.inf, pair).min(axis=1)
    order = sorted(range(k), key=lambda t: (w[t], split_axes[t]))
    c = elem.samples[0]
    levels = elem.levels.copy()
    children = []
    for t in order:
        j = split_axes[t]
        levels = levels.copy()
        levels[j] += 1
        for s in (0, 1):
            idx = 2 * t + s
            pt = c.copy()
            d = math.pow(3.0, -float(levels[j]))
            pt[j] = c[j] - d if s == 0 else c[j] + d
            pid = () if new_ids[idx] is None else (new_ids[idx],)
            children.append(rect_from_center(pt, levels, 3, kind, point_ids=pid, values=(float(new_values[idx]),)))
    children.append(rect_from_center(c, levels, 3, kind, point_ids=elem.point_ids, values=elem.values))
    return children


def trisect(elem: HyperRect, axes: str = "all_longest", sampler: Callable = None,
            kind: str = "euclid_half_diagonal"):
    """Trisect a midpoint-sampled rectangle, evaluating the new centers with ``sampler``."""
    split_axes, pts = trisect_plan(elem, axes)
    vals = []
    for p in pts:
        v = float(sampler(p))
        vals.append(v if math.isfinite(v) else float("nan"))
    return trisect_children(elem, split_axes, vals, None, kind)


# ---------------------------------------------------------------------------
# Diagonal bisection (two points at 1/3 and 2/3 of the diagonal)
# ---------------------------------------------------------------------------

def _split_axis(elem: HyperRect) -> int:
    return int(longest_axes(elem.levels)[0])


def _halves(elem: HyperRect, j: int):
    mid = 0.5 * (elem.lo[j] + elem.hi[j])
    levels = elem.levels.copy()
    levels[j] += 1
    orient = elem.orient.copy()
    orient[j] = ~orient[j]
    lo_l, hi_l = elem.lo.copy(), elem.hi.copy()
    hi_l[j] = mid
    lo_r, hi_r = elem.lo.copy(), elem.hi.copy()
    lo_r[j] = mid
    return levels, orient, (lo_l, hi_l), (lo_r, hi_r)


def bisect_plan(elem: HyperRect):
    """The two new points (one per child) created by a diagonal bisection."""
    j = _split_axis(elem)
    levels, orient, left, right = _halves(elem, j)
    out = []
    for lo, hi in (left, right):
        p1 = _diag_point(lo, hi, orient, 1 / 3)
        p2 = _diag_point(lo, hi, orient, 2 / 3)
        # the inherited point keeps its t; the other one is new
        inherit_first = elem.samples[0][j] >= lo[j] and elem.samples[0][j] <= hi[j]
        out.append(p2 if inherit_first else p1)
    return j, np.array(out)


def bisect_children(elem: HyperRect, new_values=(None, None), new_ids=(None, None), kind="euclid_half_diagonal"):
    j = _split_axis(elem)
    levels, orient, left, right = _halves(elem, j)
    _, new_pts = bisect_plan(elem)
    children = []
    for c, (lo, hi) in enumerate((left, right)):
        inherit_first = elem.samples[0][j] >= lo[j] and elem.samples[0][j] <= hi[j]
        t_old = 0 if inherit_first else 1
        old = (elem.samples[t_old], elem.values[t_old] if elem.values else None,
               elem.point_ids[t_old] if elem.point_ids else None)
        new = (new_pts[c], new_values[c], new_ids[c])
        first, second = (old, new) if inherit_first else (new, old)
        children.append(HyperRect(
            lo=lo, hi=hi, levels=levels.copy(), base=2, samples=np.array([first[0], second[0]]),
            values=tuple(v for v in (first[1], second[1]) if v is not None),
            point_ids=tuple(p for p in (first[2], second[2]) if p is not None),
            orient=orient.copy(), delta=measure_from_levels(levels, 2, kind)))
    return children


def bisect_diagonal(elem: HyperRect, sampler: Callable, kind: str = "euclid_half_diagonal"):
    """Halve one longest side; each child keeps one parent point and samples one new point."""
    _, pts = bisect_plan(elem)
    vals = [float(sampler(p)) for p in pts]
    return bisect_children(elem, vals, (None, None), kind)


# ---------------------------------------------------------------------------
# Vertex-sampled trisection along one longest side (two diagonal vertices)
# ---------------------------------------------------------------------------

def _adc_geometry(elem: HyperRect):
    j = _split_axis(elem)
    lo, hi = elem.lo, elem.hi
    d = hi[j] - lo[j]
    cuts = (lo[j], lo[j] + d / 3, lo[j] + 2 * d / 3, hi[j])
    levels = elem.levels.copy()
    levels[j] += 1
    boxes = []
    for c in range(3):
        clo, chi = lo.copy(), hi.copy()
        clo[j], chi[j] = cuts[c], cuts[c + 1]
        orient = elem.orient.copy()
        if c == 1:
            orient[j] = ~orient[j]
        boxes.append((clo, chi, orient))
    return j, levels, boxes


def adc_plan(elem: HyperRect):
    """New vertices of a vertex-sampled trisection (two, shared by the middle child)."""
    _, _, boxes = _adc_geometry(elem)
    old = elem.samples
    new = []
    for clo, chi, orient in boxes:
        for t in (0.0, 1.0):
            p = _diag_point(clo, chi, orient, t)
            if not any(np.allclose(p, q, rtol=0, atol=1e-15) for q in list(old) + new):
                new.append(p)
    return np.array(new)


def adc_children(elem: HyperRect, point_lookup: Callable, kind="euclid_half_diagonal"):
    """Children of a vertex-sampled trisection; ``point_lookup(p) -> (id, value)``."""
    _, levels, boxes = _adc_geometry(elem)
    children = []
    for clo, chi, orient in boxes:
        pts = np.array([_diag_point(clo, chi, orient, 0.0), _diag_point(clo, chi, orient, 1.0)])
        info = [point_lookup(p) for p in pts]
        children.append(HyperRect(lo=clo, hi=chi, levels=levels.copy(), base=3, samples=pts,
                                  values=tuple(v for _, v in info), point_ids=tuple(i for i, _ in info),
                                  orient=orient, delta=measure_from_levels(levels, 3, kind)))
    return children


# ---------------------------------------------------------------------------
# Simplices
# ---------------------------------------------------------------------------

def simplex_volume(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=float)
    n = v.shape[1]
    return float(abs(np.linalg.det(v[1:] - v[0])) / math.factorial(n))


def _longest_edge(vertices: np.ndarray):
    best, pair = -1.0, (0, 1)
    m = vertices.shape[0]
    lengths = {}
    for a in range(m):
        for b in range(a + 1, m):
            lengths[(a, b)] = float(np.linalg.norm(vertices[b] - vertices[a]))
    top = max(lengths.values())
    for key in sorted(lengths, key=lambda ab: (tuple(vertices[ab[0]]), tuple(vertices[ab[1]]))):
        if lengths[key] >= top * (1 - GROUP_RTOL):
            return key, top
    return pair, best  # pragma: no cover


def simplex_measure(vertices: np.ndarray) -> float:
    """Half the longest edge."""
    return 0.5 * _longest_edge(np.asarray(vertices, float))[1]


def make_simplex(vertices, samples=None, values=(), point_ids=()) -> Simplex:
    vertices = np.asarray(vertices, dtype=float)
    if samples is None:
        samples = vertices.mean(axis=0)[None, :]
    return Simplex(vertices=vertices, samples=np.asarray(samples, float), values=tuple(values),
                   point_ids=tuple(point_ids), delta=simplex_measure(vertices))


def initial_simplices(n: int, cap: int = 8) -> list[Simplex]:
    """The ``n!`` simplices ``{u_pi(1) <= ... <= u_pi(n)}`` of the cube's standard triangulation.

    Each is given by the path of cube corners that switches on coordinates in
    the order ``pi(n), pi(n-1), ..., pi(1)``.
    """
    if n < 1:
        raise PartitionError("dimension must be positive")
    if n > cap:
        raise PartitionError(f"n = {n} exceeds the simplicial dimension cap {cap}")
    out = []
    for perm in itertools.permutations(range(n)):
        verts = [np.zeros(n)]
        cur = np.zeros(n)
        for axis in reversed(perm):
            cur = cur.copy()
            cur[axis] = 1.0
            verts.append(cur)
        out.append(make_simplex(np.array(verts)))
    # lexicographic order of the vertex lists for a platform-independent enumeration
    out.sort(key=lambda s: tuple(s.vertices.ravel()))
    return out


def subdivide_simplex(sx) -> list[Simplex]:
    """Trisect the longest edge ``(va, vb)`` into three children sharing the other vertices.

    Children are ``{va, p1, O}``, ``{p1, p2, O}`` and ``{p2, vb, O}``; the middle
    child has the same centroid as the parent.  Returned children carry no
    samples beyond their own centroid.
    """
    verts = sx.vertices if isinstance(sx, Simplex) else np.asarray(sx, float)
    (a, b), _ = _longest_edge(verts)
    va, vb = verts[a], verts[b]
    p1 = va + (vb - va) / 3.0
    p2 = va + 2.0 * (vb - va) / 3.0
    c1 = verts.copy()
    c1[b] = p1
    c2 = verts.copy()
    c2[a], c2[b] = p1, p2
    c3 = verts.copy()
    c3[a] = p2
    return [make_simplex(c1), make_simplex(c2), make_simplex(c3)]


def simplex_new_points(sx) -> tuple[np.ndarray, np.ndarray, tuple]:
    """The two edge points of the next subdivision and the longest-edge index pair."""
    verts = sx.vertices if isinstance(sx, Simplex) else np.asarray(sx, float)
    (a, b), _ = _longest_edge(verts)
    va, vb = verts[a], verts[b]
    return va + (vb - va) / 3.0, va + 2.0 * (vb - va) / 3.0, (a, b)


def feasible_cover_simplices(spec_or_A, b=None, lower=None, upper=None, max_n: int = 6, max_m: int = 12,
                             tol: float = 1e-9, merge_tol: float = 1e-8) -> list[Simplex]:
    """Cover the polytope ``{lower <= x <= upper, A x <= b}`` exactly with simplices.

    Accepts a :class:`ProblemSpec` carrying ``linear_data`` (the result is in
    unit-cube coordinates), or ``(A, b)`` already in unit coordinates (bounds
    default to the unit cube).  Vertices come from solving every n-subset of
    the bounding hyperplanes; the convex hull's facets are then fanned from the
    lexicographically smallest vertex.
    """
    if isinstance(spec_or_A, ProblemSpec):
        spec = spec_or_A
        n = spec.n
        if spec.eq_constraints:
            raise PartitionError("equality constraints are not supported by the polytope cover")
        if spec.linear_data is None:
            if spec.ineq_constraints:
                raise PartitionError(f"{spec.name}: constraints are not declared linear")
            A, bb = np.zeros((0, n)), np.zeros(0)
        else:
            A0, b0 = spec.linear_data
            w = spec.upper - spec.lower
            A = np.asarray(A0, float) * w
            bb = np.asarray(b0, float) - np.asarray(A0, float) @ spec.lower
        lo, hi = np.zeros(n), np.ones(n)
    else:
        A = np.atleast_2d(np.asarray(spec_or_A, float))
        bb = np.asarray(b, float).ravel()
        n = A.shape[1]
        lo = np.zeros(n) if lower is None else np.asarray(lower, float)
        hi = np.ones(n) if upper is None else np.asarray(upper, float)
    m = A.shape[0]
    if n > max_n or m > max_m:
        raise PartitionError(f"polytope cover limited to n <= {max_n}, m <= {max_m}")
    # all 2n + m hyperplanes as rows of H x <= r
    H = np.vstack([-np.eye(n), np.eye(n), A]) if m else np.vstack([-np.eye(n), np.eye(n)])
    r = np.concatenate([-lo, hi, bb]) if m else np.concatenate([-lo, hi])
    scale = np.maximum(1.0, np.abs(r))
    verts: list[np.ndarray] = []
    for rows in itertools.combinations(range(H.shape[0]), n):
        M = H[list(rows)]
        if np.linalg.matrix_rank(M) < n:
            continue
        x = np.linalg.solve(M, r[list(rows)])
        if np.any(H @ x - r > tol * scale):
            continue
        if any(np.linalg.norm(x - v) <= merge_tol for v in verts):
            continue
        verts.append(x)
    if not verts:
        raise PartitionError("empty feasible region")
    V = np.array(sorted(verts, key=tuple))
    v0 = V[0]
    if n == 1:
        if V.shape[0] < 2:
            raise PartitionError("degenerate (lower-dimensional) feasible region")
        return [make_simplex(np.array([V[0], V[-1]]))]
    if np.linalg.matrix_rank(V[1:] - v0, tol=1e-10) < n:
        raise PartitionError("degenerate (lower-dimensional) feasible region")
    from scipy.spatial import ConvexHull

    hull = ConvexHull(V)
    out = []
    for facet in hull.simplices:
        if 0 in facet:
            continue
        sv = np.vstack([v0, V[np.sort(facet)]])
        if simplex_volume(sv) <= 1e-14:
            continue
        out.append(make_simplex(sv))
    out.sort(key=lambda s: tuple(s.vertices.ravel()))
    return out


# ---------------------------------------------------------------------------
# Measure groups
# ---------------------------------------------------------------------------

def measure_groups(deltas: np.ndarray, rtol: float = GROUP_RTOL):
    """Group measures agreeing within ``rtol`` relative.

    Returns ``(group_delta, labels)``: ascending representative measures and,
    per input, the index of its group.
    """
    deltas = np.asarray(deltas, dtype=float)
    if deltas.size == 0:
        return np.zeros(0), np.zeros(0, dtype=np.int64)
    uniq, inv = np.unique(deltas, return_inverse=True)
    if uniq.size > 1:
        gap = np.diff(uniq) > rtol * uniq[1:]
        merged = np.concatenate([[0], np.cumsum(gap)])
        reps = uniq[np.concatenate([[True], gap])]
        return reps, merged[inv]
    return uniq, inv.astype(np.int64)


# ---------------------------------------------------------------------------
# Stores
# ---------------------------------------------------------------------------

class PartitionStore:
    """Element bookkeeping shared by both backends.

    Elements are kept in insertion order with stable ids; removed ids are
    marked dead.  Each element has a measure, a current value (refreshed by the
    solver when handler values change) and a flag excluding it from selection.
    """

    backend = "abstract"

    def _init_groups(self):
        self._reps: list[float] = []
        self._rep_exact: dict = {}
        self._rep_sorted: list = []  # (delta, gid) ascending

    def _group_of(self, delta: float) -> int:
        """Group id of a measure; measures within ``GROUP_RTOL`` relative share a group."""
        gid = self._rep_exact.get(delta)
        if gid is not None:
            return gid
        import bisect

        pos = bisect.bisect_left(self._rep_sorted, (delta, -1))
        for q in (pos - 1, pos):
            if 0 <= q < len(self._rep_sorted):
                rep, g = self._rep_sorted[q]
                if abs(rep - delta) <= GROUP_RTOL * max(abs(rep), abs(delta)):
                    self._rep_exact[delta] = g
                    return g
        gid = len(self._reps)
        self._reps.append(float(delta))
        self._rep_exact[delta] = gid
        self._rep_sorted.insert(pos, (float(delta), gid))
        return gid

    def group_reps(self) -> np.ndarray:
        """Representative measure of every group id ever created."""
        return np.array(self._reps, dtype=float)

    def snapshot_groups(self):
        """Like :meth:`snapshot` plus the group id of each element."""
        raise NotImplementedError

    def insert(self, elem, value: float = float("nan")) -> int:
        raise NotImplementedError

    def remove(self, eid: int) -> None:
        raise NotImplementedError

    def get(self, eid: int):
        raise NotImplementedError

    def __len__(self) -> int:
        return int(np.count_nonzero(self.alive_mask()))

    def alive_mask(self) -> np.ndarray:
        raise NotImplementedError

    def ids(self) -> np.ndarray:
        return np.flatnonzero(self.alive_mask())

    def elements(self):
        return [self.get(i) for i in self.ids()]

    def snapshot(self):
        """``(ids, deltas, values, excluded)`` arrays of the alive elements, ascending id."""
        raise NotImplementedError

    def set_values(self, ids, values) -> None:
        raise NotImplementedError

    def set_excluded(self, eid: int, flag: bool = True) -> None:
        raise NotImplementedError

    def groups(self):
        """Distinct measures ascending, each with the list of member ids."""
        ids, deltas, _, _ = self.snapshot()
        reps, labels = measure_groups(deltas)
        return [(float(reps[g]), ids[labels == g].tolist()) for g in range(reps.size)]

    def min_f_in_group(self, delta: float) -> float:
        """Smallest value in the group whose measure is nearest to ``delta``.

        Displayed (rounded) measures are accepted as long as they are within
        1% of a group's measure.
        """
        ids, deltas, values, _ = self.snapshot()
        reps, labels = measure_groups(deltas)
        if reps.size == 0:
            raise KeyError("empty store")
        g = int(np.argmin(np.abs(reps - delta)))
        if abs(reps[g] - delta) > 1e-2 * abs(reps[g]):
            raise KeyError(f"no group with measure {delta}")
        return float(np.nanmin(values[labels == g]))

    def total_volume(self) -> float:
        return float(sum(e.volume() for e in self.elements()))


class StaticPoolStore(PartitionStore):
    """Preallocated arrays (2^14 slots initially) doubled on overflow."""

    backend = "static_pool"

    def __init__(self, capacity: int = 2 ** 14):
        self._cap = int(capacity)
        self._n = 0
        self._delta = np.empty(self._cap)
        self._value = np.empty(self._cap)
        self._alive = np.zeros(self._cap, dtype=bool)
        self._excl = np.zeros(self._cap, dtype=bool)
        self._gid = np.zeros(self._cap, dtype=np.int64)
        self._elems: list = [None] * self._cap
        self._init_groups()

    @property
    def capacity(self) -> int:
        return self._cap

    def _grow(self):
        new = 2 * self._cap
        for name in ("_delta", "_value"):
            arr = np.empty(new)
            arr[: self._n] = getattr(self, name)[: self._n]
            setattr(self, name, arr)
        for name in ("_alive", "_excl"):
            arr = np.zeros(new, dtype=bool)
            arr[: self._n] = getattr(self, name)[: self._n]
            setattr(self, name, arr)
        gid = np.zeros(new, dtype=np.int64)
        gid[: self._n] = self._gid[: self._n]
        self._gid = gid
        self._elems.extend([None] * (new - self._cap))
        self._cap = new

    def insert(self, elem, value=float("nan")) -> int:
        if self._n == self._cap:
            self._grow()
        i = self._n
        elem.id = i
        self._elems[i] = elem
        self._delta[i] = elem.delta
        self._value[i] = value
        self._alive[i] = True
        self._excl[i] = False
        self._gid[i] = self._group_of(float(elem.delta))
        self._n += 1
        return i

    def _check(self, eid):
        if not (0 <= eid < self._n) or not self._alive[eid]:
            raise KeyError(f"unknown element id {eid}")

    def remove(self, eid):
        self._check(eid)
        self._alive[eid] = False

    def get(self, eid):
        self._check(eid)
        return self._elems[eid]

    def alive_mask(self):
        return self._alive[: self._n]

    def snapshot(self):
        ids = np.flatnonzero(self._alive[: self._n])
        return ids, self._delta[ids], self._value[ids], self._excl[ids]

    def snapshot_groups(self):
        ids = np.flatnonzero(self._alive[: self._n])
        return ids, self._delta[ids], self._value[ids], self._excl[ids], self._gid[ids]

    def set_values(self, ids, values):
        self._value[np.asarray(ids, dtype=np.int64)] = values

    def set_excluded(self, eid, flag=True):
        self._check(eid)
        self._excl[eid] = flag


class DynamicStore(PartitionStore):
    """Per-element allocation in growing Python lists."""

    backend = "dynamic"

    def __init__(self):
        self._elems: list = []
        self._delta: list = []
        self._value: list = []
        self._alive: list = []
        self._excl: list = []
        self._gid: list = []
        self._init_groups()

    def insert(self, elem, value=float("nan")) -> int:
        i = len(self._elems)
        elem.id = i
        self._elems.append(elem)
        self._gid.append(self._group_of(float(elem.delta)))
        self._delta.append(float(elem.delta))
        self._value.append(float(value))
        self._alive.append(True)
        self._excl.append(False)
        return i

    def _check(self, eid):
        if not (0 <= eid < len(self._elems)) or not self._alive[eid]:
            raise KeyError(f"unknown element id {eid}")

    def remove(self, eid):
        self._check(eid)
        self._alive[eid] = False

    def get(self, eid):
        self._check(eid)
        return self._elems[eid]

    def alive_mask(self):
        return np.array(self._alive, dtype=bool)

    def snapshot(self):
        ids = [i for i, a in enumerate(self._alive) if a]
        return (np.array(ids, dtype=np.int64), np.array([self._delta[i] for i in ids], dtype=float),
                np.array([self._value[i] for i in ids], dtype=float),
                np.array([self._excl[i] for i in ids], dtype=bool))

    def snapshot_groups(self):
        ids, deltas, values, excl = self.snapshot()
        return ids, deltas, values, excl, np.array([self._gid[i] for i in ids.tolist()], dtype=np.int64)

    def set_values(self, ids, values):
        for i, v in zip(np.asarray(ids).tolist(), np.asarray(values, dtype=float).tolist()):
            self._value[i] = v

    def set_excluded(self, eid, flag=True):
        self._check(eid)
        self._excl[eid] = bool(flag)


def make_store(backend: str = "static_pool") -> PartitionStore:
    if backend in ("static_pool", "static"):
        return StaticPoolStore()
    if backend == "dynamic":
        return DynamicStore()
    raise PartitionError(f"unknown storage backend {backend!r}")
