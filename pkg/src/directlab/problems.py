"""Problem model and the built-in problem registry.

A :class:`ProblemSpec` bundles an objective, box bounds, optional inequality
(``g(x) <= 0``) and equality (``h(x) = 0``) constraints, an optional hidden
feasibility oracle and known-optimum metadata.  Problems are looked up by name
with :func:`lookup_problem`; scalable families take a dimension argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "INFEASIBLE",
    "ProblemSpec",
    "RegressionConfig",
    "ProblemError",
    "OutOfBoundsError",
    "lookup_problem",
    "list_problems",
    "problem_names",
    "evaluate_objective",
    "evaluate_constraints",
    "transform_equalities",
    "build_regression_problem",
    "hidden_feasibility",
    "hidden_wrapper",
    "parse_descriptor",
]

# Marker returned by the objective of a hidden-constraint problem outside D^hidden.
INFEASIBLE = float("nan")

TAGS = frozenset({"box", "linear", "nonlinear", "equality", "engineering", "symmetric", "hidden"})


class ProblemError(ValueError):
    """Unknown problem name, unsupported dimension or malformed problem data."""


class OutOfBoundsError(ValueError):
    """Raised when a point outside the box bounds is evaluated."""


Func = Callable[[np.ndarray], float]


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    name: str
    lower: np.ndarray
    upper: np.ndarray
    objective: Func
    ineq_constraints: tuple = ()
    eq_constraints: tuple = ()
    hidden_oracle: Optional[Callable[[np.ndarray], bool]] = None
    known_fstar: Optional[float] = None
    known_xstar: Optional[np.ndarray] = None
    active_constraints: tuple = ()
    tags: frozenset = field(default_factory=lambda: frozenset({"box"}))
    # linear constraints given as (A, b) with A x <= b; filled for problems tagged linear
    linear_data: Optional[tuple] = None

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float).copy()
        upper = np.asarray(self.upper, dtype=float).copy()
        if lower.ndim != 1 or lower.shape != upper.shape or lower.size < 1:
            raise ProblemError(f"{self.name}: bounds must be 1-d arrays of equal length")
        if not np.all(lower < upper):
            raise ProblemError(f"{self.name}: lower bounds must be strictly below upper bounds")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "ineq_constraints", tuple(self.ineq_constraints))
        object.__setattr__(self, "eq_constraints", tuple(self.eq_constraints))
        object.__setattr__(self, "active_constraints", tuple(self.active_constraints))
        tags = frozenset(self.tags)
        if not tags <= TAGS:
            raise ProblemError(f"{self.name}: unknown tags {sorted(tags - TAGS)}")
        if "box" in tags and (self.ineq_constraints or self.eq_constraints):
            raise ProblemError(f"{self.name}: box problems carry no constraints")
        object.__setattr__(self, "tags", tags)
        if self.known_xstar is not None:
            xs = np.asarray(self.known_xstar, dtype=float).copy()
            if xs.shape != lower.shape:
                raise ProblemError(f"{self.name}: known_xstar has wrong dimension")
            if np.any(xs < lower) or np.any(xs > upper):
                raise ProblemError(f"{self.name}: known_xstar lies outside the bounds")
            xs.setflags(write=False)
            object.__setattr__(self, "known_xstar", xs)

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def m(self) -> int:
        return len(self.ineq_constraints)

    @property
    def r(self) -> int:
        return len(self.eq_constraints)

    @property
    def is_constrained(self) -> bool:
        return bool(self.ineq_constraints or self.eq_constraints)

    @property
    def is_hidden(self) -> bool:
        return self.hidden_oracle is not None

    @property
    def problem_class(self) -> str:
        """One of ``box``, ``linear``, ``nonlinear`` or ``hidden``."""
        if self.is_hidden:
            return "hidden"
        if not self.is_constrained:
            return "box"
        return "linear" if "linear" in self.tags and "nonlinear" not in self.tags else "nonlinear"

    def __repr__(self):
        return f"ProblemSpec({self.name!r}, n={self.n}, m={self.m}, r={self.r}, tags={sorted(self.tags)})"


def _check_bounds(spec: ProblemSpec, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != spec.lower.shape:
        raise OutOfBoundsError(f"{spec.name}: expected a point of dimension {spec.n}, got shape {x.shape}")
    # tolerate roundoff from the unit-cube mapping
    tol = 1e-12 * (spec.upper - spec.lower)
    if np.any(x < spec.lower - tol) or np.any(x > spec.upper + tol):
        raise OutOfBoundsError(f"{spec.name}: point {x} lies outside the box bounds")
    return x


def evaluate_objective(spec: ProblemSpec, x) -> float:
    """Objective value at ``x`` (original coordinates).

    Returns :data:`INFEASIBLE` (NaN) when the problem carries a hidden oracle
    that rejects ``x``; non-finite objective values are mapped to the same marker.
    """
    x = _check_bounds(spec, x)
    if spec.hidden_oracle is not None and not spec.hidden_oracle(x):
        return INFEASIBLE
    value = float(spec.objective(x))
    if not math.isfinite(value):
        return INFEASIBLE
    return value


def evaluate_constraints(spec: ProblemSpec, x) -> tuple[list[float], list[float]]:
    x = _check_bounds(spec, x)
    g = [float(c(x)) for c in spec.ineq_constraints]
    h = [float(c(x)) for c in spec.eq_constraints]
    return g, h


def transform_equalities(spec: ProblemSpec, eps_h: float = 1e-8) -> ProblemSpec:
    """Replace every equality ``h(x) = 0`` by the inequality ``|h(x)| - eps_h <= 0``."""
    if eps_h <= 0:
        raise ProblemError("eps_h must be positive")
    if not spec.eq_constraints:
        return spec

    def relaxed(h):
        return lambda x: abs(h(x)) - eps_h

    new_g = spec.ineq_constraints + tuple(relaxed(h) for h in spec.eq_constraints)
    return replace(spec, ineq_constraints=new_g, eq_constraints=(), linear_data=None,
                   tags=spec.tags - {"equality"})


def hidden_feasibility(spec: ProblemSpec, x) -> bool:
    """Boolean feasibility verdict at ``x``; constraint values are never exposed."""
    if spec.hidden_oracle is not None:
        return bool(spec.hidden_oracle(np.asarray(x, dtype=float)))
    g, h = evaluate_constraints(spec, x)
    return all(v <= 0.0 for v in g) and all(v == 0.0 for v in h)


def hidden_wrapper(spec: ProblemSpec, eps_phi: float = 1e-8) -> ProblemSpec:
    """Turn a constrained problem into a hidden-constraint one.

    The returned spec has no explicit constraints; feasibility is known only through
    the objective failing (returning :data:`INFEASIBLE`).  A point counts as
    feasible when its total violation is at most ``eps_phi``, the same tolerance
    the explicit-constraint handlers use, so rounded printed optima stay feasible.
    """
    if spec.is_hidden:
        return spec
    g_funcs, h_funcs = spec.ineq_constraints, spec.eq_constraints

    def oracle(x):
        viol = sum(max(g(x), 0.0) for g in g_funcs) + sum(abs(h(x)) for h in h_funcs)
        return viol <= eps_phi

    tags = (spec.tags - {"box", "linear", "nonlinear", "equality"}) | {"hidden"}
    return replace(spec, name=f"{spec.name}_hidden", ineq_constraints=(), eq_constraints=(),
                   hidden_oracle=oracle, active_constraints=(), tags=tags, linear_data=None)


# ---------------------------------------------------------------------------
# Box-constrained test functions
# ---------------------------------------------------------------------------

def rosenbrock(x):
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def branin(x):
    x1, x2 = x
    a, b, c = 1.0, 5.1 / (4 * math.pi ** 2), 5.0 / math.pi
    r, s, t = 6.0, 10.0, 1.0 / (8 * math.pi)
    return a * (x2 - b * x1 ** 2 + c * x1 - r) ** 2 + s * (1 - t) * math.cos(x1) + s


def goldstein_price(x):
    x1, x2 = x
    a = 1 + (x1 + x2 + 1) ** 2 * (19 - 14 * x1 + 3 * x1 ** 2 - 14 * x2 + 6 * x1 * x2 + 3 * x2 ** 2)
    b = 30 + (2 * x1 - 3 * x2) ** 2 * (18 - 32 * x1 + 12 * x1 ** 2 + 48 * x2 - 36 * x1 * x2 + 27 * x2 ** 2)
    return a * b


def six_hump_camel(x):
    x1, x2 = x
    return (4 - 2.1 * x1 ** 2 + x1 ** 4 / 3) * x1 ** 2 + x1 * x2 + (-4 + 4 * x2 ** 2) * x2 ** 2


_SHUBERT_I = np.arange(1, 6)


def shubert(x):
    i = _SHUBERT_I
    return float(np.sum(i * np.cos((i + 1) * x[0] + i)) * np.sum(i * np.cos((i + 1) * x[1] + i)))


def booth(x):
    x1, x2 = x
    return (x1 + 2 * x2 - 7) ** 2 + (2 * x1 + x2 - 5) ** 2


_HART_C = np.array([1.0, 1.2, 3.0, 3.2])
_HART3_A = np.array([[3.0, 10, 30], [0.1, 10, 35], [3.0, 10, 30], [0.1, 10, 35]])
_HART3_P = 1e-4 * np.array([[3689, 1170, 2673], [4699, 4387, 7470], [1091, 8732, 5547], [381, 5743, 8828]])
_HART6_A = np.array([[10, 3, 17, 3.5, 1.7, 8], [0.05, 10, 17, 0.1, 8, 14],
                     [3, 3.5, 1.7, 10, 17, 8], [17, 8, 0.05, 10, 0.1, 14]])
_HART6_P = 1e-4 * np.array([[1312, 1696, 5569, 124, 8283, 5886], [2329, 4135, 8307, 3736, 1004, 9991],
                            [2348, 1451, 3522, 2883, 3047, 6650], [4047, 8828, 8732, 5743, 1091, 381]])


def hartmann3(x):
    return float(-np.sum(_HART_C * np.exp(-np.sum(_HART3_A * (x - _HART3_P) ** 2, axis=1))))


def hartmann6(x):
    return float(-np.sum(_HART_C * np.exp(-np.sum(_HART6_A * (x - _HART6_P) ** 2, axis=1))))


_SHEKEL_A = np.array([[4, 4, 4, 4], [1, 1, 1, 1], [8, 8, 8, 8], [6, 6, 6, 6], [3, 7, 3, 7],
                      [2, 9, 2, 9], [5, 5, 3, 3], [8, 1, 8, 1], [6, 2, 6, 2], [7, 3.6, 7, 3.6]])
_SHEKEL_C = np.array([0.1, 0.2, 0.2, 0.4, 0.4, 0.6, 0.3, 0.7, 0.5, 0.5])


def _shekel(m):
    a, c = _SHEKEL_A[:m], _SHEKEL_C[:m]

    def f(x):
        return float(-np.sum(1.0 / (np.sum((x - a) ** 2, axis=1) + c)))

    f.__name__ = f"shekel{m}"
    return f


def alpine(x):
    return float(np.sum(np.abs(x * np.sin(x) + 0.1 * x)))


def csendes(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    nz = x != 0.0
    out[nz] = x[nz] ** 6 * (2.0 + np.sin(1.0 / x[nz]))
    return float(np.sum(out))


def griewank(x):
    i = np.arange(1, x.size + 1)
    return float(np.sum(x ** 2) / 4000.0 - np.prod(np.cos(x / np.sqrt(i))) + 1.0)


def rastrigin(x):
    return float(10.0 * x.size + np.sum(x ** 2 - 10.0 * np.cos(2 * np.pi * x)))


def styblinski_tang(x):
    return float(0.5 * np.sum(x ** 4 - 16 * x ** 2 + 5 * x))


def sphere(x):
    return float(np.sum(x ** 2))


def zakharov(x):
    i = np.arange(1, x.size + 1)
    s = np.sum(0.5 * i * x)
    return float(np.sum(x ** 2) + s ** 2 + s ** 4)


_ST_XSTAR = -2.903534027771178
_ST_FSTAR_PER_DIM = 0.5 * (_ST_XSTAR ** 4 - 16 * _ST_XSTAR ** 2 + 5 * _ST_XSTAR)


# ---------------------------------------------------------------------------
# Linearly constrained problems (A x <= b)
# ---------------------------------------------------------------------------

def _linear_constraints(A, b):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)

    def make(i):
        return lambda x: float(A[i] @ x - b[i])

    return tuple(make(i) for i in range(len(b))), (A, b)


# ---------------------------------------------------------------------------
# Engineering design problems
# ---------------------------------------------------------------------------

def spring_objective(x):
    x1, x2, x3 = x
    return x1 ** 2 * x2 * (x3 + 2)


_SPRING_G = (
    lambda x: 1 - x[1] ** 3 * x[2] / (71875 * x[0] ** 4),
    lambda x: x[1] * (4 * x[1] - x[0]) / (12566 * x[0] ** 3 * (x[1] - x[0])) + 2.46 / (12566 * x[0] ** 2) - 1,
    lambda x: 1 - 140.54 * x[0] / (x[2] * x[1] ** 2),
    lambda x: (x[0] + x[1]) / 1.5 - 1,
)

_SQRT2 = math.sqrt(2.0)


def truss_objective(x):
    return 100.0 * (2 * _SQRT2 * x[0] + x[1])


def _truss_den(x):
    return _SQRT2 * x[0] ** 2 + 2 * x[0] * x[1]


def _safe(func):
    # constraint formulas with singular points (x = 0) report a large violation there
    def wrapped(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            try:
                v = func(x)
            except ZeroDivisionError:
                return 1e30
        return float(v) if math.isfinite(v) else 1e30

    return wrapped


_TRUSS_G = tuple(_safe(g) for g in (
    lambda x: (_SQRT2 * x[0] + x[1]) / _truss_den(x) * 2 - 2,
    lambda x: x[1] / _truss_den(x) * 2 - 2,
    lambda x: 1 / (x[0] + _SQRT2 * x[1]) * 2 - 2,
))


def reducer_objective(x):
    x1, x2, x3, x4, x5, x6, x7 = x
    return (0.7854 * x1 * x2 ** 2 * (3.3333 * x3 ** 2 + 14.9334 * x3 - 43.0934)
            - 1.508 * x1 * (x6 ** 2 + x7 ** 2) + 7.4777 * (x6 ** 3 + x7 ** 3)
            + 0.7854 * (x4 * x6 ** 2 + x5 * x7 ** 2))


_REDUCER_G = (
    lambda x: 27 / (x[0] * x[1] ** 2 * x[2]) - 1,
    lambda x: 397.5 / (x[0] * x[1] ** 2 * x[2] ** 2) - 1,
    lambda x: 1.93 * x[3] ** 3 / (x[1] * x[2] * x[5] ** 4) - 1,
    lambda x: 1.93 * x[4] ** 3 / (x[1] * x[2] * x[6] ** 4) - 1,
    lambda x: math.sqrt((745 * x[3] / (x[1] * x[2])) ** 2 + 16.9e6) / (110 * x[5] ** 3) - 1,
    lambda x: math.sqrt((745 * x[4] / (x[1] * x[2])) ** 2 + 157.5e6) / (85 * x[6] ** 3) - 1,
    lambda x: x[1] * x[2] / 40 - 1,
    lambda x: 5 * x[1] / x[0] - 1,
    lambda x: x[0] / (12 * x[1]) - 1,
    lambda x: (1.5 * x[5] + 1.9) / x[3] - 1,
    lambda x: (1.1 * x[6] + 1.9) / x[4] - 1,
)


def vessel_objective(x):
    x1, x2, x3, x4 = x
    return 0.6224 * x1 * x3 * x4 + 1.7781 * x2 * x3 ** 2 + 3.1661 * x1 ** 2 * x4 + 19.84 * x1 ** 2 * x3


_VESSEL_G = (
    lambda x: -x[0] + 0.0193 * x[2],
    lambda x: -x[1] + 0.00954 * x[2],
    lambda x: -math.pi * x[2] ** 2 * x[3] - 4.0 / 3.0 * math.pi * x[2] ** 3 + 1296000,
    lambda x: x[3] - 240,
    lambda x: 1.1 - x[0],
    lambda x: 0.6 - x[1],
)

_WB_P, _WB_L, _WB_E, _WB_G = 6000.0, 14.0, 3e7, 12e6


def beam_objective(x):
    x1, x2, x3, x4 = x
    return 1.10471 * x1 ** 2 * x2 + 0.04811 * x3 * x4 * (14 + x2)


def _beam_tau(x):
    x1, x2, x3, _ = x
    tau1 = _WB_P / (_SQRT2 * x1 * x2)
    m = _WB_P * (_WB_L + x2 / 2)
    r = math.sqrt(x2 ** 2 / 4 + ((x1 + x3) / 2) ** 2)
    j = 2 * (_SQRT2 * x1 * x2 * (x2 ** 2 / 12 + ((x1 + x3) / 2) ** 2))
    tau2 = m * r / j
    return math.sqrt(tau1 ** 2 + tau1 * tau2 * x2 / r + tau2 ** 2)


def _beam_pc(x):
    _, _, x3, x4 = x
    return (4.013 * _WB_E * math.sqrt(x3 ** 2 * x4 ** 6 / 36) / _WB_L ** 2
            * (1 - x3 / (2 * _WB_L) * math.sqrt(_WB_E / (4 * _WB_G))))


_BEAM_G = (
    lambda x: _beam_tau(x) - 13600,
    lambda x: 6 * _WB_P * _WB_L / (x[3] * x[2] ** 2) - 3e4,
    lambda x: x[0] - x[3],
    lambda x: 0.10471 * x[0] ** 2 + 0.04811 * x[2] * x[3] * (14 + x[1]) - 5,
    lambda x: 4 * _WB_P * _WB_L ** 3 / (_WB_E * x[3] * x[2] ** 3) - 0.25,
    lambda x: _WB_P - _beam_pc(x),
    lambda x: 0.125 - x[0],
)


# ---------------------------------------------------------------------------
# Damped-sinusoid regression
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionConfig:
    """Generating coefficients of a sum of ``s`` damped sinusoids sampled at t = 1..T."""

    s: int
    T: int
    d: tuple
    omega: tuple
    theta: tuple

    def __post_init__(self):
        if self.s not in (1, 2, 3):
            raise ProblemError("number of sinusoids must be 1, 2 or 3")
        if self.T not in (10, 100):
            raise ProblemError("number of samples must be 10 or 100")
        for name, vals, lo, hi in (("d", self.d, -1, 0), ("omega", self.omega, 0, 1), ("theta", self.theta, 0, 1)):
            if len(vals) != self.s:
                raise ProblemError(f"{name} needs {self.s} coefficients")
            if any(v < lo or v > hi for v in vals):
                raise ProblemError(f"{name} coefficients must lie in [{lo}, {hi}]")

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for q in range(self.s) for c in (self.d[q], self.omega[q], self.theta[q])])


def _damped_sum(params: np.ndarray, t: np.ndarray) -> np.ndarray:
    p = params.reshape(-1, 3)
    return np.sum(np.exp(np.outer(t, p[:, 0])) * np.sin(2 * np.pi * np.outer(t, p[:, 1]) + p[:, 2]), axis=1)


def build_regression_problem(cfg: RegressionConfig) -> ProblemSpec:
    t = np.arange(1, cfg.T + 1, dtype=float)
    xstar = cfg.coefficients
    observed = _damped_sum(xstar, t)

    def objective(x):
        resid = observed - _damped_sum(np.asarray(x, dtype=float), t)
        return float(resid @ resid)

    lower = np.tile([-1.0, 0.0, 0.0], cfg.s)
    upper = np.tile([0.0, 1.0, 1.0], cfg.s)
    return ProblemSpec(name=f"regression_s{cfg.s}_T{cfg.T}", lower=lower, upper=upper, objective=objective,
                       known_fstar=0.0, known_xstar=xstar, tags={"box", "engineering"})


_REGRESSION_XSTAR = {
    1: (-0.2, 0.4, 0.3),
    2: (-0.2, 0.4, 0.3, -0.3, 0.3, 0.1),
    3: (-0.4, 0.6, 0.2, -0.3, 0.3, 0.1, -0.2, 0.4, 0.3),
}


def _regression_config(s: int, T: int) -> RegressionConfig:
    c = _REGRESSION_XSTAR[s]
    return RegressionConfig(s=s, T=T, d=c[0::3], omega=c[1::3], theta=c[2::3])


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Entry:
    factory: Callable[[Optional[int]], ProblemSpec]
    dims: Optional[tuple]  # None: fixed dimension; tuple: supported dimensions of a scalable family
    default_n: Optional[int] = None


_REGISTRY: dict[str, _Entry] = {}


def _fixed(name, lower, upper, objective, fstar, xstar, tags=("box",), g=(), h=(), active=(), linear=None):
    def factory(_n):
        return ProblemSpec(name=name, lower=np.array(lower, float), upper=np.array(upper, float),
                           objective=objective, ineq_constraints=g, eq_constraints=h, known_fstar=fstar,
                           known_xstar=None if xstar is None else np.array(xstar, float),
                           active_constraints=active, tags=frozenset(tags), linear_data=linear)

    _REGISTRY[name] = _Entry(factory, None)


def _scalable(name, lo, hi, objective, fstar_of_n, xstar_of_n, tags=("box",), dims=(2, 3, 4, 5, 10, 15)):
    def factory(n):
        return ProblemSpec(name=f"{name}", lower=np.full(n, lo, float), upper=np.full(n, hi, float),
                           objective=objective, known_fstar=fstar_of_n(n), known_xstar=xstar_of_n(n),
                           tags=frozenset(tags))

    _REGISTRY[name] = _Entry(factory, tuple(dims), dims[0])


_scalable("rosenbrock", -5.0, 10.0, rosenbrock, lambda n: 0.0, lambda n: np.ones(n))
_scalable("alpine", -5.0, 10.0, alpine, lambda n: 0.0, lambda n: np.zeros(n), tags=("box", "symmetric"))
_scalable("csendes", -1.0, 2.0, csendes, lambda n: 0.0, lambda n: np.zeros(n), tags=("box", "symmetric"))
_scalable("griewank", -600.0, 700.0, griewank, lambda n: 0.0, lambda n: np.zeros(n))
_scalable("rastrigin", -5.12, 6.12, rastrigin, lambda n: 0.0, lambda n: np.zeros(n), tags=("box", "symmetric"))
_scalable("styblinski_tang", -5.0, 5.0, styblinski_tang, lambda n: n * _ST_FSTAR_PER_DIM,
          lambda n: np.full(n, _ST_XSTAR), tags=("box", "symmetric"))
_scalable("sphere", -1.0, 2.0, sphere, lambda n: 0.0, lambda n: np.zeros(n), tags=("box", "symmetric"))
_scalable("zakharov", -5.0, 10.0, zakharov, lambda n: 0.0, lambda n: np.zeros(n))

_fixed("branin", [-5, 0], [10, 15], branin, 0.39788735772973816, [math.pi, 2.275])
_fixed("goldstein_price", [-2, -2], [2, 2], goldstein_price, 3.0, [0.0, -1.0])
_fixed("six_hump_camel", [-3, -2], [3, 2], six_hump_camel, -1.0316284534898774, [0.08984201368301331, -0.7126564032704135])
_fixed("shubert", [-10, -10], [10, 10], shubert, -186.7309088310240, [-7.08350641, 4.85805688])
_fixed("booth", [-10, -10], [10, 10], booth, 0.0, [1.0, 3.0])
_fixed("hartmann3", [0, 0, 0], [1, 1, 1], hartmann3, -3.86278214782076, [0.114614, 0.555649, 0.852547])
_fixed("hartmann6", [0] * 6, [1] * 6, hartmann6, -3.32236801141551,
       [0.20168952, 0.15001069, 0.47687398, 0.27533243, 0.31165162, 0.65730054])
_fixed("shekel5", [0] * 4, [10] * 4, _shekel(5), -10.1531996790582,
       [4.00003715092, 4.00013327435, 4.00003715092, 4.00013327435])
_fixed("shekel7", [0] * 4, [10] * 4, _shekel(7), -10.4029405668187,
       [4.00057291078, 4.00068936724, 3.99948971861, 3.99960615284])
_fixed("shekel10", [0] * 4, [10] * 4, _shekel(10), -10.5364098166920,
       [4.00074671494, 4.00059293053, 3.99966339611, 3.99950962546])

# linear constraints
_g, _lin = _linear_constraints([[1, 1], [-1, 1]], [2, 1])
_fixed("lc_quadratic", [0, 0], [3, 3], lambda x: (x[0] - 2) ** 2 + (x[1] - 1) ** 2, 0.5, [1.5, 0.5],
       tags=("linear",), g=_g, active=(0,), linear=_lin)
_g, _lin = _linear_constraints([[-1 / math.sqrt(3), 1], [-1, -math.sqrt(3)], [1, math.sqrt(3)]], [0, 0, 6])
_fixed("hs24", [0, 0], [6, 6], lambda x: ((x[0] - 3) ** 2 - 9) * x[1] ** 3 / (27 * math.sqrt(3)), -1.0,
       [3.0, math.sqrt(3)], tags=("linear",), g=_g, active=(0, 2), linear=_lin)
_g, _lin = _linear_constraints([[1, 2, 2]], [72])
_fixed("hs36", [0, 0, 0], [20, 11, 42], lambda x: -x[0] * x[1] * x[2], -3300.0, [20, 11, 15],
       tags=("linear",), g=_g, active=(0,), linear=_lin)
_g, _lin = _linear_constraints([[1, 2, 2], [-1, -2, -2]], [72, 0])
_fixed("hs37", [0, 0, 0], [42, 42, 42], lambda x: -x[0] * x[1] * x[2], -3456.0, [24, 12, 12],
       tags=("linear",), g=_g, active=(0,), linear=_lin)

# nonlinear constraints
_fixed("g06", [13, 0], [100, 100], lambda x: (x[0] - 10) ** 3 + (x[1] - 20) ** 3, -6961.81387558015,
       [14.09500000000000064, 0.8429607892154795668], tags=("nonlinear",),
       g=(lambda x: -(x[0] - 5) ** 2 - (x[1] - 5) ** 2 + 100, lambda x: (x[0] - 6) ** 2 + (x[1] - 5) ** 2 - 82.81),
       active=(0, 1))
_fixed("g08", [0, 0], [10, 10],
       lambda x: -math.sin(2 * math.pi * x[0]) ** 3 * math.sin(2 * math.pi * x[1]) / (x[0] ** 3 * (x[0] + x[1]))
       if x[0] > 0 else 0.0,
       -0.0958250414180359, [1.22797135260752599, 4.24537336612274885], tags=("nonlinear",),
       g=(lambda x: x[0] ** 2 - x[1] + 1, lambda x: 1 - x[0] + (x[1] - 4) ** 2))
_fixed("g24", [0, 0], [3, 4], lambda x: -x[0] - x[1], -5.508013271595, [2.329520197477607, 3.178493074365049],
       tags=("nonlinear",),
       g=(lambda x: -2 * x[0] ** 4 + 8 * x[0] ** 3 - 8 * x[0] ** 2 + x[1] - 2,
          lambda x: -4 * x[0] ** 4 + 32 * x[0] ** 3 - 88 * x[0] ** 2 + 96 * x[0] + x[1] - 36),
       active=(0, 1))
_fixed("g11", [-1, -1], [1, 1], lambda x: x[0] ** 2 + (x[1] - 1) ** 2, 0.75, [1 / math.sqrt(2), 0.5],
       tags=("nonlinear", "equality"), h=(lambda x: x[1] - x[0] ** 2,), active=(1,))

# engineering design problems
_fixed("tension_spring", [0.05, 0.25, 2], [0.2, 1.3, 15], spring_objective, 0.01267931,
       [0.05170517, 0.35710042, 11.28120672], tags=("nonlinear", "engineering"), g=_SPRING_G, active=(0, 1))
_fixed("three_bar_truss", [0, 0], [1, 1], truss_objective, 263.89584535, [0.78867512, 0.40824832],
       tags=("nonlinear", "engineering"), g=_TRUSS_G, active=(0,))
_fixed("speed_reducer", [2.6, 0.7, 17, 7.3, 7.8, 2.9, 5], [3.6, 0.8, 28, 8.3, 8.3, 3.9, 5.5], reducer_objective,
       2996.34817613, [3.5, 0.7, 17, 7.3, 7.8, 3.35021468, 5.28668323], tags=("nonlinear", "engineering"),
       g=_REDUCER_G, active=(4, 5, 7))
_fixed("pressure_vessel", [1, 0.625, 25, 25], [1.375, 1, 150, 240], vessel_objective, 7163.73957163,
       [1.1, 0.625, 56.99481866, 51.00125165], tags=("nonlinear", "engineering"), g=_VESSEL_G, active=(0, 2, 4))
_fixed("welded_beam", [0.1, 0.1, 0.1, 0.1], [2, 10, 10, 2], beam_objective, 1.72488430,
       [0.20572551, 3.47062057, 9.03666456, 0.20573141], tags=("nonlinear", "engineering"), g=_BEAM_G,
       active=(2,))

for _s in (1, 2, 3):
    for _T in (10, 100):
        _REGISTRY[f"regression_s{_s}_T{_T}"] = _Entry(
            (lambda s, T: lambda _n: build_regression_problem(_regression_config(s, T)))(_s, _T), None)

ENGINEERING = ("tension_spring", "three_bar_truss", "speed_reducer", "pressure_vessel", "welded_beam",
               "regression_s1_T10", "regression_s1_T100", "regression_s2_T10", "regression_s2_T100",
               "regression_s3_T10", "regression_s3_T100")

_HIDDEN_SUFFIX = "_hidden"


def problem_names() -> list[str]:
    """All registered names, including ``<name>_hidden`` wrappers of constrained problems."""
    names = sorted(_REGISTRY)
    hidden = [f"{k}{_HIDDEN_SUFFIX}" for k in names
              if _REGISTRY[k].dims is None and _REGISTRY[k].factory(None).is_constrained]
    return names + hidden


def lookup_problem(name: str, n: Optional[int] = None) -> ProblemSpec:
    """Instantiate a registered problem.

    ``n`` selects the dimension of scalable families (``rosenbrock``, ``alpine``,
    ``csendes``, ``griewank``, ...) and must be omitted (or match) for
    fixed-dimension problems.  Names ending in ``_hidden`` return the
    hidden-constraint wrapper of the corresponding constrained problem.
    """
    if name.endswith(_HIDDEN_SUFFIX) and name not in _REGISTRY:
        base = lookup_problem(name[: -len(_HIDDEN_SUFFIX)], n)
        if not base.is_constrained:
            raise ProblemError(f"{name}: only constrained problems have hidden wrappers")
        return hidden_wrapper(base)
    try:
        entry = _REGISTRY[name]
    except KeyError:
        raise ProblemError(f"unknown problem {name!r}") from None
    if entry.dims is None:
        spec = entry.factory(None)
        if n is not None and n != spec.n:
            raise ProblemError(f"{name} has fixed dimension {spec.n}, got n={n}")
        return spec
    n = entry.default_n if n is None else int(n)
    if n < 1:
        raise ProblemError(f"{name}: dimension must be positive")
    return entry.factory(n)


def list_problems(kind: Optional[str] = None, max_n: Optional[int] = None) -> list[ProblemSpec]:
    """Default instances of every registered problem, optionally filtered by class."""
    out = []
    for name in problem_names():
        spec = lookup_problem(name)
        if kind == "engineering":
            if "engineering" not in spec.tags:
                continue
        elif kind is not None and spec.problem_class != kind:
            continue
        if max_n is not None and spec.n > max_n:
            continue
        out.append(spec)
    return out


def parse_descriptor(text: str) -> ProblemSpec:
    """Select and re-bound a registered objective from a plain-text descriptor.

    Format: first non-comment line is the problem name, the second the
    dimension, followed by one ``lower upper`` pair per line::

        rosenbrock
        2
        -2 2
        -1 3
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if len(lines) < 2:
        raise ProblemError("descriptor needs a name and a dimension line")
    name = lines[0]
    try:
        n = int(lines[1])
    except ValueError:
        raise ProblemError(f"bad dimension line {lines[1]!r}") from None
    rows = lines[2:]
    if len(rows) != n:
        raise ProblemError(f"descriptor declares n={n} but lists {len(rows)} bound lines")
    try:
        bounds = np.array([[float(v) for v in row.replace(",", " ").split()] for row in rows])
    except ValueError:
        raise ProblemError("bound lines must hold two numbers") from None
    if bounds.shape != (n, 2):
        raise ProblemError("bound lines must hold two numbers")
    base = _REGISTRY.get(name)
    spec = lookup_problem(name, n if base is not None and base.dims is not None else None)
    if spec.n != n:
        raise ProblemError(f"{name} has dimension {spec.n}, descriptor says {n}")
    lower, upper = bounds[:, 0], bounds[:, 1]
    xstar, fstar = spec.known_xstar, spec.known_fstar
    if xstar is not None and (np.any(xstar < lower) or np.any(xstar > upper)):
        xstar, fstar = None, None
    return replace(spec, lower=lower, upper=upper, known_xstar=xstar, known_fstar=fstar,
                   active_constraints=spec.active_constraints if xstar is not None else (),
                   linear_data=spec.linear_data)
