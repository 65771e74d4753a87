"""Turning constrained and hidden-constraint problems into plain values.

Explicit constraints are folded in with the L1 penalty or with the
auxiliary functions of the GLc/GLce schemes.  Hidden constraints (the
objective simply fails) are handled by a barrier value, neighbourhood
assignment (NAS) or a distance-to-incumbent value (GLh).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "GlceState",
    "HiddenConfig",
    "l1_value",
    "phi",
    "glce_value",
    "glce_values",
    "update_glce_state",
    "hidden_value",
    "nas_value",
    "nas_values",
    "glh_values",
    "sub_step_due",
    "ConstraintError",
]


class ConstraintError(RuntimeError):
    pass


@dataclass
class GlceState:
    f_best_feas: float = math.inf
    eps_phi: float = 1e-8
    eps_cons: float = 1e-8
    phase: str = "find_feasible"
    have_feasible: bool = False

    def __post_init__(self):
        self.eps_cons = max(self.eps_cons, self.eps_phi)


@dataclass(frozen=True)
class HiddenConfig:
    barrier_value: float = 1e9
    nas_epsilon: float = 1e-6
    nas_lambda: float = 1.0
    sub_base: int = 2

    def __post_init__(self):
        if self.sub_base < 2:
            raise ValueError("sub_base must be at least 2")


def l1_value(f: float, g: Sequence[float] = (), h: Sequence[float] = (), gamma=None) -> float:
    """Exact L1 penalty ``f + sum max(gamma_i g_i, 0) + sum gamma_{m+i} |h_i|``."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    if gamma is None:
        gamma = np.full(g.size + h.size, 1e3)
    gamma = np.asarray(gamma, dtype=float)
    if gamma.size != g.size + h.size:
        raise ValueError("gamma needs one weight per constraint")
    if np.any(gamma <= 0):
        raise ValueError("penalty weights must be positive")
    return float(f + np.sum(np.maximum(gamma[: g.size] * g, 0.0)) + np.sum(gamma[g.size:] * np.abs(h)))


def phi(g: Sequence[float] = (), h: Sequence[float] = ()) -> float:
    """Total constraint violation."""
    g = np.asarray(g, dtype=float)
    h = np.asarray(h, dtype=float)
    return float(np.sum(np.maximum(g, 0.0)) + np.sum(np.abs(h)))


def glce_value(f: float, phi_x: float, state: GlceState, mode: str = "glce") -> float:
    if not state.have_feasible:
        raise ConstraintError("auxiliary values need a feasible incumbent; minimize phi first")
    if phi_x <= state.eps_phi:
        return float(f)
    if mode == "glce" and f <= state.f_best_feas and phi_x <= state.eps_cons:
        return float(f)
    if mode not in ("glce", "glc"):
        raise ValueError(f"unknown mode {mode!r}")
    return float(f + phi_x + abs(f - state.f_best_feas))


def glce_values(f: np.ndarray, phi_x: np.ndarray, state: GlceState, mode: str = "glce") -> np.ndarray:
    """Vectorized :func:`glce_value`; before the first feasible point the values are ``phi``."""
    f = np.asarray(f, dtype=float)
    phi_x = np.asarray(phi_x, dtype=float)
    if not state.have_feasible:
        return phi_x.copy()
    out = f + phi_x + np.abs(f - state.f_best_feas)
    keep = phi_x <= state.eps_phi
    if mode == "glce":
        keep |= (f <= state.f_best_feas) & (phi_x <= state.eps_cons)
    out[keep] = f[keep]
    return out


def update_glce_state(state: GlceState, f, phi_x) -> GlceState:
    """Fold all points sampled so far into the state.

    ``eps_cons`` becomes the smallest violation among infeasible points whose
    objective does not exceed the best feasible value, capped at
    ``1e-2 (|f_best_feas| + 1)`` and floored at ``eps_phi``.
    """
    f = np.asarray(f, dtype=float)
    phi_x = np.asarray(phi_x, dtype=float)
    feas = phi_x <= state.eps_phi
    if np.any(feas):
        state.f_best_feas = min(state.f_best_feas, float(np.min(f[feas])))
        state.have_feasible = True
        state.phase = "improve"
    if state.have_feasible:
        band = (~feas) & (f <= state.f_best_feas)
        if np.any(band):
            cap = 1e-2 * (abs(state.f_best_feas) + 1.0)
            state.eps_cons = max(state.eps_phi, min(float(np.min(phi_x[band])), cap))
        else:
            state.eps_cons = state.eps_phi
    return state


def nas_value(neighbour_values: Sequence[float], f_max: float, cfg: HiddenConfig = HiddenConfig()) -> float:
    """Value for an infeasible element from the feasible values found around it."""
    vals = [v for v in neighbour_values if math.isfinite(v)]
    if not vals:
        return float(f_max + cfg.nas_lambda)
    v = min(vals)
    return float(v + cfg.nas_epsilon * abs(v))


def nas_values(centers: np.ndarray, half_widths: np.ndarray, feas_points: np.ndarray, feas_values: np.ndarray,
               f_max: float, cfg: HiddenConfig = HiddenConfig()) -> np.ndarray:
    """NAS values for a batch of infeasible elements.

    Each element box (center ``c``, half widths ``h``) is doubled about ``c``
    until it contains a feasible sample; clipping to the unit cube does not
    change which samples are inside because all samples lie in the cube.  The
    doubling factor needed is the smallest power of two not below
    ``max_j |p_j - c_j| / h_j`` over the nearest feasible sample ``p``.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    half_widths = np.atleast_2d(np.asarray(half_widths, dtype=float))
    out = np.empty(centers.shape[0])
    feas_points = np.asarray(feas_points, dtype=float).reshape(-1, centers.shape[1])
    feas_values = np.asarray(feas_values, dtype=float)
    if feas_points.shape[0] == 0:
        out[:] = f_max + cfg.nas_lambda
        return out
    for i in range(centers.shape[0]):
        ratio = np.max(np.abs(feas_points - centers[i]) / half_widths[i], axis=1)
        k = max(1, math.ceil(math.log2(max(float(ratio.min()), 1e-300))))
        scale = 2.0 ** k
        # the enlarged box with side 2^k h reaches points with ratio <= 2^k
        inside = ratio <= scale * (1 + 1e-12)
        while not np.any(inside):  # pragma: no cover - guarded by the choice of k
            scale *= 2
            inside = ratio <= scale
        out[i] = nas_value(feas_values[inside], f_max, cfg)
    return out


def glh_values(points: np.ndarray, f_best: float, x_best: np.ndarray) -> np.ndarray:
    """Value of infeasible samples: incumbent value plus distance to the incumbent point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return f_best + np.linalg.norm(pts - np.asarray(x_best, float), axis=1)


def hidden_value(outcome: Optional[float], handler: str, cfg: HiddenConfig = HiddenConfig(), *,
                 neighbour_values: Sequence[float] = (), f_max: float = math.nan,
                 f_best: float = math.nan, distance: float = math.nan) -> float:
    """Value of one sample under a hidden-constraint handler.

    ``outcome`` is the objective value, or ``None``/NaN when the point is
    infeasible.  Feasible outcomes pass through unchanged.
    """
    if outcome is not None and not (isinstance(outcome, float) and math.isnan(outcome)):
        return float(outcome)
    if handler == "barrier":
        return float(cfg.barrier_value)
    if handler == "nas":
        return nas_value(neighbour_values, f_max, cfg)
    if handler == "glh":
        return float(f_best + distance)
    raise ValueError(f"unknown hidden handler {handler!r}")


def sub_step_due(iteration: int, base: int = 2) -> bool:
    """True when ``iteration`` is a positive power of ``base``."""
    if base < 2:
        raise ValueError("base must be at least 2")
    if iteration < base:
        return False
    k = iteration
    while k % base == 0:
        k //= base
    return k == 1
