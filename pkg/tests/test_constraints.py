import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from directlab.constraints import (
    ConstraintError,
    GlceState,
    HiddenConfig,
    glce_value,
    glce_values,
    glh_values,
    hidden_value,
    l1_value,
    nas_value,
    nas_values,
    phi,
    sub_step_due,
    update_glce_state,
)
from directlab.problems import evaluate_constraints, list_problems, lookup_problem


def test_l1_examples():
    assert l1_value(1, g=(0.5, -1), gamma=(10, 10)) == 6
    assert l1_value(2, h=(0.2,), gamma=(10,)) == pytest.approx(4)
    assert l1_value(3.5, g=(-1, 0), h=(0,), gamma=(1, 2, 3)) == 3.5
    with pytest.raises(ValueError):
        l1_value(1, g=(1,), gamma=(1, 2))
    with pytest.raises(ValueError):
        l1_value(1, g=(1,), gamma=(0,))


def test_phi_examples():
    assert phi((0.5, -1), (0.2,)) == pytest.approx(0.7)
    assert phi((-1, -2), ()) == 0
    truss = lookup_problem("three_bar_truss")
    g, h = evaluate_constraints(truss, [0.01, 0.01])
    assert phi(g, h) > 0


def test_phi_zero_exactly_on_feasible_points():
    rng = np.random.default_rng(4)
    for spec in list_problems("nonlinear") + list_problems("linear"):
        for _ in range(200):
            x = spec.lower + rng.random(spec.n) * (spec.upper - spec.lower)
            g, h = evaluate_constraints(spec, x)
            feasible = all(v <= 0 for v in g) and all(v == 0 for v in h)
            assert (phi(g, h) == 0) == feasible


def test_glce_branches():
    st_ = GlceState(f_best_feas=10, eps_phi=1e-8, eps_cons=1, have_feasible=True, phase="improve")
    assert glce_value(5, 0, st_) == 5
    assert glce_value(12, 0.3, st_) == pytest.approx(14.3)
    assert glce_value(9, 0.3, st_) == 9
    assert glce_value(9, 0.3, st_, "glc") == pytest.approx(9 + 0.3 + 1)
    with pytest.raises(ConstraintError):
        glce_value(1, 0, GlceState())


def test_glce_vectorized_matches_scalar():
    st_ = GlceState(f_best_feas=10, eps_phi=1e-8, eps_cons=0.5, have_feasible=True, phase="improve")
    f = np.array([5, 12, 9, 9, 11])
    p = np.array([0, 0.3, 0.3, 0.7, 1e-9])
    for mode in ("glc", "glce"):
        want = [glce_value(a, b, st_, mode) for a, b in zip(f, p)]
        assert glce_values(f, p, st_, mode).tolist() == pytest.approx(want)
    # before any feasible point the values are the violations themselves
    assert glce_values(f, p, GlceState()).tolist() == p.tolist()


@settings(max_examples=200, deadline=None)
@given(st.floats(-1e3, 1e3), st.floats(1e-6, 1e3), st.floats(-1e3, 1e3))
def test_glce_never_below_f_outside_band(f, p, fb):
    st_ = GlceState(f_best_feas=fb, eps_phi=1e-8, eps_cons=1e-8, have_feasible=True, phase="improve")
    assert glce_value(f, p, st_) >= f


def test_update_glce_state():
    s = GlceState()
    update_glce_state(s, [5.0, 7.0], [0.2, 0.1])
    assert s.phase == "find_feasible" and not s.have_feasible
    update_glce_state(s, [5.0, 7.0, 6.0], [0.2, 0.1, 0.0])
    assert s.phase == "improve" and s.f_best_feas == 6.0
    assert s.eps_cons == pytest.approx(min(0.2, 1e-2 * 7))  # capped band rule
    update_glce_state(s, [5.0, 7.0, 6.0, 3.0], [0.2, 0.1, 0.0, 0.0])
    assert s.f_best_feas == 3.0
    assert s.eps_cons == s.eps_phi  # no infeasible point with f <= 3
    assert s.eps_cons >= s.eps_phi


def test_hidden_values():
    cfg = HiddenConfig()
    assert hidden_value(None, "barrier") == 1e9
    assert hidden_value(2.5, "barrier") == 2.5
    assert hidden_value(None, "nas", neighbour_values=[158.5]) == pytest.approx(158.5 * (1 + 1e-6))
    assert hidden_value(None, "nas", neighbour_values=[], f_max=100) == 101
    assert hidden_value(math.nan, "glh", f_best=5, distance=0.25) == 5.25
    assert nas_value([-10.0], 0, cfg) == pytest.approx(-10 + 1e-5)
    with pytest.raises(ValueError):
        hidden_value(None, "other")
    with pytest.raises(ValueError):
        HiddenConfig(sub_base=1)


def test_nas_values_doubling_and_order_independence():
    centers = np.array([[0.5, 0.5], [0.1, 0.1]])
    halves = np.array([[1 / 6, 1 / 6], [1 / 18, 1 / 18]])
    feas = np.array([[0.7, 0.5], [0.5, 0.2]])
    fv = np.array([3.0, 7.0])
    out = nas_values(centers, halves, feas, fv, f_max=10)
    # first box reaches both samples after one doubling; the second reaches (0.5, 0.2) first
    assert out[0] == pytest.approx(3 * (1 + 1e-6))
    assert out[1] == pytest.approx(7 * (1 + 1e-6))
    rev = nas_values(centers[::-1], halves[::-1], feas, fv, f_max=10)
    assert rev[::-1].tolist() == out.tolist()
    assert nas_values(centers, halves, np.zeros((0, 2)), np.zeros(0), f_max=10).tolist() == [11, 11]


def test_glh_values():
    v = glh_values(np.array([[0.0, 0.0], [0.3, 0.4]]), 5.0, np.array([0.0, 0.0]))
    assert v.tolist() == pytest.approx([5.0, 5.5])


def test_sub_step_due():
    assert [k for k in range(1, 20) if sub_step_due(k, 2)] == [2, 4, 8, 16]
    assert sub_step_due(125, 5)
    assert not any(sub_step_due(1, b) for b in (2, 3, 5))
    for base in (2, 3, 5):
        bound = 1000
        assert sum(sub_step_due(k, base) for k in range(1, bound + 1)) == int(math.floor(math.log(bound, base) + 1e-12))
    with pytest.raises(ValueError):
        sub_step_due(4, 1)
