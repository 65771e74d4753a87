import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from directlab import partition as P
from directlab.selection import (
    W_CYCLE,
    GbState,
    LevelState,
    SelectionContext,
    SelectionView,
    as_view,
    gb_filter,
    gb_update,
    level_step,
    restart_epsilon_update,
    select_convex_hull,
    select_gl,
    select_group_extremes,
    symmetric_discard,
    update_statistics,
)

from oracles import brute_force_poh, thirteen_store, random_view


def _vals(store, ids):
    return sorted(round(store.get(i).values[0], 2) for i in ids)


@pytest.fixture(scope="module")
def thirteen():
    return thirteen_store()


def test_thirteen_groups(thirteen):
    store, _ = thirteen
    groups = store.groups()
    assert [round(d, 4) for d, _ in groups] == [0.0786, 0.1757, 0.2357]
    assert [len(m) for _, m in groups] == [3, 2, 8]
    assert store.min_f_in_group(0.1757) == pytest.approx(19.61, abs=5e-3)


def test_thirteen_hull(thirteen):
    store, ctx = thirteen
    assert _vals(store, select_convex_hull(store, ctx)) == [19.61, 168.5]


def test_thirteen_extremes(thirteen):
    store, _ = thirteen
    assert _vals(store, select_group_extremes(store, "aggressive")) == [19.61, 158.5, 168.5]
    assert _vals(store, select_group_extremes(store, "plor")) == [158.5, 168.5]


def test_thirteen_gl(thirteen):
    store, ctx = thirteen
    g = select_gl(store, ctx, "G")
    assert _vals(store, g) == [19.61, 168.5]
    both = select_gl(store, ctx, "GL")
    assert set(g) <= set(both)
    # the incumbent's own element is in the L scan (distance zero)
    inc = int(store.ids()[np.argmin(store.snapshot()[2])])
    assert inc in select_gl(store, ctx, "L")
    # ordered by measure descending, then id
    deltas = [store.get(i).delta for i in both]
    assert deltas == sorted(deltas, reverse=True)


def test_thirteen_gb_filter(thirteen):
    store, ctx = thirteen
    local = SelectionContext(gb_state=GbState(phase="global", delta_gb=0.2))
    view = gb_filter(store, local)
    assert {round(d, 4) for d in view.delta} == {0.2357}
    assert len(gb_filter(store, SelectionContext())) == 13


def test_single_element():
    view = SelectionView([7], [0.5], [3.0])
    ctx = SelectionContext(f_best=3.0)
    assert select_convex_hull(view, ctx) == [7]
    assert select_group_extremes(view, "aggressive") == [7]
    assert select_group_extremes(view, "plor") == [7]


def test_median_shift_example():
    rng = np.random.default_rng(3)
    view = random_view(rng, 20, distinct=5)
    ctx = SelectionContext(epsilon=1e-2, f_best=view.f.min(), f_median=float(np.median(view.f)))
    base = select_convex_hull(view, ctx, scaling="median")
    shifted = SelectionView(view.ids, view.delta, view.f + 1000)
    ctx2 = SelectionContext(epsilon=1e-2, f_best=shifted.f.min(), f_median=float(np.median(shifted.f)))
    assert sorted(select_convex_hull(shifted, ctx2, scaling="median")) == sorted(base)


def test_one_per_group_keeps_lowest_id():
    view = SelectionView([5, 2, 9], [0.5, 0.5, 0.5], [1.0, 1.0, 1.0])
    ctx = SelectionContext(f_best=1.0)
    assert sorted(select_convex_hull(view, ctx)) == [2, 5, 9]
    assert select_convex_hull(view, ctx, per_group="one_per_group") == [2]


def test_update_statistics():
    ctx = SelectionContext()
    update_statistics(ctx, [1.0, 2.0, np.nan, 9.0])
    assert ctx.f_median == 2.0 and ctx.f_average == 4.0


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2 ** 32 - 1), st.sampled_from([0.0, 1e-4, 1e-2]))
def test_hull_matches_oracle(size, seed, eps):
    view = random_view(np.random.default_rng(seed), size)
    ctx = SelectionContext(epsilon=eps, f_best=float(view.f.min()))
    assert sorted(select_convex_hull(view, ctx)) == sorted(brute_force_poh(view, eps))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(0, 2 ** 32 - 1))
def test_aggressive_contains_hull(size, seed):
    view = random_view(np.random.default_rng(seed), size, ties=False)
    ctx = SelectionContext(epsilon=0.0, f_best=float(view.f.min()))
    hull = set(select_convex_hull(view, ctx))
    assert hull <= set(select_group_extremes(view, "aggressive"))
    plor = select_group_extremes(view, "plor")
    n_groups = len(set(view.delta.tolist()))
    assert len(plor) == (1 if n_groups == 1 else 2)
    assert hull  # never empty on a nonempty partition


def test_level_cycle():
    ctx = SelectionContext(level_state=LevelState())
    view = SelectionView(np.arange(10), np.full(10, 0.5), np.arange(10.0))
    levels = [level_step(view, ctx)[0] for _ in range(16)]
    assert "".join(map(str, levels[:8])) == W_CYCLE
    assert levels[8:] == levels[:8]


def test_level_filters():
    view = SelectionView(np.arange(10), np.full(10, 0.5), np.arange(10.0))
    ctx = SelectionContext(level_state=LevelState(position=1, epsilons=(1e-5, 1e-7, 0.0)))
    level, v1, eps = level_step(view, ctx)
    assert level == 1 and len(v1) == 9 and 9 not in v1.ids.tolist() and eps == 1e-7
    level, v0, eps = level_step(view, ctx)
    assert level == 0 and v0.ids.tolist() == [0] and eps == 0.0


def test_restart_epsilon():
    ctx = SelectionContext(epsilon=0.0)
    eps = [restart_epsilon_update(ctx, False) for _ in range(5)]
    assert eps[:4] == [0.0] * 4 and eps[4] == 0.01
    assert restart_epsilon_update(ctx, True) == 0.0 and ctx.restart_state.counter == 0


def test_gb_state_machine():
    ctx = SelectionContext()
    for _ in range(9):
        gb_update(ctx, False, 0.1)
    assert ctx.gb_state.phase == "usual"
    gb_update(ctx, False, 0.1)
    assert ctx.gb_state.phase == "global" and ctx.gb_state.delta_gb == pytest.approx(0.4)
    gb_update(ctx, True, 0.05)
    assert ctx.gb_state.phase == "usual"


def test_symmetric_discard():
    def rect(lo, hi):
        lo, hi = np.array(lo, float), np.array(hi, float)
        return P.HyperRect(lo=lo, hi=hi, levels=np.zeros(2, int), base=3, samples=((lo + hi) / 2)[None, :])

    assert not symmetric_discard(rect([0, 2 / 3], [1 / 3, 1]))
    assert symmetric_discard(rect([2 / 3, 0], [1, 1 / 3]))
    assert not symmetric_discard(rect([0, 0], [1, 1]))
    touching = rect([1 / 3, 0], [2 / 3, 1 / 3])
    assert not symmetric_discard(touching, strict=True)
    assert symmetric_discard(touching, strict=False)


def test_as_view_excludes(thirteen):
    store, _ = thirteen
    store2, _ = thirteen_store("dynamic")
    eid = int(store2.ids()[0])
    store2.set_excluded(eid, True)
    assert eid not in as_view(store2).ids.tolist()
    assert len(as_view(store)) == 13
