import dataclasses
import json
import math

import numpy as np
import pytest

from directlab import ALGORITHMS, RunConfig, catalog, lookup_problem, run
from directlab.problems import ProblemSpec
from directlab.solve import (
    FAILURE_SENTINEL,
    IncompatibleProblemError,
    ParallelPlan,
    StopState,
    _Solver,
    balanced_split,
    default_workers,
    export_trace,
    local_search,
    parallel_execute,
    percent_error,
    should_stop,
)

# a compatible problem for each algorithm, used for the catalog-wide checks
def _problem_for(alg):
    spec = catalog(alg)
    if spec.symmetric:
        return lookup_problem("rastrigin", 2)
    if "box" not in spec.classes:
        return lookup_problem("hs36")
    if spec.handler in ("nas", "barrier", "glh"):
        return lookup_problem("three_bar_truss_hidden")
    if spec.handler in ("l1", "glc", "glce"):
        return lookup_problem("g06")
    if spec.linear_cover:
        return lookup_problem("lc_quadratic")
    return lookup_problem("branin")


def test_catalog_names():
    assert len(ALGORITHMS) == 36
    assert catalog("Aggressive DIRECT").selection == "aggressive"
    assert catalog("Aggressive DIRECT").parameters == ()
    assert catalog("MrDIRECT075").epsilons == (1e-5, 1e-7, 0.0)
    assert catalog("DIRECT-GLce-min").hybrid != "none"
    assert catalog("DIRECT-l").measure == "longest_side" and catalog("DIRECT-l").per_group == "one_per_group"
    assert catalog("BIRMIN").partition == "bisect" and catalog("BIRMIN").gb
    assert catalog("DIRMIN").hybrid == "every"
    with pytest.raises(KeyError):
        catalog("nope")


def test_one_iteration_example():
    res = run(lookup_problem("rosenbrock", 2), RunConfig(max_iters=1))
    assert res.evals == 5 and res.f_min == pytest.approx(158.5, rel=1e-9) and res.status == "iter_capped"


def test_direct_solves_rosenbrock():
    res = run(lookup_problem("rosenbrock", 2), RunConfig())
    assert res.status == "solved" and res.f_min <= 1e-4
    assert res.x_min is not None and np.allclose(res.x_min, [1, 1], atol=0.05)


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_budget_of_one(alg):
    res = run(_problem_for(alg), RunConfig(algorithm=alg, max_evals=1))
    assert res.status == "budget_exceeded" and res.evals <= 1
    assert res.bench_evals == FAILURE_SENTINEL


@pytest.mark.parametrize("alg", ALGORITHMS)
def test_trace_invariants_and_determinism(alg):
    spec = _problem_for(alg)
    cfg = RunConfig(algorithm=alg, max_evals=400)
    a = run(spec, cfg)
    f = [r.f_min for r in a.trace]
    e = [r.evals for r in a.trace]
    assert all(y <= x for x, y in zip(f, f[1:]) if math.isfinite(x))
    assert e == sorted(e) and a.evals <= 400
    assert run(spec, cfg).trace_keys() == a.trace_keys()
    assert run(spec, dataclasses.replace(cfg, workers=3)).trace_keys() == a.trace_keys()


def _counting(spec):
    calls = {"n": 0}
    inner = spec.objective

    def obj(x):
        calls["n"] += 1
        return inner(x)

    return dataclasses.replace(spec, objective=obj), calls


@pytest.mark.parametrize("alg", ["DIRECT", "BIRECT", "DIRMIN", "ADC", "DISIMPL-V", "BIRMIN"])
def test_evaluation_accounting(alg):
    spec, calls = _counting(lookup_problem("six_hump_camel"))
    res = run(spec, RunConfig(algorithm=alg, max_evals=1500))
    assert calls["n"] == res.evals


def test_class_guard_before_evaluation():
    spec, calls = _counting(lookup_problem("g06"))
    with pytest.raises(IncompatibleProblemError):
        run(spec, RunConfig(algorithm="DIRECT"))
    with pytest.raises(IncompatibleProblemError):
        run(lookup_problem("g06"), RunConfig(algorithm="Lc-DISIMPL-C"))
    with pytest.raises(IncompatibleProblemError):
        run(lookup_problem("branin"), RunConfig(algorithm="glbSolve-sym"))
    assert calls["n"] == 0


def test_glce_on_box_is_direct_gl():
    spec = lookup_problem("branin")
    gl = run(spec, RunConfig(algorithm="DIRECT-GL", max_evals=600)).trace_keys()
    for alg in ("DIRECT-GLc", "DIRECT-GLce"):
        assert run(spec, RunConfig(algorithm=alg, max_evals=600)).trace_keys() == gl


def test_parallel_rosenbrock5():
    spec = lookup_problem("rosenbrock", 5)
    base = run(spec, RunConfig(algorithm="DIRECT-GL", max_evals=3000, workers=1)).trace_keys()
    for w in (2, 4):
        assert run(spec, RunConfig(algorithm="DIRECT-GL", max_evals=3000, workers=w)).trace_keys() == base


def test_backends_equivalent():
    spec = lookup_problem("hartmann3")
    a = run(spec, RunConfig(max_evals=2000, storage="static_pool")).trace_keys()
    b = run(spec, RunConfig(max_evals=2000, storage="dynamic")).trace_keys()
    assert a == b


def test_min_measure_goes_to_zero():
    spec = dataclasses.replace(lookup_problem("rosenbrock", 2), known_fstar=None)
    solver = _Solver(spec, RunConfig(workers=1))
    solver.initialize()
    mins = []
    for _ in range(150):
        solver.iters += 1
        solver.iterate()
        _, deltas, _, _ = solver.store.snapshot()
        mins.append(float(deltas.min()))
    for start in range(0, len(mins) - 50):
        window = mins[start:start + 50]
        assert min(window[1:]) < window[0]


def test_percent_error_examples():
    assert percent_error(1e-4, 0) == pytest.approx(1e-2)
    assert percent_error(266.5, 263.89584535) == pytest.approx(0.9868, abs=1e-4)
    assert percent_error(-4.9, -5) == pytest.approx(2.0)
    cfg = RunConfig()
    assert should_stop(StopState(10, 1, 0.0, 1e-4, 0.0), cfg) == "solved"
    assert should_stop(StopState(10, 1, 0.0, 266.5, 263.89584535), cfg) is None
    assert should_stop(StopState(cfg.max_evals, 1, 0.0, 1.0, None), cfg) == "budget_exceeded"
    assert should_stop(StopState(1, 5, 0.0, 1.0, None), dataclasses.replace(cfg, max_iters=5)) == "iter_capped"
    assert should_stop(StopState(1, 5, 3.0, 1.0, None), dataclasses.replace(cfg, max_time=2.0)) == "time_exceeded"


def test_local_search_contract():
    spec = lookup_problem("rosenbrock", 2)
    x, f, used = local_search(spec, [2.5, 2.5], 500)
    assert f < 1408.5 and used <= 500 and np.all(x >= spec.lower) and np.all(x <= spec.upper)
    x, f, used = local_search(spec, [1.0, 1.0], 100)
    assert f == 0 and list(x) == [1, 1]
    x, f, used = local_search(spec, [2.5, 2.5], 0)
    assert list(x) == [2.5, 2.5] and used == 0


def test_local_search_constrained():
    spec = lookup_problem("three_bar_truss")
    x0 = np.array([0.9, 0.6])
    x, merit, used = local_search(spec, x0, 300)
    assert used <= 300 and np.all(x >= spec.lower) and np.all(x <= spec.upper)
    assert merit <= spec.objective(x0)


def test_balanced_split_and_plan():
    assert [len(s) for s in balanced_split(10, 4)] == [3, 3, 2, 2]
    shares = ParallelPlan.for_count(10, 4).split
    assert np.concatenate(shares).tolist() == list(range(10))
    with pytest.raises(ValueError):
        balanced_split(3, 0)


def test_parallel_execute_order():
    from concurrent.futures import ThreadPoolExecutor

    plan = ParallelPlan.for_count(7, 3)
    items = list(range(7))

    def body(share):
        return [items[i] * 10 for i in share]

    with ThreadPoolExecutor(3) as ex:
        assert parallel_execute(plan, items, body, ex) == [0, 10, 20, 30, 40, 50, 60]
    assert parallel_execute(plan, items, body) == [0, 10, 20, 30, 40, 50, 60]


def test_export_trace(tmp_path):
    res = run(lookup_problem("branin"), RunConfig(max_iters=3))
    path = tmp_path / "t.jsonl"
    export_trace(res, path)
    recs = [json.loads(line) for line in path.read_text().splitlines()]
    assert [r["iteration"] for r in recs] == list(range(4))
    assert set(recs[0]) == {"iteration", "evals", "f_min", "elapsed_s"}


def test_run_config_validation(monkeypatch):
    with pytest.raises(ValueError):
        RunConfig(max_evals=0)
    with pytest.raises(ValueError):
        RunConfig(workers=0)
    with pytest.raises(ValueError):
        RunConfig(epsilon=-1)
    monkeypatch.setenv("DIRECTLAB_WORKERS", "3")
    assert default_workers() == 3 and RunConfig().rho == 3
    assert RunConfig(workers=2).rho == 2


def test_hidden_handlers_solve_truss():
    spec = lookup_problem("three_bar_truss_hidden")
    for alg in ("DIRECT-GLh", "DIRECT-Barrier", "subDIRECT-Barrier"):
        assert run(spec, RunConfig(algorithm=alg, max_evals=20000)).solved, alg


def test_constrained_handlers():
    for alg, prob in [("DIRECT-GLce", "g06"), ("DIRECT-L1", "hs36"), ("Lc-DISIMPL-V", "hs36"),
                      ("DIRECT-GLce-min", "g11")]:
        res = run(lookup_problem(prob), RunConfig(algorithm=alg, max_evals=20000))
        assert res.solved, (alg, prob, res.status, res.f_min)


def test_evaluation_errors_propagate():
    def boom(x):
        raise RuntimeError("model crashed")

    spec = ProblemSpec("boom", [0.0], [1.0], boom)
    with pytest.raises(RuntimeError):
        run(spec, RunConfig())
