"""The three-bar truss, first with explicit constraints and then with them hidden.

With explicit constraints the handler sees constraint values; in the hidden
variant an infeasible point only returns NaN, so the handler has to work from
feasibility alone.
"""

from directlab import RunConfig, lookup_problem, run

explicit = lookup_problem("three_bar_truss")
hidden = lookup_problem("three_bar_truss_hidden")
print(f"target f* = {explicit.known_fstar}")

for alg in ("DIRECT-L1", "DIRECT-GLce", "DIRECT-GLce-min"):
    res = run(explicit, RunConfig(algorithm=alg, max_evals=20000))
    print(f"explicit {alg:<18} {res.status:<16} f={res.f_min:.6f} evals={res.evals}")

for alg in ("DIRECT-NAS", "DIRECT-Barrier", "DIRECT-GLh"):
    res = run(hidden, RunConfig(algorithm=alg, max_evals=20000))
    print(f"hidden   {alg:<18} {res.status:<16} f={res.f_min:.6f} evals={res.evals}")
