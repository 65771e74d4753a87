"""Minimize a registered test function with DIRECT and a couple of its relatives."""

from directlab import RunConfig, lookup_problem, run

spec = lookup_problem("rosenbrock", 2)
for alg in ("DIRECT", "DIRECT-l", "BIRECT", "DIRECT-GL"):
    res = run(spec, RunConfig(algorithm=alg))
    print(f"{alg:<10} status={res.status:<16} f={res.f_min:.3e} evals={res.evals} x={res.x_min}")
