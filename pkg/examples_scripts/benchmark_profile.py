"""Run a small box-constrained benchmark and write a report plus a performance profile.

Usage: python benchmark_profile.py [output_dir]
"""

import sys
from pathlib import Path

from directlab import RunConfig
from directlab.bench import emit_csv, emit_profile_csv, emit_profile_svg, emit_report, perf_profile, run_suite

out = Path(sys.argv[1] if len(sys.argv) > 1 else "bench_out")
out.mkdir(exist_ok=True)

algs = ["DIRECT", "DIRECT-l", "BIRECT", "DIRECT-GL"]
problems = ["branin", "six_hump_camel", "goldstein_price", "hartmann3", "shekel5", "booth"]
suite = run_suite(algs, problems, RunConfig(max_evals=20000, max_time=10))

emit_csv(suite.rows, out / "results.csv")
print(emit_report(suite.rows, out / "report.txt"))

prof = perf_profile(suite.matrix("fevals"))
emit_profile_svg(prof, out / "profile.svg", title="function evaluations")
emit_profile_csv(prof, out / "profile.csv")
for s, name in enumerate(prof.solvers):
    print(f"{name:<10} fastest on {prof.chi[s, 0]:.0%}, solved {prof.chi[s, -1]:.0%}")
