"""DIRECT-type derivative-free global optimization.

Modules:

- ``problems``: problem model and the built-in registry
- ``partition``: unit-cube geometry, subdivision schemes and element stores
- ``selection``: potentially optimal element selection strategies
- ``constraints``: penalty, auxiliary-function and hidden-constraint handlers
- ``solve``: the main loop and the named algorithm catalog
- ``bench``: benchmark suites, aggregate reports and performance profiles
"""

from .problems import ProblemSpec, RegressionConfig, lookup_problem, list_problems, problem_names
from .solve import ALGORITHMS, RunConfig, RunResult, catalog, run

__all__ = [
    "ProblemSpec",
    "RegressionConfig",
    "lookup_problem",
    "list_problems",
    "problem_names",
    "ALGORITHMS",
    "RunConfig",
    "RunResult",
    "catalog",
    "run",
]

__version__ = "0.1.0"
