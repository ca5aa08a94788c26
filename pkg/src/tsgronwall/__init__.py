"""Explicit Gronwall-type bounds on finite time scales, checked against exact solutions."""

from .bounds import (
    BoundReport,
    lemma_bound,
    thm21_bound,
    thm31_estimate,
    thm32_estimate,
    thm33_estimate,
)
from .calculus import ScaleFunction, delta_exp, delta_integral, is_positively_regressive
from .expr import Expression, parse_expression
from .gridfun import (
    Domain2,
    Domain3,
    GridFunction2,
    GridFunction3,
    inner_double,
    tabulate2,
    tabulate3,
    triple_cumulative,
)
from .oracle import (
    KernelSpec,
    check_dominance,
    residual_k,
    residual_kbar,
    solve_volterra_2d,
    solve_volterra_3d,
)
from .runner import Problem, evaluate, run_fuzz, verify
from .scenario import build_problem, load_scenario, load_scenario_file
from .timescale import TimeScale, jump, make_scale, refine

__version__ = "0.1.0"
