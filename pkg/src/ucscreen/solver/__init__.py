"""Dense LP / mixed-binary LP engine: revised simplex plus branch-and-bound."""

from .bnb import solve, solve_milp
from .model import EQ, GE, INF, LE, LinearProgram, SolveOutcome, Status
from .simplex import TOL_FEAS, TOL_OPT, solve_lp

__all__ = [
    "EQ", "GE", "INF", "LE", "LinearProgram", "SolveOutcome", "Status",
    "TOL_FEAS", "TOL_OPT", "solve", "solve_lp", "solve_milp",
]
