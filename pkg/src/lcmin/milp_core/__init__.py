"""Minimal exact MILP engine: bounded revised simplex + branch and bound.

The engine sits behind plain functions (`solve_lp`, `solve_milp`) so an
external solver can be swapped in through LP-file export and solution-text
import without touching the problem builders.
"""

from .model import (BINARY, CONTINUOUS, INTEGER, Constraint, MilpModel,
                    Variable, check_solution)
from .simplex import LpSolution, NumericalError, solve_lp
from .branch_bound import MilpSolution, solve_milp
from .lp_format import export_lp_text, parse_solution_text

__all__ = [
    "BINARY", "CONTINUOUS", "INTEGER", "Constraint", "MilpModel", "Variable",
    "check_solution", "LpSolution", "NumericalError", "solve_lp",
    "MilpSolution", "solve_milp", "export_lp_text", "parse_solution_text",
]
