"""Machine form of a mixed-integer linear program."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import ModelError

CONTINUOUS = "continuous"
BINARY = "binary"
INTEGER = "integer"

_SENSES = ("<=", "=", ">=")
INF = math.inf


@dataclass
class Variable:
    index: int
    name: str
    kind: str
    lb: float
    ub: float


@dataclass
class Constraint:
    index: int
    name: str
    coeffs: list          # [(var_index, coefficient), ...]
    sense: str            # one of "<=", "=", ">="
    rhs: float


@dataclass
class MilpModel:
    """Variables, linear constraints and a minimization objective.

    The objective sense is always minimize; callers negate coefficients for
    maximization.  ``entity`` maps variable indices back to whatever network
    object they stand for.
    """

    name: str = "model"
    variables: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)   # var index -> coefficient
    entity: dict = field(default_factory=dict)      # var index -> domain object

    def add_var(self, name=None, kind=CONTINUOUS, lb=0.0, ub=INF, entity=None) -> int:
        if kind not in (CONTINUOUS, BINARY, INTEGER):
            raise ModelError(f"unknown variable kind {kind!r}")
        if kind == BINARY:
            lb, ub = max(0.0, lb), min(1.0, ub)
        if lb > ub:
            raise ModelError(f"variable {name!r}: lb {lb} > ub {ub}")
        idx = len(self.variables)
        self.variables.append(Variable(idx, name or f"x{idx}", kind, float(lb), float(ub)))
        if entity is not None:
            self.entity[idx] = entity
        return idx

    def add_constraint(self, coeffs, sense, rhs, name=None) -> int:
        if sense not in _SENSES:
            raise ModelError(f"unknown constraint sense {sense!r}")
        coeffs = [(int(j), float(a)) for j, a in
                  (coeffs.items() if isinstance(coeffs, dict) else coeffs)]
        for j, _a in coeffs:
            if not 0 <= j < len(self.variables):
                raise ModelError(f"constraint {name!r} references unknown variable {j}")
        idx = len(self.constraints)
        self.constraints.append(Constraint(idx, name or f"c{idx}", coeffs, sense, float(rhs)))
        return idx

    def set_objective(self, coeffs) -> None:
        coeffs = dict(coeffs) if isinstance(coeffs, dict) else {j: a for j, a in coeffs}
        for j in coeffs:
            if not 0 <= j < len(self.variables):
                raise ModelError(f"objective references unknown variable {j}")
        self.objective = {int(j): float(a) for j, a in coeffs.items() if a != 0.0}

    @property
    def num_vars(self) -> int:
        return len(self.variables)

    @property
    def num_constraints(self) -> int:
        return len(self.constraints)

    def integer_indices(self) -> list:
        return [v.index for v in self.variables if v.kind in (BINARY, INTEGER)]

    def objective_value(self, x) -> float:
        return sum(a * x[j] for j, a in self.objective.items())

    def validate(self) -> None:
        for v in self.variables:
            if v.lb > v.ub:
                raise ModelError(f"variable {v.name}: lb {v.lb} > ub {v.ub}")
            if v.kind == BINARY and (v.lb < 0 or v.ub > 1):
                raise ModelError(f"binary {v.name} has bounds outside [0,1]")


def check_solution(model: MilpModel, x, tol: float = 1e-6) -> list:
    """Violated bounds/constraints/integralities; [] when x is feasible.

    Independent of the simplex machinery on purpose: incumbents are audited
    with this before being accepted.
    """
    bad = []
    for v in model.variables:
        val = x[v.index]
        if val < v.lb - tol or val > v.ub + tol:
            bad.append(f"bound: {v.name}={val} outside [{v.lb}, {v.ub}]")
        if v.kind in (BINARY, INTEGER) and abs(val - round(val)) > tol:
            bad.append(f"integrality: {v.name}={val}")
    for c in model.constraints:
        lhs = sum(a * x[j] for j, a in c.coeffs)
        if c.sense == "<=" and lhs > c.rhs + tol:
            bad.append(f"row {c.name}: {lhs} > {c.rhs}")
        elif c.sense == ">=" and lhs < c.rhs - tol:
            bad.append(f"row {c.name}: {lhs} < {c.rhs}")
        elif c.sense == "=" and abs(lhs - c.rhs) > tol:
            bad.append(f"row {c.name}: {lhs} != {c.rhs}")
    return bad
