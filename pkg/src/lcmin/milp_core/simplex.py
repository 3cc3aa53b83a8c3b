"""Bounded-variable revised simplex.

Phase 1 minimizes total bound infeasibility of the basic variables
(composite method, works from any starting basis, which is what the
branch-and-bound warm starts need); phase 2 minimizes the true objective.
The basis inverse is kept as a sparse LU factorization plus a product-form
eta file, refactorized periodically.  Pricing is Dantzig with a Bland
fallback after a run of degenerate steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ..errors import LcminError
from .model import BINARY, INTEGER, MilpModel

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

BASIC, NB_LB, NB_UB, NB_FREE = 0, 1, 2, 3

FEAS_TOL = 1e-7
COST_TOL = 1e-7
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 80
BLAND_AFTER = 60


class NumericalError(LcminError):
    """Simplex broke down numerically; message carries diagnostics."""


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None
    objective: float | None
    iterations: int


class StandardLp:
    """min c z s.t. [A|I] z = b, lb <= z <= ub (integrality relaxed).

    Columns 0..n-1 are the model's structural variables, n..n+m-1 the row
    slacks ('<=' rows get s in [0, inf), '>=' rows s in (-inf, 0], '=' rows
    s fixed at 0).
    """

    def __init__(self, model: MilpModel):
        model.validate()
        n = model.num_vars
        m = model.num_constraints
        self.n_struct = n
        self.m = m
        self.n_total = n + m

        self.c = np.zeros(self.n_total)
        for j, a in model.objective.items():
            self.c[j] = a
        self.lb = np.full(self.n_total, -math.inf)
        self.ub = np.full(self.n_total, math.inf)
        for v in model.variables:
            self.lb[v.index] = v.lb
            self.ub[v.index] = v.ub
        self.b = np.zeros(m)

        rows, cols, vals = [], [], []
        for i, con in enumerate(model.constraints):
            acc = {}
            for j, a in con.coeffs:
                acc[j] = acc.get(j, 0.0) + a
            for j, a in acc.items():
                if a != 0.0:
                    rows.append(i)
                    cols.append(j)
                    vals.append(a)
            rows.append(i)
            cols.append(n + i)
            vals.append(1.0)
            self.b[i] = con.rhs
            if con.sense == "<=":
                self.lb[n + i], self.ub[n + i] = 0.0, math.inf
            elif con.sense == ">=":
                self.lb[n + i], self.ub[n + i] = -math.inf, 0.0
            else:
                self.lb[n + i], self.ub[n + i] = 0.0, 0.0
        self.A = sp.csc_matrix((vals, (rows, cols)), shape=(m, self.n_total))
        self.AT = self.A.T.tocsr()
        self.integers = np.array(
            [v.index for v in model.variables if v.kind in (BINARY, INTEGER)],
            dtype=np.int64)

    def column(self, j: int) -> np.ndarray:
        out = np.zeros(self.m)
        s, e = self.A.indptr[j], self.A.indptr[j + 1]
        out[self.A.indices[s:e]] = self.A.data[s:e]
        return out


class _Factor:
    """B^-1 as sparse LU of a snapshot basis plus product-form etas."""

    def __init__(self, lp: StandardLp, basis: np.ndarray):
        self.lp = lp
        self.rebuild(basis)

    def rebuild(self, basis: np.ndarray):
        B = self.lp.A[:, basis].tocsc()
        try:
            self.lu = splu(B)
        except (RuntimeError, ValueError) as exc:
            raise NumericalError(f"basis factorization failed: {exc}") from exc
        self.eta_r: list = []
        self.eta_w: list = []

    @property
    def age(self) -> int:
        return len(self.eta_r)

    def ftran(self, v: np.ndarray) -> np.ndarray:
        y = self.lu.solve(v)
        for r, w in zip(self.eta_r, self.eta_w):
            alpha = y[r] / w[r]
            y -= alpha * w
            y[r] = alpha
        return y

    def btran(self, v: np.ndarray) -> np.ndarray:
        y = v.copy()
        for r, w in zip(reversed(self.eta_r), reversed(self.eta_w)):
            y[r] -= (w @ y - y[r]) / w[r]
        return self.lu.solve(y, trans="T")

    def push(self, r: int, w: np.ndarray):
        if abs(w[r]) < PIVOT_TOL:
            raise NumericalError(f"pivot element {w[r]:.3e} below tolerance")
        self.eta_r.append(int(r))
        self.eta_w.append(w.copy())


class BoundedSimplex:
    """One solve of a StandardLp with optional bound overrides."""

    def __init__(self, lp: StandardLp, lb: np.ndarray | None = None,
                 ub: np.ndarray | None = None, max_iter: int | None = None):
        self.lp = lp
        self.lb = lp.lb if lb is None else lb
        self.ub = lp.ub if ub is None else ub
        self.max_iter = max_iter or max(20000, 60 * (lp.m + 1))
        self.iterations = 0

    # -- state ------------------------------------------------------------

    def _cold_start(self):
        lp = self.lp
        self.basis = np.arange(lp.n_struct, lp.n_struct + lp.m, dtype=np.int64)
        self.vstat = np.full(lp.n_total, NB_LB, dtype=np.int8)
        for j in range(lp.n_struct):
            if np.isfinite(self.lb[j]):
                self.vstat[j] = NB_LB
            elif np.isfinite(self.ub[j]):
                self.vstat[j] = NB_UB
            else:
                self.vstat[j] = NB_FREE
        self.vstat[self.basis] = BASIC

    def _warm_start(self, basis, vstat):
        self.basis = np.array(basis, dtype=np.int64)
        self.vstat = np.array(vstat, dtype=np.int8)

    def _nonbasic_values(self) -> np.ndarray:
        x = np.zeros(self.lp.n_total)
        at_lb = self.vstat == NB_LB
        at_ub = self.vstat == NB_UB
        x[at_lb] = self.lb[at_lb]
        x[at_ub] = self.ub[at_ub]
        # warm starts may hand us a status whose bound moved to infinity
        x[~np.isfinite(x)] = 0.0
        return x

    def _reset_basic_values(self):
        x = self._nonbasic_values()
        x[self.basis] = 0.0
        rhs = self.lp.b - self.lp.A @ x
        x[self.basis] = self.factor.ftran(rhs)
        self.x = x

    def _refactor(self):
        self.factor.rebuild(self.basis)
        self._reset_basic_values()

    # -- iteration --------------------------------------------------------

    def _phase_costs(self, phase: int) -> np.ndarray:
        if phase == 2:
            return self.lp.c
        c = np.zeros(self.lp.n_total)
        xb = self.x[self.basis]
        c[self.basis] = np.where(xb < self.lb[self.basis] - FEAS_TOL, -1.0, 0.0)
        c[self.basis] += np.where(xb > self.ub[self.basis] + FEAS_TOL, 1.0, 0.0)
        return c

    def _infeasibility(self) -> float:
        xb = self.x[self.basis]
        low = np.clip(self.lb[self.basis] - xb, 0.0, None)
        high = np.clip(xb - self.ub[self.basis], 0.0, None)
        low[~np.isfinite(low)] = 0.0
        high[~np.isfinite(high)] = 0.0
        return float(low.sum() + high.sum())

    def _price(self, c: np.ndarray) -> np.ndarray:
        y = self.factor.btran(c[self.basis])
        return c - self.lp.AT.dot(y)

    def _choose_entering(self, d: np.ndarray, bland: bool):
        movable = (self.ub - self.lb) > 1e-12
        elig = ((self.vstat == NB_LB) & (d < -COST_TOL) & movable)
        elig |= ((self.vstat == NB_UB) & (d > COST_TOL) & movable)
        elig |= ((self.vstat == NB_FREE) & (np.abs(d) > COST_TOL))
        if not elig.any():
            return None, 0
        if bland:
            q = int(np.nonzero(elig)[0][0])
        else:
            score = np.where(elig, np.abs(d), -1.0)
            q = int(np.argmax(score))
        if self.vstat[q] == NB_LB or (self.vstat[q] == NB_FREE and d[q] < 0):
            return q, +1
        return q, -1

    def _ratio_test(self, q: int, sigma: int, w: np.ndarray, phase: int, bland: bool):
        """Returns (t, leaving_row, leaving_to_ub) with leaving_row None for a
        bound flip and t == inf for an unbounded ray."""
        xb = self.x[self.basis]
        lbb = self.lb[self.basis]
        ubb = self.ub[self.basis]
        rate = -sigma * w

        t = np.full(self.lp.m, math.inf)
        to_ub = np.zeros(self.lp.m, dtype=bool)
        if phase == 1:
            below = xb < lbb - FEAS_TOL
            above = xb > ubb + FEAS_TOL
            feas = ~(below | above)
        else:
            below = above = np.zeros(self.lp.m, dtype=bool)
            feas = np.ones(self.lp.m, dtype=bool)

        up = feas & (rate > PIVOT_TOL) & np.isfinite(ubb)
        dn = feas & (rate < -PIVOT_TOL) & np.isfinite(lbb)
        t[up] = (ubb[up] - xb[up]) / rate[up]
        to_ub[up] = True
        t[dn] = (lbb[dn] - xb[dn]) / rate[dn]
        if phase == 1:
            bl = below & (rate > PIVOT_TOL)
            ab = above & (rate < -PIVOT_TOL)
            t[bl] = (lbb[bl] - xb[bl]) / rate[bl]
            t[ab] = (ubb[ab] - xb[ab]) / rate[ab]
            to_ub[ab] = True
        np.clip(t, 0.0, None, out=t)

        t_enter = math.inf
        if self.vstat[q] in (NB_LB, NB_UB):
            rng = self.ub[q] - self.lb[q]
            if np.isfinite(rng):
                t_enter = rng

        t_basic = float(t.min()) if self.lp.m else math.inf
        if t_enter <= t_basic + 1e-12:
            if not math.isfinite(t_enter):
                return math.inf, None, False
            return t_enter, None, False
        if not math.isfinite(t_basic):
            return math.inf, None, False
        cand = np.nonzero(t <= t_basic + 1e-9)[0]
        if bland:
            r = int(cand[np.argmin(self.basis[cand])])
        else:
            r = int(cand[np.argmax(np.abs(w[cand]))])
        return float(t[r]), r, bool(to_ub[r])

    def _run_phase(self, phase: int) -> str:
        bland = False
        stall = 0
        while True:
            if self.iterations >= self.max_iter:
                raise NumericalError(
                    f"iteration limit {self.max_iter} hit in phase {phase} "
                    f"(m={self.lp.m}, n={self.lp.n_total}, etas={self.factor.age})")
            if phase == 1 and self._infeasibility() <= FEAS_TOL * max(1, self.lp.m) ** 0.5:
                return OPTIMAL
            c = self._phase_costs(phase)
            d = self._price(c)
            q, sigma = self._choose_entering(d, bland)
            if q is None:
                if phase == 1 and self._infeasibility() > FEAS_TOL * max(1, self.lp.m) ** 0.5:
                    return INFEASIBLE
                return OPTIMAL
            w = self.factor.ftran(self.lp.column(q))
            t, r, leave_to_ub = self._ratio_test(q, sigma, w, phase, bland)
            if t == math.inf:
                if phase == 1:
                    raise NumericalError("phase-1 ray: infeasibility unbounded below")
                return UNBOUNDED
            self.iterations += 1

            if t != 0.0:
                self.x[self.basis] -= sigma * t * w
            if r is None:
                # bound flip of the entering variable
                self.vstat[q] = NB_UB if self.vstat[q] == NB_LB else NB_LB
                self.x[q] = self.ub[q] if self.vstat[q] == NB_UB else self.lb[q]
            else:
                leaving = int(self.basis[r])
                self.x[q] = self.x[q] + sigma * t
                self.x[leaving] = self.ub[leaving] if leave_to_ub else self.lb[leaving]
                self.vstat[leaving] = NB_UB if leave_to_ub else NB_LB
                self.vstat[q] = BASIC
                self.factor.push(r, w)
                self.basis[r] = q
                if self.factor.age >= REFACTOR_EVERY:
                    self._refactor()

            if t <= 1e-10:
                stall += 1
                if stall >= BLAND_AFTER:
                    bland = True
            else:
                stall = 0
                bland = False

    # -- driver -----------------------------------------------------------

    def solve(self, basis=None, vstat=None):
        """Returns (status, x, basis, vstat); x covers all columns."""
        lp = self.lp
        if np.any(self.lb > self.ub + 1e-12):
            return INFEASIBLE, None, None, None
        if lp.m == 0:
            return self._solve_unconstrained()
        if basis is None:
            self._cold_start()
        else:
            self._warm_start(basis, vstat)
        self.factor = _Factor(lp, self.basis)
        self._reset_basic_values()

        for _attempt in range(3):
            status = self._run_phase(1)
            if status == INFEASIBLE:
                return INFEASIBLE, None, None, None
            status = self._run_phase(2)
            if status == UNBOUNDED:
                return UNBOUNDED, None, None, None
            self._refactor()
            if self._infeasibility() <= FEAS_TOL * max(1, lp.m) ** 0.5 * 10:
                return OPTIMAL, self.x, self.basis.copy(), self.vstat.copy()
        raise NumericalError("alternating phase-1/phase-2 without convergence "
                             f"(residual infeasibility {self._infeasibility():.3e})")

    def _solve_unconstrained(self):
        x = np.zeros(self.lp.n_total)
        for j in range(self.lp.n_total):
            cj = self.lp.c[j]
            if cj > 0:
                if not np.isfinite(self.lb[j]):
                    return UNBOUNDED, None, None, None
                x[j] = self.lb[j]
            elif cj < 0:
                if not np.isfinite(self.ub[j]):
                    return UNBOUNDED, None, None, None
                x[j] = self.ub[j]
            else:
                if np.isfinite(self.lb[j]):
                    x[j] = self.lb[j]
                elif np.isfinite(self.ub[j]):
                    x[j] = self.ub[j]
        return OPTIMAL, x, np.zeros(0, dtype=np.int64), np.full(self.lp.n_total, NB_LB, np.int8)


def solve_lp(model: MilpModel, max_iter: int | None = None) -> LpSolution:
    """Solve the LP relaxation of a model to optimality.

    Feasibility and reduced-cost tolerances are 1e-7.
    """
    lp = StandardLp(model)
    simplex = BoundedSimplex(lp, max_iter=max_iter)
    status, x, _basis, _vstat = simplex.solve()
    if status != OPTIMAL:
        return LpSolution(status, None, None, simplex.iterations)
    xs = x[:lp.n_struct].copy()
    return LpSolution(OPTIMAL, xs, float(lp.c[:lp.n_struct] @ xs), simplex.iterations)
