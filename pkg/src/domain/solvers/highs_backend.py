"""
Adaptador de HiGHS (simplex dual) a través de `scipy.optimize.linprog`.
"""
import logging

import numpy as np
from scipy.optimize import linprog

from src.domain.models.linear_program import LinearProgram, LpSolution, LpStatus, Sense

logger = logging.getLogger(__name__)

_STATUS = {
    0: LpStatus.OPTIMAL,
    2: LpStatus.INFEASIBLE,
    3: LpStatus.UNBOUNDED,
}


class HighsBackend:
    """Backend en coma flotante para programas medianos y grandes."""

    name = "highs"

    def __init__(self, method: str = "highs-ds", feasibility_tol: float = 1e-9):
        self.method = method
        self.feasibility_tol = feasibility_tol

    def is_exact(self, lp: LinearProgram) -> bool:
        return False

    def resolve(self, lp: LinearProgram) -> "HighsBackend":
        return self

    def solve(self, lp: LinearProgram) -> LpSolution:
        c, A, kinds, b, lower, upper = lp.matrices()
        sign_obj = 1.0 if lp.sense == Sense.MINIMIZE else -1.0
        eq_rows = np.flatnonzero(kinds)
        ge_rows = np.flatnonzero(~kinds)
        A_eq = A[eq_rows] if len(eq_rows) else None
        b_eq = b[eq_rows] if len(eq_rows) else None
        # a.x >= b  <=>  -a.x <= -b
        A_ub = -A[ge_rows] if len(ge_rows) else None
        b_ub = -b[ge_rows] if len(ge_rows) else None
        bounds = np.column_stack((lower, upper)) if len(c) else None

        res = linprog(
            sign_obj * c,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=A_eq,
            b_eq=b_eq,
            bounds=bounds,
            method=self.method,
            options={
                "primal_feasibility_tolerance": self.feasibility_tol,
                "dual_feasibility_tolerance": self.feasibility_tol,
            },
        )
        status = _STATUS.get(res.status, LpStatus.SOLVER_ERROR)
        if status != LpStatus.OPTIMAL:
            logger.debug("HiGHS devolvió estado %s: %s", res.status, res.message)
            return LpSolution(status=status, backend=self.name, message=str(res.message))

        dual = np.zeros(len(b))
        if len(eq_rows):
            dual[eq_rows] = sign_obj * np.asarray(res.eqlin.marginals)
        if len(ge_rows):
            dual[ge_rows] = -sign_obj * np.asarray(res.ineqlin.marginals)
        primal = dict(zip(lp.variables.keys(), (float(v) for v in res.x)))
        return LpSolution(
            status=LpStatus.OPTIMAL,
            value=lp.objective_value(primal),
            primal=primal,
            dual=dual,
            backend=self.name,
            iterations=int(getattr(res, "nit", 0) or 0),
        )
