"""
Simplex de referencia: tableau denso, dos fases y regla de Bland.

Con pocas variables trabaja en aritmética racional exacta (`Fraction` sobre
arrays numpy de tipo objeto); por encima del límite usa float64 con test de
razón de Harris en dos pasadas.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.config.settings import settings
from src.domain.models.linear_program import LinearProgram, LpSolution, LpStatus, RowKind, Sense

logger = logging.getLogger(__name__)

_FLOAT_TOL = 1e-9


class _StandardForm:
    """
    Reescritura de un LinearProgram como  min c.u  s.a.  T u = b,  u >= 0,  b >= 0.

    Cada fila tiene una columna unitaria (holgura con +1 o artificial) que sirve
    de base inicial y de la que se leen los duales al final.
    """

    def __init__(self, lp: LinearProgram, exact: bool):
        self.exact = exact
        conv = Fraction if exact else float
        zero = conv(0)
        index = lp.var_index()
        sign_obj = 1 if lp.sense == Sense.MINIMIZE else -1

        # columnas de u por variable original: lista de (columna, signo)
        columns: List[Tuple[int, int]] = []
        var_columns: Dict[int, List[Tuple[int, int]]] = {}
        self.offsets = [zero] * len(index)
        bound_rows: List[Tuple[int, object]] = []
        for k, (lo, hi) in enumerate(lp.variables.values()):
            cols = []
            if np.isfinite(lo):
                self.offsets[k] = conv(lo)
                cols.append((len(columns), 1))
                columns.append((k, 1))
                if np.isfinite(hi):
                    bound_rows.append((len(columns) - 1, conv(hi) - conv(lo)))
            elif np.isfinite(hi):
                self.offsets[k] = conv(hi)
                cols.append((len(columns), -1))
                columns.append((k, -1))
            else:
                cols.append((len(columns), 1))
                columns.append((k, 1))
                cols.append((len(columns), -1))
                columns.append((k, -1))
            var_columns[k] = cols
        self.columns = columns

        n_rows = len(lp.rows)
        n_u = len(columns)
        n_surplus = sum(1 for row in lp.rows if row.kind == RowKind.GE)
        n_bound = len(bound_rows)
        m = n_rows + n_bound
        self.row_sign: List[int] = []
        self.unit_col = [0] * m
        artificial_rows = []
        body = []
        surplus_col = n_u
        for r, row in enumerate(lp.rows):
            entries: Dict[int, object] = {}
            value = conv(row.rhs)
            for var, coef in row.coeffs:
                k = index[var]
                a = conv(coef)
                value -= a * self.offsets[k]
                for col, sgn in var_columns[k]:
                    entries[col] = entries.get(col, zero) + a * sgn
            surplus = None
            if row.kind == RowKind.GE:
                surplus = surplus_col
                entries[surplus] = conv(-1)
                surplus_col += 1
            sgn = 1
            if value < 0 or (surplus is not None and value == 0):
                sgn = -1
                entries = {j: -v for j, v in entries.items()}
                value = -value
            self.row_sign.append(sgn)
            body.append((entries, value))
            if surplus is not None and sgn < 0:
                self.unit_col[r] = surplus
            else:
                artificial_rows.append(r)
        bound_col = n_u + n_surplus
        for q, (col, width) in enumerate(bound_rows):
            body.append(({col: conv(1), bound_col + q: conv(1)}, width))
            self.row_sign.append(1)
            self.unit_col[n_rows + q] = bound_col + q

        first_art = n_u + n_surplus + n_bound
        for q, r in enumerate(artificial_rows):
            self.unit_col[r] = first_art + q
        self.first_artificial = first_art
        self.n_cols = first_art + len(artificial_rows)
        self.n_original_rows = n_rows
        self.artificial_rows = artificial_rows

        dtype = object if exact else float
        T = np.full((m + 1, self.n_cols + 1), zero, dtype=dtype)
        for r, (entries, value) in enumerate(body):
            for j, v in entries.items():
                T[r, j] = v
            T[r, -1] = value
        for r in artificial_rows:
            T[r, self.unit_col[r]] = conv(1)
        self.T = T
        self.m = m

        cost = np.full(self.n_cols + 1, zero, dtype=dtype)
        for var, coef in lp.objective.items():
            for col, sgn in var_columns[index[var]]:
                cost[col] = conv(coef) * sgn * sign_obj
        self.cost = cost
        self.basis = [self.unit_col[r] for r in range(m)]
        self.row_ids = list(range(m))


class SimplexBackend:
    """
    Backend LP de referencia.

    Args:
        exact_var_limit: Número máximo de variables para usar aritmética racional
        max_iterations: Límite de pivotes por fase (None = automático)
    """
    name = "simplex"

    def __init__(self, exact_var_limit: int = settings.EXACT_VAR_LIMIT, max_iterations: Optional[int] = None):
        self.exact_var_limit = exact_var_limit
        self.max_iterations = max_iterations

    def is_exact(self, lp: LinearProgram) -> bool:
        return lp.n_variables <= self.exact_var_limit

    def resolve(self, lp: LinearProgram) -> "SimplexBackend":
        return self

    def solve(self, lp: LinearProgram) -> LpSolution:
        exact = self.is_exact(lp)
        form = _StandardForm(lp, exact)
        tol = 0 if exact else _FLOAT_TOL
        limit = self.max_iterations or max(1000, 50 * (form.m + form.n_cols))
        iterations = 0

        # Fase 1
        if form.artificial_rows:
            T = form.T
            T[-1, :] = -T[form.artificial_rows, :].sum(axis=0)
            for r in form.artificial_rows:
                T[-1, form.unit_col[r]] = Fraction(0) if exact else 0.0
            status, it = self._iterate(form, range(form.first_artificial), tol, limit)
            iterations += it
            if status != LpStatus.OPTIMAL:
                return self._failure(status, "fase 1", iterations)
            infeasibility = -T[-1, -1]
            if infeasibility > (0 if exact else 1e-7 * (1 + float(np.max(np.abs(T[:-1, -1].astype(float)))))):
                return LpSolution(status=LpStatus.INFEASIBLE, backend=self.name, iterations=iterations,
                                  message=f"inviabilidad de fase 1 = {float(infeasibility):.3g}")
            self._drive_out_artificials(form, tol)

        # Fase 2
        T = form.T
        priced = [r for r, j in enumerate(form.basis) if form.cost[j] != 0]
        T[-1, :] = form.cost
        if priced:
            basic_cost = np.array([form.cost[form.basis[r]] for r in priced], dtype=T.dtype)
            T[-1, :] = T[-1, :] - basic_cost.dot(T[priced, :])
        status, it = self._iterate(form, range(form.first_artificial), tol, limit)
        iterations += it
        if status != LpStatus.OPTIMAL:
            return self._failure(status, "fase 2", iterations)
        return self._extract(lp, form, iterations)

    def _failure(self, status: LpStatus, phase: str, iterations: int) -> LpSolution:
        logger.debug("Simplex terminó en %s con estado %s", phase, status.value)
        message = "límite de iteraciones" if status == LpStatus.SOLVER_ERROR else phase
        return LpSolution(status=status, backend=self.name, iterations=iterations, message=message)

    def _iterate(self, form: _StandardForm, allowed, tol, limit: int) -> Tuple[LpStatus, int]:
        T = form.T
        allowed = list(allowed)
        for it in range(limit):
            entering = None
            for j in allowed:
                if T[-1, j] < -tol:
                    entering = j
                    break
            if entering is None:
                return LpStatus.OPTIMAL, it
            column = T[:-1, entering]
            candidates = [i for i in range(form.m) if column[i] > tol]
            if not candidates:
                return LpStatus.UNBOUNDED, it
            leave = self._ratio_test(form, candidates, column, tol)
            self._pivot(form, leave, entering, tol)
        return LpStatus.SOLVER_ERROR, limit

    def _ratio_test(self, form: _StandardForm, candidates, column, tol) -> int:
        T = form.T
        if tol == 0:
            best = min(T[i, -1] / column[i] for i in candidates)
            ties = [i for i in candidates if T[i, -1] / column[i] == best]
            return min(ties, key=lambda i: form.basis[i])
        # Harris: primera pasada con holgura, segunda elige el pivote más grande
        theta = min((T[i, -1] + tol) / column[i] for i in candidates)
        ties = [i for i in candidates if T[i, -1] / column[i] <= theta]
        return max(ties, key=lambda i: (column[i], -form.basis[i]))

    def _pivot(self, form: _StandardForm, r: int, j: int, tol):
        # solo se tocan las filas y columnas con entrada no nula en el pivote
        T = form.T
        cols = np.flatnonzero(T[r, :] != 0)
        T[r, cols] = T[r, cols] / T[r, j]
        rows = np.flatnonzero(T[:, j] != 0)
        rows = rows[rows != r]
        if rows.size:
            block = np.ix_(rows, cols)
            T[block] = T[block] - np.outer(T[rows, j], T[r, cols])
            if tol:
                values = T[block]
                values[np.abs(values.astype(float)) < 1e-13] = 0.0
                T[block] = values
        form.basis[r] = j

    def _drive_out_artificials(self, form: _StandardForm, tol):
        T = form.T
        redundant = []
        for r in range(form.m):
            if form.basis[r] < form.first_artificial:
                continue
            pivot = None
            for j in range(form.first_artificial):
                if abs(T[r, j]) > tol:
                    pivot = j
                    break
            if pivot is None:
                redundant.append(r)
            else:
                self._pivot(form, r, pivot, tol)
        if redundant:
            keep = [r for r in range(form.m) if r not in redundant] + [form.m]
            form.T = T[keep, :]
            form.basis = [form.basis[r] for r in keep[:-1]]
            form.row_ids = [form.row_ids[r] for r in keep[:-1]]
            form.m = len(form.basis)
            logger.debug("Eliminadas %d filas redundantes", len(redundant))

    def _extract(self, lp: LinearProgram, form: _StandardForm, iterations: int) -> LpSolution:
        T = form.T
        u = [0] * form.n_cols
        for r, j in enumerate(form.basis):
            u[j] = T[r, -1]
        point = list(form.offsets)
        for col, (k, sgn) in enumerate(form.columns):
            point[k] = point[k] + sgn * u[col]
        values = [float(v) for v in point]
        primal = dict(zip(lp.variables.keys(), values))

        sign_obj = 1 if lp.sense == Sense.MINIMIZE else -1
        dual = np.zeros(form.n_original_rows)
        for original in form.row_ids:
            if original >= form.n_original_rows:
                continue
            y = -T[-1, form.unit_col[original]]
            dual[original] = float(y) * form.row_sign[original] * sign_obj
        index = lp.var_index()
        conv = Fraction if form.exact else float
        value = sum((conv(coef) * point[index[var]] for var, coef in lp.objective.items()), conv(0))
        return LpSolution(
            status=LpStatus.OPTIMAL,
            value=float(value),
            exact_value=value if form.exact else None,
            primal=primal,
            dual=dual,
            backend=f"{self.name}-{'exact' if form.exact else 'float'}",
            iterations=iterations,
        )
