"""
Contenedor genérico de programas lineales y tipos de resultado.

Las variables se identifican por claves hashables (p. ej. ("mu", s, i)); las
filas son diccionarios dispersos variable -> coeficiente.
"""
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Hashable, List, Mapping, Optional, Protocol, Tuple, Union

import numpy as np
from scipy import sparse

from src.domain.exceptions import SolverError

VarId = Hashable
Number = Union[float, Fraction]
INF = float("inf")


def _number(value) -> Number:
    """Conserva los racionales exactos; el resto pasa a float."""
    return value if isinstance(value, Fraction) else float(value)


class Sense(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


class RowKind(str, Enum):
    EQ = "=="
    GE = ">="


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    SOLVER_ERROR = "solver_error"


@dataclass(frozen=True)
class Row:
    coeffs: Tuple[Tuple[VarId, Number], ...]
    kind: RowKind
    rhs: Number
    name: Optional[str] = None


@dataclass
class LinearProgram:
    """
    Programa lineal con filas de igualdad y de tipo >=, y cotas por variable.
    """
    name: str = "lp"
    sense: Sense = Sense.MINIMIZE
    objective: Dict[VarId, Number] = field(default_factory=dict)
    variables: Dict[VarId, Tuple[float, float]] = field(default_factory=dict)
    rows: List[Row] = field(default_factory=list)

    def add_variable(self, var: VarId, lower: float = 0.0, upper: float = INF) -> VarId:
        if var in self.variables:
            raise SolverError(f"Variable duplicada: {var!r}")
        if lower > upper:
            raise SolverError(f"Cotas vacías para {var!r}: [{lower}, {upper}]")
        self.variables[var] = (float(lower), float(upper))
        return var

    def add_constraint(
        self,
        coeffs: Mapping[VarId, float],
        kind: RowKind,
        rhs: float,
        name: Optional[str] = None,
    ) -> int:
        """
        Añade una fila `coeffs . x (== | >=) rhs` y devuelve su índice.
        """
        items = []
        for var, value in coeffs.items():
            if var not in self.variables:
                raise SolverError(f"La fila {name or len(self.rows)} usa la variable no declarada {var!r}")
            if value != 0:
                items.append((var, _number(value)))
        self.rows.append(Row(coeffs=tuple(items), kind=RowKind(kind), rhs=_number(rhs), name=name))
        return len(self.rows) - 1

    def set_objective(self, coeffs: Mapping[VarId, float], sense: Sense = Sense.MINIMIZE):
        objective = {}
        for var, value in coeffs.items():
            if var not in self.variables:
                raise SolverError(f"El objetivo usa la variable no declarada {var!r}")
            if not np.isfinite(float(value)):
                raise SolverError(f"Coeficiente de objetivo no finito para {var!r}")
            if value != 0:
                objective[var] = _number(value)
        self.objective = objective
        self.sense = Sense(sense)

    def copy(self, name: Optional[str] = None) -> "LinearProgram":
        return LinearProgram(
            name=name or self.name,
            sense=self.sense,
            objective=dict(self.objective),
            variables=dict(self.variables),
            rows=list(self.rows),
        )

    @property
    def n_variables(self) -> int:
        return len(self.variables)

    @property
    def n_constraints(self) -> int:
        return len(self.rows)

    def var_index(self) -> Dict[VarId, int]:
        return {var: k for k, var in enumerate(self.variables)}

    def matrices(self):
        """
        Forma matricial.

        Returns:
            Tupla (c, A, kinds, b, lower, upper) con A en formato CSR y `kinds`
            un array booleano (True para filas de igualdad).
        """
        index = self.var_index()
        n = len(index)
        c = np.zeros(n)
        for var, value in self.objective.items():
            c[index[var]] = float(value)
        data, rows, cols = [], [], []
        for r, row in enumerate(self.rows):
            for var, value in row.coeffs:
                rows.append(r)
                cols.append(index[var])
                data.append(float(value))
        A = sparse.csr_matrix((data, (rows, cols)), shape=(len(self.rows), n))
        kinds = np.array([row.kind == RowKind.EQ for row in self.rows], dtype=bool)
        b = np.array([float(row.rhs) for row in self.rows], dtype=float)
        bounds = np.array(list(self.variables.values()), dtype=float).reshape(n, 2)
        return c, A, kinds, b, bounds[:, 0], bounds[:, 1]

    def objective_value(self, values: Mapping[VarId, float]) -> float:
        return float(sum(float(coef) * values[var] for var, coef in self.objective.items()))


@dataclass
class LpSolution:
    """
    Resultado de un backend LP.

    `dual` contiene, por fila, la sensibilidad del valor óptimo respecto al
    lado derecho (misma convención para minimizar y maximizar).
    """
    status: LpStatus
    value: float = float("nan")
    exact_value: Optional[Fraction] = None
    primal: Dict[VarId, float] = field(default_factory=dict)
    dual: Optional[np.ndarray] = None
    dual_value: Optional[float] = None
    backend: str = ""
    iterations: int = 0
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL

    def require_optimal(self, what: str = "LP") -> "LpSolution":
        if not self.is_optimal:
            raise SolverError(f"{what}: estado {self.status.value} ({self.message})")
        return self


@dataclass
class OptimalFacetPoint:
    """
    Punto del interior relativo de la cara óptima.

    `support` son las variables con cota inferior finita que quedan
    estrictamente por encima de ella en algún óptimo. `mu` se rellena cuando el
    programa es del politopo local.
    """
    value: float
    values: Dict[VarId, float]
    support: FrozenSet[VarId]
    mu: Optional[object] = None
    n_solves: int = 0

    def positive(self, var: VarId) -> bool:
        return var in self.support


class LpBackend(Protocol):
    """Contrato de un backend LP intercambiable."""

    name: str

    def is_exact(self, lp: LinearProgram) -> bool:
        ...

    def resolve(self, lp: LinearProgram) -> "LpBackend":
        ...

    def solve(self, lp: LinearProgram) -> LpSolution:
        ...
