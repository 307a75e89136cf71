"""
Tolerancias y backend LP compartidos por los servicios de dominio.
"""
from dataclasses import dataclass, field, replace
from typing import Optional

from src.config.settings import settings
from src.domain.models.linear_program import LpBackend


@dataclass(frozen=True)
class Tolerances:
    feas: float = settings.TAU_FEAS
    gap: float = settings.TAU_GAP
    supp: float = settings.TAU_SUPP
    verify: float = settings.TAU_VERIFY
    integrality: float = settings.TAU_INT
    strict_eps_factor: float = settings.STRICT_EPS_FACTOR

    def to_dict(self) -> dict:
        return {
            "feas": self.feas,
            "gap": self.gap,
            "supp": self.supp,
            "verify": self.verify,
            "integrality": self.integrality,
            "strict_eps_factor": self.strict_eps_factor,
        }


@dataclass(frozen=True)
class SolverContext:
    """
    Contexto de resolución: backend LP, tolerancias y límites.
    """
    backend_name: str = settings.LP_BACKEND
    tol: Tolerances = field(default_factory=Tolerances)
    enum_cap: int = settings.ENUM_CAP
    window_budget: int = settings.WINDOW_BUDGET
    _backend: Optional[LpBackend] = field(default=None, repr=False, compare=False)

    @property
    def backend(self) -> LpBackend:
        if self._backend is None:
            # Import diferido: los backends dependen de este módulo
            from src.domain.solvers import get_backend

            object.__setattr__(self, "_backend", get_backend(self.backend_name))
        return self._backend

    def with_backend(self, name: str) -> "SolverContext":
        return replace(self, backend_name=name, _backend=None)


def default_context(ctx: Optional[SolverContext] = None) -> SolverContext:
    return ctx if ctx is not None else SolverContext()
