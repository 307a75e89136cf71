"""
Backends LP disponibles: `simplex` (referencia), `highs` (scipy) y `auto`.
"""
from src.config.settings import settings
from src.domain.models.linear_program import LinearProgram, LpSolution
from src.domain.solvers.highs_backend import HighsBackend
from src.domain.solvers.simplex_backend import SimplexBackend


class AutoBackend:
    """Simplex exacto para programas pequeños y HiGHS para el resto."""

    name = "auto"

    def __init__(self, exact_limit: int = settings.EXACT_AUTO_LIMIT):
        self.exact_limit = exact_limit
        self.simplex = SimplexBackend()
        self.highs = HighsBackend()

    def resolve(self, lp: LinearProgram):
        return self.simplex if lp.n_variables <= self.exact_limit else self.highs

    def is_exact(self, lp: LinearProgram) -> bool:
        return self.resolve(lp).is_exact(lp)

    def solve(self, lp: LinearProgram) -> LpSolution:
        return self.resolve(lp).solve(lp)


BACKENDS = {
    "auto": AutoBackend,
    "simplex": SimplexBackend,
    "highs": HighsBackend,
}


def get_backend(name: str):
    """
    Crea un backend por nombre.

    Raises:
        ValueError: Si el nombre no es conocido
    """
    try:
        return BACKENDS[name]()
    except KeyError:
        raise ValueError(f"Backend LP desconocido: {name} (opciones: {', '.join(BACKENDS)})") from None
