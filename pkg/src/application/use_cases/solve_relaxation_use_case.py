"""
Caso de uso para resolver la relajación LP (y, si cabe, el óptimo exacto).
"""
import logging
from typing import Any, Dict, Optional

from src.application.dto.run_config import RunConfig
from src.domain.entities.energy_instance import EnergyInstance
from src.domain.exceptions import EnumerationCapError
from src.domain.models.linear_program import LinearProgram
from src.domain.models.solver_context import SolverContext
from src.domain.services import energy_service, lp_service, oracle_service

logger = logging.getLogger(__name__)


class SolveRelaxationUseCase:
    """
    Resuelve el LP de Schlesinger, extrae el punto del interior relativo y el
    etiquetado redondeado, y compara con el mínimo exacto cuando el oráculo
    alcanza la instancia.
    """

    def __init__(self, config: RunConfig, ctx: Optional[SolverContext] = None):
        self.config = config
        self.ctx = ctx or config.solver_context()
        self.last_lp: Optional[LinearProgram] = None

    def execute(self, instance: EnergyInstance) -> Dict[str, Any]:
        """
        Returns:
            Diccionario con el valor LP, el etiquetado redondeado, su energía,
            los nodos enteros y, si procede, el mínimo exacto y el salto
        """
        self.last_lp = lp_service.build_schlesinger_lp(instance)
        point = lp_service.relative_interior_optimum(self.last_lp, self.ctx, instance=instance)
        labeling = lp_service.labeling_from_interior(point)
        result: Dict[str, Any] = {
            "lp_value": point.value,
            "labeling": list(labeling),
            "labeling_energy": energy_service.energy(instance, labeling),
            "integral_nodes": len(lp_service.integral_nodes(point)),
            "n_nodes": instance.n_nodes,
            "node_marginals": point.mu.to_dict()["node"],
            "exact": None,
            "gap": None,
        }
        try:
            exact = oracle_service.min_energy(instance, ctx=self.ctx)
        except EnumerationCapError as exc:
            logger.info("Sin mínimo exacto: %s", exc)
            return result
        result["exact"] = exact
        result["gap"] = exact - point.value
        return result
