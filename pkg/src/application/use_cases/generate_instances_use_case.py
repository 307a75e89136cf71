"""
Caso de uso para generar instancias aleatorias en rejilla.
"""
import logging
from typing import List, Tuple

from src.application.dto.run_config import RunConfig
from src.domain.entities.energy_instance import EnergyInstance
from src.domain.entities.gen_spec import GenSpec
from src.domain.services import generator_service

logger = logging.getLogger(__name__)


class GenerateInstancesUseCase:
    """
    Genera una instancia por semilla con los parámetros de la configuración.
    """

    def __init__(self, config: RunConfig):
        self.config = config

    @staticmethod
    def file_name(spec: GenSpec) -> str:
        """Nombre estable del archivo de una instancia."""
        return f"{spec.family.value}_{spec.height}x{spec.width}_K{spec.labels}_c{spec.connectivity}_s{spec.seed}.txt"

    def execute(self) -> List[Tuple[GenSpec, EnergyInstance]]:
        results = []
        for seed in self.config.seeds:
            spec = self.config.gen_spec(seed)
            instance = generator_service.generate(spec)
            logger.info("Semilla %d: %d nodos, %d aristas", seed, instance.n_nodes, instance.n_edges)
            results.append((spec, instance))
        return results
