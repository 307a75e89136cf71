"""
Caso de uso para verificar una aplicación por píxel leída de archivo.
"""
import logging
from typing import Optional

from src.application.dto.run_config import RunConfig
from src.domain.entities.certificate import Mode, VerificationReport
from src.domain.entities.energy_instance import EnergyInstance
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.exceptions import CertificationError, EnumerationCapError
from src.domain.models.linear_program import LinearProgram
from src.domain.models.solver_context import SolverContext
from src.domain.services import mapping_service

logger = logging.getLogger(__name__)


class VerifyMappingUseCase:
    """
    Comprueba con el LP de verificación que una aplicación es mejorante y,
    con `--certify`, la contrasta por enumeración.
    """

    def __init__(self, config: RunConfig, ctx: Optional[SolverContext] = None):
        self.config = config
        self.ctx = ctx or config.solver_context()
        self.last_lp: Optional[LinearProgram] = None

    def execute(self, instance: EnergyInstance, p: PixelwiseMapping) -> VerificationReport:
        """
        Raises:
            CertificationError: Si el LP y la enumeración discrepan en el
                sentido peligroso (el LP acepta y la enumeración no)
        """
        p.check_shape(instance.label_counts)
        mode = Mode(self.config.mode)
        report = mapping_service.verify_improving(instance, p, mode, eps=self.config.eps, ctx=self.ctx)
        self.last_lp = mapping_service.build_verification_lp(instance, p, mode, report.strict_margin)
        if self.config.certify:
            try:
                exhaustive = mapping_service.verify_improving_bruteforce(instance, p, mode, self.ctx)
            except EnumerationCapError as exc:
                logger.warning("Sin comprobación exhaustiva: %s", exc)
            else:
                if report.improving and not exhaustive:
                    raise CertificationError("El LP acepta una aplicación que la enumeración rechaza.")
                logger.info("Enumeración: %s", "mejorante" if exhaustive else "no mejorante")
        return report
