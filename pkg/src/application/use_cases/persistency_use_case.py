"""
Caso de uso para calcular y certificar persistencias parciales de una instancia.
"""
import logging
from typing import Dict, List, Optional, Tuple

from src.application.dto.run_config import RunConfig
from src.domain.entities.certificate import Mode, PersistencyCertificate
from src.domain.entities.energy_instance import EnergyInstance, Labeling
from src.domain.exceptions import CertificationError, InstanceError
from src.domain.models.linear_program import LinearProgram
from src.domain.models.solver_context import SolverContext
from src.domain.services import (
    dee_service,
    mapping_service,
    oracle_service,
    persistency_service,
    window_service,
)

logger = logging.getLogger(__name__)


class PersistencyUseCase:
    """
    Orquesta la selección del etiquetado de prueba, el método de persistencia,
    la re-verificación final y, opcionalmente, la certificación exacta.
    """

    def __init__(
        self,
        config: RunConfig,
        ctx: Optional[SolverContext] = None,
        labeling: Optional[Labeling] = None,
    ):
        """
        Inicializa el caso de uso.

        Args:
            config: Configuración de la ejecución
            ctx: Contexto de resolución (por defecto, el derivado de `config`)
            labeling: Etiquetado leído de `--y file:<ruta>`
        """
        self.config = config
        self.labeling = labeling
        self.ctx = ctx or config.solver_context()
        self.last_lp: Optional[LinearProgram] = None

    def test_labeling(self, instance: EnergyInstance) -> Optional[Labeling]:
        """
        Etiquetado de prueba según `--y`.

        Devuelve None para `from-lp` con el método de ventanas: cada ventana
        elige el suyo.
        """
        spec = self.config.y
        if spec.startswith("uniform:"):
            alpha = int(spec.split(":", 1)[1])
            return tuple(min(alpha, k - 1) for k in instance.label_counts)
        if spec.startswith("file:"):
            if self.labeling is None:
                raise InstanceError(f"No se ha cargado el etiquetado de {spec}.")
            return instance.check_labeling(self.labeling)
        return persistency_service.select_test_labeling(instance, self.ctx)

    def windows(self, instance: EnergyInstance):
        if self.config.radius is not None or not instance.grid:
            return window_service.bfs_windows(instance, self.config.radius or 1, self.config.stride or 1)
        return window_service.grid_windows(instance, self.config.window, self.config.stride)

    def run_method(self, instance: EnergyInstance, method: str) -> PersistencyCertificate:
        """Ejecuta un único método y devuelve su certificado (ya verificado)."""
        ctx = self.ctx
        mode = Mode(self.config.mode)
        eps = self.config.eps
        if method == "dee1":
            return dee_service.dee1(instance, mode, ctx)
        if method == "dee2":
            return dee_service.dee2(instance, mode, ctx=ctx)
        if method == "dee2+l1":
            return persistency_service.dee2_plus_l1(instance, ctx)
        if method == "a2ou":
            return persistency_service.max_strong_all_to_one_unknown(instance, eps, ctx)
        if method == "l1-sweep":
            return persistency_service.one_against_all(instance, mode, eps, ctx)
        if method == "window":
            y = None if self.config.y == "from-lp" else self.test_labeling(instance)
            return window_service.window_persistency(
                instance,
                self.windows(instance),
                ctx,
                dee=self.config.window_dee,
                sweeps=self.config.sweeps,
                y=y,
                n_jobs=self.config.jobs,
            )

        y = self.test_labeling(instance)
        if method == "l1":
            _, certificate = persistency_service.solve_L1(instance, y, ctx)
        elif method == "eps-l1":
            _, certificate = persistency_service.solve_eps_L1(instance, y, eps, ctx)
        elif method == "maximprove":
            certificate = persistency_service.max_improve(instance, y, ctx)
        else:
            raise InstanceError(f"Método desconocido: {method}")
        return certificate

    def reverify(self, instance: EnergyInstance, certificate: PersistencyCertificate) -> PersistencyCertificate:
        """
        Re-verificación final por LP de la aplicación del certificado.

        Raises:
            CertificationError: Si la aplicación no es mejorante en su modo
        """
        eps = certificate.verification.strict_margin if certificate.mode == Mode.STRICT else None
        report = mapping_service.verify_improving(instance, certificate.mapping, certificate.mode, eps=eps, ctx=self.ctx)
        if not report.improving:
            raise CertificationError(
                f"{certificate.method.value}: la re-verificación falla (valor {report.value:.3g})."
            )
        self.last_lp = mapping_service.build_verification_lp(instance, certificate.mapping, certificate.mode, report.strict_margin)
        certificate.verification = report
        return certificate

    def oracle_check(self, instance: EnergyInstance, certificate: PersistencyCertificate) -> Dict:
        check = oracle_service.certify(instance, certificate, self.ctx)
        if not check.passed:
            raise CertificationError(
                f"{certificate.method.value}: el oráculo exacto contradice el certificado ({len(check.violations)} violaciones)."
            )
        return check.to_dict()

    def execute(self, instance: EnergyInstance) -> List[Tuple[PersistencyCertificate, Optional[Dict]]]:
        """
        Ejecuta todos los métodos pedidos sobre `instance`.

        Returns:
            Lista de (certificado re-verificado, comprobación del oráculo o None)
        """
        results = []
        for method in self.config.method:
            certificate = self.reverify(instance, self.run_method(instance, method))
            oracle = self.oracle_check(instance, certificate) if self.config.certify else None
            logger.info(
                "%s: %d eliminadas, completitud %.2f%%",
                certificate.method.value, certificate.n_eliminated, certificate.completeness,
            )
            results.append((certificate, oracle))
        return results
