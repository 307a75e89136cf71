"""
Integración opcional con MLflow para registrar barridos del benchmark.
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import pandas as pd

from src.application.use_cases.benchmark_use_case import BenchmarkUseCase
from src.config.settings import settings

logger = logging.getLogger(__name__)


class MLflowTracking:
    """
    Clase para gestionar el tracking de benchmarks en MLflow.

    MLflow se importa al inicializar (extra opcional `tracking`).
    """

    def __init__(self, tracking_uri: Optional[str] = None, experiment_name: Optional[str] = None):
        """Inicializa la conexión con MLflow."""
        self._initialized = False
        self._mlflow = None
        self._tracking_uri = tracking_uri or settings.MLFLOW_TRACKING_URI
        self._experiment_name = experiment_name or settings.MLFLOW_EXPERIMENT_NAME

    def _ensure_initialized(self):
        """Inicializa MLflow solo cuando se necesita (lazy initialization)."""
        if not self._initialized:
            try:
                import mlflow
            except ImportError as exc:
                raise RuntimeError("MLflow no está instalado; instala el extra `tracking`.") from exc
            try:
                mlflow.set_tracking_uri(self._tracking_uri)
            except Exception as e:
                logger.warning("No se pudo inicializar MLflow en %s: %s", self._tracking_uri, e)
                raise
            self._mlflow = mlflow
            self._initialized = True

    def start_run(self, run_name: Optional[str] = None, nested: bool = False):
        """
        Inicia una nueva ejecución en MLflow.

        Args:
            run_name: Nombre de la ejecución
            nested: Si True, crea una ejecución anidada
        """
        self._ensure_initialized()
        try:
            self._mlflow.set_experiment(self._experiment_name)
        except Exception as e:
            # MLflow puede crear el experimento al iniciar la ejecución
            logger.warning("No se pudo configurar el experimento: %s", e)
        return self._mlflow.start_run(run_name=run_name, nested=nested)

    def log_parameters(self, params: Dict[str, Any]):
        self._ensure_initialized()
        self._mlflow.log_params(params)

    def log_metrics(self, metrics: Dict[str, float], step: Optional[int] = None):
        """
        Registra métricas en MLflow.

        Args:
            metrics: Diccionario con métricas a registrar
            step: Paso/iteración (opcional)
        """
        self._ensure_initialized()
        if step is not None:
            for key, value in metrics.items():
                self._mlflow.log_metric(key, value, step=step)
        else:
            self._mlflow.log_metrics(metrics)

    def log_artifact(self, local_path: str, artifact_path: Optional[str] = None):
        self._ensure_initialized()
        self._mlflow.log_artifact(local_path, artifact_path)

    def end_run(self):
        """Finaliza la ejecución actual en MLflow."""
        if self._initialized:
            self._mlflow.end_run()


def benchmark_params(df: pd.DataFrame) -> Dict[str, Any]:
    """Parámetros de un barrido reconstruidos a partir de su CSV."""

    def joined(column: str) -> str:
        return ",".join(str(v) for v in sorted(df[column].dropna().unique()))

    return {
        "family": joined("family"),
        "labels": joined("K"),
        "conn": joined("conn"),
        "methods": joined("method"),
        "seeds": int(df["seed"].nunique()),
        "rows": len(df),
    }


def log_benchmark(
    df: pd.DataFrame,
    params: Dict[str, Any],
    artifact: Union[str, Path],
    run_name: Optional[str] = None,
    tracking: Optional[MLflowTracking] = None,
):
    """
    Registra un barrido del benchmark: parámetros, completitud media por
    método, estadísticas del salto de integralidad y el CSV como artefacto.
    """
    tracking = tracking or MLflowTracking()
    with tracking.start_run(run_name=run_name):
        tracking.log_parameters(params)
        summary = BenchmarkUseCase.summary(df)
        if summary:
            tracking.log_metrics(summary)
        gaps = BenchmarkUseCase.gap_statistics(df)
        if gaps:
            tracking.log_metrics(gaps)
        tracking.log_artifact(str(artifact))
    logger.info("Barrido registrado en MLflow (%d filas, %s)", len(df), run_name)
