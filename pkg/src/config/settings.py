"""
Configuración del proyecto.
"""
import os
from pathlib import Path

from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


def _env_int(name: str, default: int) -> int:
    return int(float(os.getenv(name, str(default))))


class Settings:
    """Configuración centralizada del proyecto."""

    # Rutas del proyecto
    BASE_DIR = Path(__file__).resolve().parent.parent.parent
    RESULTS_DIR = Path(os.getenv("PERSISTENCY_RESULTS_DIR", str(BASE_DIR / "results")))
    MLRUNS_DIR = BASE_DIR / "mlruns"

    # MLflow (opcional, solo para `bench --track`)
    MLFLOW_TRACKING_URI = os.getenv("MLFLOW_TRACKING_URI", f"file:{MLRUNS_DIR}")
    MLFLOW_EXPERIMENT_NAME = os.getenv("MLFLOW_EXPERIMENT_NAME", "persistency_benchmark")

    # Backend LP: auto | simplex | highs
    LP_BACKEND = os.getenv("PERSISTENCY_LP_BACKEND", "auto")
    EXACT_AUTO_LIMIT = _env_int("PERSISTENCY_EXACT_AUTO_LIMIT", 64)
    EXACT_VAR_LIMIT = _env_int("PERSISTENCY_EXACT_VAR_LIMIT", 2000)

    # Tolerancias
    TAU_FEAS = _env_float("PERSISTENCY_TAU_FEAS", 1e-8)
    TAU_GAP = _env_float("PERSISTENCY_TAU_GAP", 1e-7)
    TAU_SUPP = _env_float("PERSISTENCY_TAU_SUPP", 1e-7)
    TAU_VERIFY = _env_float("PERSISTENCY_TAU_VERIFY", 1e-7)
    TAU_INT = _env_float("PERSISTENCY_TAU_INT", 1e-6)
    STRICT_EPS_FACTOR = _env_float("PERSISTENCY_STRICT_EPS_FACTOR", 1e-4)

    # Límites
    ENUM_CAP = _env_int("PERSISTENCY_ENUM_CAP", 1_000_000)
    WINDOW_BUDGET = _env_int("PERSISTENCY_WINDOW_BUDGET", 10_000)
    JOBS = _env_int("PERSISTENCY_JOBS", 1)

    @classmethod
    def ensure_directories(cls):
        """Asegura que los directorios necesarios existan."""
        cls.RESULTS_DIR.mkdir(parents=True, exist_ok=True)
        cls.MLRUNS_DIR.mkdir(exist_ok=True)


# Instancia global de configuración
settings = Settings()
