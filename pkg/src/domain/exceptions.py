"""
Jerarquía de errores del dominio.

El CLI traduce cada familia a un código de salida (ver `src/infrastructure/cli/main.py`).
"""


class PersistencyError(Exception):
    """Error base del proyecto."""


class InstanceError(PersistencyError, ValueError):
    """Instancia, etiquetado o archivo de entrada inválido."""


class MappingError(PersistencyError, ValueError):
    """Aplicación por píxel no idempotente, incompatible o composición cíclica."""


class SolverError(PersistencyError, RuntimeError):
    """Fallo del backend LP (estado explícito de error, nunca una respuesta silenciosa)."""


class IntegralityError(SolverError):
    """El óptimo de (L1) no es entero dentro de la tolerancia."""


class CertificationError(PersistencyError):
    """Aplicación no verificada o re-verificación fallida."""


class EnumerationCapError(PersistencyError):
    """El número de estados supera el límite del oráculo."""


class WindowBudgetError(PersistencyError):
    """La ventana excede el presupuesto de variables/restricciones."""
