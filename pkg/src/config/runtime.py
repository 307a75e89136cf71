"""
Configuración global de runtime (logs y warnings).
Debe ejecutarse antes de importar el resto del paquete en los scripts.
"""
import logging
import warnings


LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_runtime(verbose: bool = False):
    # Suprimir warnings específicos
    warnings.filterwarnings(
        "ignore",
        message=".*pkg_resources.*",
        category=UserWarning
    )

    warnings.filterwarnings(
        "ignore",
        category=DeprecationWarning
    )

    # Logging general
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
    )
    logging.getLogger("mlflow").setLevel(logging.ERROR)
    logging.getLogger("scipy").setLevel(logging.WARNING)
