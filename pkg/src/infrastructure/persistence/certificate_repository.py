"""
Repositorio para escribir certificados, tablas e instancias en disco.
"""
import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import pandas as pd

from src.application.dto.certificate_document import CertificateDocument
from src.config.settings import settings

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class CertificateRepository:
    """
    Repositorio de resultados. Sin ruta explícita se escribe bajo el
    directorio base (por defecto `settings.RESULTS_DIR`).
    """

    def __init__(self, base_dir: Optional[PathLike] = None):
        self.base_dir = Path(base_dir) if base_dir is not None else settings.RESULTS_DIR

    def resolve(self, path: Optional[PathLike], default_name: str = "result") -> Path:
        return Path(path) if path is not None else self.base_dir / default_name

    def _prepare(self, path: PathLike) -> Path:
        path = self.resolve(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def save_certificate(self, document: CertificateDocument, path: PathLike) -> Path:
        path = self._prepare(path)
        path.write_text(document.model_dump_json(indent=2) + "\n", encoding="utf-8")
        logger.info("Certificado guardado en %s", path)
        return path

    def save_certificates(self, documents: List[CertificateDocument], path: PathLike) -> Path:
        """Varios certificados en un único JSON (lista)."""
        if len(documents) == 1:
            return self.save_certificate(documents[0], path)
        path = self._prepare(path)
        payload = [json.loads(d.model_dump_json()) for d in documents]
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        logger.info("%d certificados guardados en %s", len(documents), path)
        return path

    def load_certificate(self, path: PathLike) -> CertificateDocument:
        return CertificateDocument.model_validate_json(self.resolve(path).read_text(encoding="utf-8"))

    def save_table(self, df: pd.DataFrame, path: PathLike, float_format: str = "%.6f") -> Path:
        path = self._prepare(path)
        df.to_csv(path, index=False, float_format=float_format, lineterminator="\n")
        logger.info("Tabla de %d filas guardada en %s", len(df), path)
        return path

    def save_text(self, text: str, path: PathLike) -> Path:
        path = self._prepare(path)
        path.write_text(text, encoding="utf-8")
        return path
