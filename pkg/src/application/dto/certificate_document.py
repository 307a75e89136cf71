"""
DTOs de salida: documento JSON de un certificado y fila del benchmark.
"""
from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from src.domain.entities.certificate import PersistencyCertificate


class VerificationDocument(BaseModel):
    value: float = Field(..., description="Valor del LP de verificación")
    improving: bool = Field(..., description="La aplicación es mejorante en el modo indicado")
    mode: str = Field(..., description="weak o strict")
    strict_margin: float = Field(0.0, description="Margen eps usado en modo estricto")
    backend: str = Field("", description="Backend LP que resolvió la verificación")


class CertificateDocument(BaseModel):
    """
    DTO con el certificado de persistencia tal como se escribe a disco.
    """
    method: str = Field(..., description="Método que produjo la aplicación")
    mode: str = Field(..., description="weak o strict")
    instance: Optional[str] = Field(None, description="Ruta de la instancia certificada")
    label_counts: List[int] = Field(..., description="K_s por nodo")
    n_eliminated: int = Field(..., ge=0, description="Número de etiquetas eliminadas")
    completeness: float = Field(..., ge=0, le=100, description="Completitud de la solución (%)")
    eliminated: List[List[int]] = Field(default_factory=list, description="Pares (s, i) eliminados")
    alive: List[List[int]] = Field(default_factory=list, description="Etiquetas vivas por nodo")
    mapping: List[List[int]] = Field(..., description="Tablas p_s por nodo")
    y: Optional[List[int]] = Field(None, description="Etiquetado de prueba")
    pair_exclusions: List[List[int]] = Field(default_factory=list, description="Pares (s, t, i, j) excluidos")
    verification: VerificationDocument
    oracle: Optional[Dict] = Field(None, description="Comprobación contra el oráculo exacto")
    diagnostics: List[str] = Field(default_factory=list)
    tolerances: Dict[str, float] = Field(default_factory=dict)

    class Config:
        json_schema_extra = {
            "example": {
                "method": "l1",
                "mode": "weak",
                "instance": "results/instance_0.txt",
                "label_counts": [2, 2],
                "n_eliminated": 1,
                "completeness": 50.0,
                "eliminated": [[0, 1]],
                "alive": [[0], [0, 1]],
                "mapping": [[0, 0], [0, 1]],
                "y": [0, 0],
                "pair_exclusions": [],
                "verification": {"value": 0.0, "improving": True, "mode": "weak", "strict_margin": 0.0, "backend": "simplex"},
                "diagnostics": [],
            }
        }

    @classmethod
    def from_certificate(
        cls,
        certificate: PersistencyCertificate,
        instance: Optional[str] = None,
        oracle: Optional[Dict] = None,
        tolerances: Optional[Dict[str, float]] = None,
    ) -> "CertificateDocument":
        data = certificate.to_dict()
        return cls(
            method=data["method"],
            mode=data["mode"],
            instance=instance,
            label_counts=data["label_counts"],
            n_eliminated=data["n_eliminated"],
            completeness=data["completeness"],
            eliminated=data["eliminated"],
            alive=[list(a) for a in certificate.alive()],
            mapping=data["mapping"]["tables"],
            y=data["y"],
            pair_exclusions=data["pair_exclusions"],
            verification=VerificationDocument(**data["verification"]),
            oracle=oracle,
            diagnostics=data["diagnostics"],
            tolerances=tolerances or {},
        )


class BenchRow(BaseModel):
    """Fila del CSV del benchmark (orden de columnas fijo)."""
    seed: int
    family: str
    K: int
    conn: int
    method: str
    mode: str
    completeness: float
    gap: float
    wall_ms: float = 0.0
    certified: bool
