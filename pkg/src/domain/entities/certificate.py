"""
Entidades de resultado: informe de verificación y certificado de persistencia.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.entities.relaxed_labeling import RelaxedLabeling

PairExclusion = Tuple[int, int, int, int]


class Mode(str, Enum):
    WEAK = "weak"
    STRICT = "strict"


class Method(str, Enum):
    L1 = "l1"
    EPS_L1 = "eps-l1"
    ALL_TO_ONE_UNKNOWN = "a2ou"
    MAX_IMPROVE = "maximprove"
    DEE1 = "dee1"
    DEE2 = "dee2"
    WINDOW = "window"
    DEE2_L1 = "dee2+l1"
    L1_SWEEP = "l1-sweep"


@dataclass
class VerificationReport:
    """
    Resultado de la comprobación por LP de que una aplicación es mejorante.

    `witness` solo se rellena cuando la aplicación no es mejorante.
    """
    value: float
    improving: bool
    mode: Mode = Mode.WEAK
    strict_margin: float = 0.0
    witness: Optional[RelaxedLabeling] = None
    backend: str = ""

    def to_dict(self) -> dict:
        """Convierte la entidad a diccionario."""
        return {
            "value": self.value,
            "improving": self.improving,
            "mode": self.mode.value,
            "strict_margin": self.strict_margin,
            "backend": self.backend,
        }


def completeness(eliminated: int, label_counts: Sequence[int]) -> float:
    """Porcentaje n_elim / sum_s (K_s - 1) * 100 (0 si no hay nada eliminable)."""
    total = sum(k - 1 for k in label_counts)
    if total == 0:
        return 0.0
    return 100.0 * eliminated / total


@dataclass
class PersistencyCertificate:
    """
    Certificado de persistencia parcial.

    `eliminated` son los pares (s, i) con p_s(i) != i. En modo débil algún
    óptimo global los evita a todos; en modo estricto todos los óptimos.
    `pair_exclusions` (s, t, i, j) solo aparece en DEE2.
    """
    method: Method
    mode: Mode
    mapping: PixelwiseMapping
    verification: VerificationReport
    y: Optional[Tuple[int, ...]] = None
    pair_exclusions: List[PairExclusion] = field(default_factory=list)
    diagnostics: List[str] = field(default_factory=list)
    history: List[dict] = field(default_factory=list)

    @property
    def eliminated(self) -> List[Tuple[int, int]]:
        return self.mapping.moved()

    @property
    def n_eliminated(self) -> int:
        return len(self.eliminated)

    @property
    def completeness(self) -> float:
        return completeness(self.n_eliminated, self.mapping.label_counts)

    @property
    def certified(self) -> bool:
        return self.verification.improving

    def alive(self) -> List[Tuple[int, ...]]:
        """Etiquetas que sobreviven en cada nodo."""
        return [self.mapping.image(s) for s in range(self.mapping.n_nodes)]

    def to_dict(self) -> dict:
        """Convierte la entidad a diccionario."""
        return {
            "method": self.method.value,
            "mode": self.mode.value,
            "label_counts": list(self.mapping.label_counts),
            "eliminated": [list(e) for e in self.eliminated],
            "n_eliminated": self.n_eliminated,
            "completeness": self.completeness,
            "mapping": self.mapping.to_dict(),
            "verification": self.verification.to_dict(),
            "y": list(self.y) if self.y is not None else None,
            "pair_exclusions": [list(p) for p in self.pair_exclusions],
            "diagnostics": list(self.diagnostics),
        }
