"""
Entidad de dominio para una ventana (subconjunto de nodos).
"""
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

from src.domain.exceptions import InstanceError


@dataclass(frozen=True)
class Window:
    """Subconjunto no vacío W de nodos, en orden de procesamiento."""
    nodes: Tuple[int, ...]
    name: Optional[str] = None

    def __post_init__(self):
        nodes = tuple(int(s) for s in self.nodes)
        if not nodes:
            raise InstanceError("Ventana vacía.")
        if len(set(nodes)) != len(nodes):
            raise InstanceError("Ventana con nodos repetidos.")
        object.__setattr__(self, "nodes", nodes)

    def __len__(self) -> int:
        return len(self.nodes)

    def check(self, n_nodes: int):
        if min(self.nodes) < 0 or max(self.nodes) >= n_nodes:
            raise InstanceError(f"La ventana {self.label} referencia nodos inexistentes.")

    @property
    def label(self) -> str:
        return self.name or f"{self.nodes[0]}+{len(self.nodes)}"

    @classmethod
    def of(cls, nodes: Sequence[int], name: Optional[str] = None) -> "Window":
        return cls(nodes=tuple(nodes), name=name)
