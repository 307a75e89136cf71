"""
Entidad de dominio para aplicaciones por píxel p = (p_s)_s idempotentes.
"""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from src.domain.exceptions import MappingError

Table = Tuple[int, ...]


@dataclass(frozen=True)
class PixelwiseMapping:
    """
    Aplicación por píxel: cada nodo s tiene una tabla p_s: L_s -> L_s.

    La idempotencia p_s(p_s(i)) = p_s(i) se valida al construir; una tabla no
    idempotente se rechaza en lugar de cerrarse en silencio.
    """
    tables: Tuple[Table, ...]

    def __post_init__(self):
        tables = tuple(tuple(int(v) for v in table) for table in self.tables)
        for s, table in enumerate(tables):
            k = len(table)
            if k == 0:
                raise MappingError(f"Tabla vacía en el nodo {s}.")
            for i, v in enumerate(table):
                if not 0 <= v < k:
                    raise MappingError(f"p_{s}({i}) = {v} fuera de rango (K={k}).")
                if table[v] != v:
                    raise MappingError(f"p_{s} no es idempotente: p({i})={v}, p({v})={table[v]}.")
        object.__setattr__(self, "tables", tables)

    @property
    def n_nodes(self) -> int:
        return len(self.tables)

    @property
    def label_counts(self) -> Tuple[int, ...]:
        return tuple(len(t) for t in self.tables)

    def __call__(self, s: int, i: int) -> int:
        return self.tables[s][i]

    def moved(self) -> List[Tuple[int, int]]:
        """Pares (s, i) con p_s(i) != i, en orden."""
        return [(s, i) for s, table in enumerate(self.tables) for i, v in enumerate(table) if v != i]

    def image(self, s: int) -> Tuple[int, ...]:
        """Etiquetas fijas de p_s (imagen de la tabla)."""
        return tuple(i for i, v in enumerate(self.tables[s]) if v == i)

    def is_identity(self) -> bool:
        return not self.moved()

    def check_shape(self, label_counts: Sequence[int]):
        if self.label_counts != tuple(label_counts):
            raise MappingError(
                f"Aplicación con etiquetas {self.label_counts} incompatible con la instancia {tuple(label_counts)}."
            )

    @classmethod
    def identity(cls, label_counts: Sequence[int]) -> "PixelwiseMapping":
        return cls(tables=tuple(tuple(range(k)) for k in label_counts))

    @classmethod
    def subset_to_one(cls, label_counts: Sequence[int], y: Sequence[int], moved: Sequence[Sequence[int]]) -> "PixelwiseMapping":
        """
        Aplicación p_xi: las etiquetas de `moved[s]` van a y_s y el resto se queda.
        """
        tables = []
        for s, k in enumerate(label_counts):
            go = set(int(i) for i in moved[s]) - {int(y[s])}
            tables.append(tuple(int(y[s]) if i in go else i for i in range(k)))
        return cls(tables=tuple(tables))

    @classmethod
    def from_entries(cls, label_counts: Sequence[int], entries: Dict[Tuple[int, int], int]) -> "PixelwiseMapping":
        """Identidad salvo las entradas (s, i) -> p_s(i) indicadas."""
        tables = [list(range(k)) for k in label_counts]
        for (s, i), v in entries.items():
            if not 0 <= s < len(tables) or not 0 <= i < len(tables[s]):
                raise MappingError(f"Entrada ({s},{i}) fuera de la instancia.")
            tables[s][i] = v
        return cls(tables=tuple(tuple(t) for t in tables))

    def to_dict(self) -> dict:
        """Convierte la entidad a diccionario."""
        return {"tables": [list(t) for t in self.tables]}
