"""
Entidad de dominio para una energía discreta por pares.

    E_f(x) = f0 + sum_s f_s(x_s) + sum_{st} f_st(x_s, x_t)
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.exceptions import InstanceError

Edge = Tuple[int, int]
Labeling = Tuple[int, ...]


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class EnergyInstance:
    """
    Instancia de minimización de energía por pares.

    Los nodos son 0..n-1 y las etiquetas de cada nodo son 0..K_s-1. Cada arista
    se guarda una única vez en su orientación canónica (la de `edges`); el
    acceso `pair(t, s)` devuelve la tabla traspuesta.
    """
    label_counts: Tuple[int, ...]
    unary: Tuple[np.ndarray, ...]
    edges: Tuple[Edge, ...] = ()
    pairwise: Tuple[np.ndarray, ...] = ()
    f0: float = 0.0
    grid: Optional[Tuple[int, int]] = None
    _edge_index: Dict[Edge, int] = field(init=False, repr=False, compare=False)
    _neighbors: Tuple[Tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        counts = tuple(int(k) for k in self.label_counts)
        if any(k < 1 for k in counts):
            raise InstanceError("Cada nodo necesita al menos una etiqueta.")
        if len(self.unary) != len(counts):
            raise InstanceError("El número de tablas unarias no coincide con el de nodos.")
        unary = tuple(_frozen(u) for u in self.unary)
        for s, (u, k) in enumerate(zip(unary, counts)):
            if u.shape != (k,):
                raise InstanceError(f"Tabla unaria del nodo {s} con forma {u.shape}, se esperaba ({k},).")

        edges = tuple((int(s), int(t)) for s, t in self.edges)
        if len(self.pairwise) != len(edges):
            raise InstanceError("El número de tablas por pares no coincide con el de aristas.")
        pairwise = tuple(_frozen(p) for p in self.pairwise)

        n = len(counts)
        index: Dict[Edge, int] = {}
        neighbors: List[List[int]] = [[] for _ in range(n)]
        for k, (s, t) in enumerate(edges):
            if not (0 <= s < n and 0 <= t < n):
                raise InstanceError(f"La arista ({s},{t}) referencia nodos inexistentes.")
            if s == t:
                raise InstanceError(f"Lazo no permitido en el nodo {s}.")
            if (s, t) in index or (t, s) in index:
                raise InstanceError(f"Arista ({s},{t}) duplicada.")
            if pairwise[k].shape != (counts[s], counts[t]):
                raise InstanceError(
                    f"Tabla de la arista ({s},{t}) con forma {pairwise[k].shape}, "
                    f"se esperaba ({counts[s]},{counts[t]})."
                )
            index[(s, t)] = k
            neighbors[s].append(t)
            neighbors[t].append(s)

        if not np.isfinite(float(self.f0)):
            raise InstanceError("f0 debe ser finito.")
        for table in unary + pairwise:
            if not np.all(np.isfinite(table)):
                raise InstanceError("Todos los costes deben ser finitos.")

        object.__setattr__(self, "label_counts", counts)
        object.__setattr__(self, "unary", unary)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "pairwise", pairwise)
        object.__setattr__(self, "f0", float(self.f0))
        if self.grid is not None:
            object.__setattr__(self, "grid", (int(self.grid[0]), int(self.grid[1])))
        object.__setattr__(self, "_edge_index", index)
        object.__setattr__(self, "_neighbors", tuple(tuple(sorted(nb)) for nb in neighbors))

    @property
    def n_nodes(self) -> int:
        return len(self.label_counts)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, s: int) -> Tuple[int, ...]:
        return self._neighbors[s]

    def has_edge(self, s: int, t: int) -> bool:
        return (s, t) in self._edge_index or (t, s) in self._edge_index

    def edge_id(self, s: int, t: int) -> int:
        """Índice de la arista {s,t} en `edges` (cualquier orientación)."""
        if (s, t) in self._edge_index:
            return self._edge_index[(s, t)]
        return self._edge_index[(t, s)]

    def pair(self, s: int, t: int) -> np.ndarray:
        """Tabla f_st orientada como K_s x K_t (acceso simétrico)."""
        if (s, t) in self._edge_index:
            return self.pairwise[self._edge_index[(s, t)]]
        if (t, s) in self._edge_index:
            return self.pairwise[self._edge_index[(t, s)]].T
        raise InstanceError(f"No existe la arista ({s},{t}).")

    def n_states(self) -> int:
        """Número total de etiquetados (producto de K_s)."""
        total = 1
        for k in self.label_counts:
            total *= k
        return total

    def max_abs_cost(self) -> float:
        values = [abs(self.f0)]
        values += [float(np.max(np.abs(u))) for u in self.unary if u.size]
        values += [float(np.max(np.abs(p))) for p in self.pairwise if p.size]
        return max(values)

    def check_labeling(self, x: Sequence[int]) -> Labeling:
        """Valida un etiquetado y lo devuelve como tupla."""
        if len(x) != self.n_nodes:
            raise InstanceError(f"Etiquetado de longitud {len(x)} para {self.n_nodes} nodos.")
        labeling = tuple(int(v) for v in x)
        for s, (v, k) in enumerate(zip(labeling, self.label_counts)):
            if not 0 <= v < k:
                raise InstanceError(f"Etiqueta {v} fuera de rango en el nodo {s} (K={k}).")
        return labeling

    def replace_costs(
        self,
        unary: Sequence[np.ndarray],
        pairwise: Sequence[np.ndarray],
        f0: float,
    ) -> "EnergyInstance":
        """Nueva instancia con el mismo grafo y otros costes."""
        return EnergyInstance(
            label_counts=self.label_counts,
            unary=tuple(unary),
            edges=self.edges,
            pairwise=tuple(pairwise),
            f0=f0,
            grid=self.grid,
        )

    @classmethod
    def zeros(
        cls,
        label_counts: Sequence[int],
        edges: Sequence[Edge] = (),
        grid: Optional[Tuple[int, int]] = None,
    ) -> "EnergyInstance":
        """Instancia con todos los costes a cero."""
        counts = tuple(int(k) for k in label_counts)
        return cls(
            label_counts=counts,
            unary=tuple(np.zeros(k) for k in counts),
            edges=tuple(edges),
            pairwise=tuple(np.zeros((counts[s], counts[t])) for s, t in edges),
            grid=grid,
        )
