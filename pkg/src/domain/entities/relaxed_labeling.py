"""
Etiquetados relajados (puntos del politopo local) y reparametrizaciones.
"""
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from src.domain.entities.energy_instance import Edge, EnergyInstance
from src.domain.exceptions import InstanceError


@dataclass(frozen=True)
class RelaxedLabeling:
    """
    Vector mu del politopo local.

    `edge` está alineado con `instance.edges` y cada tabla tiene la orientación
    canónica K_s x K_t de la arista.
    """
    node: Tuple[np.ndarray, ...]
    edge: Tuple[np.ndarray, ...]
    mu0: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "node", tuple(np.asarray(m, dtype=float) for m in self.node))
        object.__setattr__(self, "edge", tuple(np.asarray(m, dtype=float) for m in self.edge))
        object.__setattr__(self, "mu0", float(self.mu0))

    def edge_table(self, instance: EnergyInstance, s: int, t: int) -> np.ndarray:
        """Tabla mu_st orientada como K_s x K_t."""
        table = self.edge[instance.edge_id(s, t)]
        return table if instance.edges[instance.edge_id(s, t)] == (s, t) else table.T

    def violations(self, instance: EnergyInstance, tol: float = 1e-8) -> list:
        """
        Lista de restricciones del politopo local violadas por más de `tol`.

        Returns:
            Lista (posiblemente vacía) de descripciones legibles.
        """
        problems = []
        if len(self.node) != instance.n_nodes or len(self.edge) != instance.n_edges:
            return ["dimensiones incompatibles con la instancia"]
        if abs(self.mu0 - 1.0) > tol:
            problems.append(f"mu0={self.mu0}")
        for s, m in enumerate(self.node):
            if m.shape != (instance.label_counts[s],):
                problems.append(f"nodo {s}: forma {m.shape}")
                continue
            if np.min(m) < -tol:
                problems.append(f"nodo {s}: componente negativa")
            if abs(float(np.sum(m)) - self.mu0) > tol:
                problems.append(f"nodo {s}: suma {float(np.sum(m))}")
        for k, (s, t) in enumerate(instance.edges):
            m = self.edge[k]
            if m.shape != (instance.label_counts[s], instance.label_counts[t]):
                problems.append(f"arista ({s},{t}): forma {m.shape}")
                continue
            if m.size and np.min(m) < -tol:
                problems.append(f"arista ({s},{t}): componente negativa")
            if np.max(np.abs(m.sum(axis=1) - self.node[s])) > tol:
                problems.append(f"arista ({s},{t}): marginal en {s}")
            if np.max(np.abs(m.sum(axis=0) - self.node[t])) > tol:
                problems.append(f"arista ({s},{t}): marginal en {t}")
        return problems

    def is_feasible(self, instance: EnergyInstance, tol: float = 1e-8) -> bool:
        return not self.violations(instance, tol)

    def support(self, tol: float = 1e-7) -> Tuple[Tuple[int, ...], ...]:
        """Conjuntos O_s = {i : mu_s(i) > tol}."""
        return tuple(tuple(int(i) for i in np.flatnonzero(m > tol)) for m in self.node)

    def to_dict(self) -> dict:
        """Convierte la entidad a diccionario."""
        return {
            "mu0": self.mu0,
            "node": [m.tolist() for m in self.node],
            "edge": [m.tolist() for m in self.edge],
        }


@dataclass(frozen=True)
class Reparametrization:
    """
    Vector dual phi: mensajes phi_st(i) por arista dirigida y desplazamientos phi_s.
    """
    messages: Dict[Edge, np.ndarray] = field(default_factory=dict)
    node_offsets: Optional[np.ndarray] = None

    def message(self, s: int, t: int, n_labels: int) -> np.ndarray:
        """phi_st como vector de longitud K_s (cero si no se ha dado)."""
        if (s, t) in self.messages:
            return np.asarray(self.messages[(s, t)], dtype=float)
        return np.zeros(n_labels)

    def offset(self, s: int) -> float:
        if self.node_offsets is None:
            return 0.0
        return float(self.node_offsets[s])

    def check(self, instance: EnergyInstance):
        """Valida la indexación contra la instancia."""
        if self.node_offsets is not None and len(self.node_offsets) != instance.n_nodes:
            raise InstanceError("phi_s con longitud distinta al número de nodos.")
        for (s, t), msg in self.messages.items():
            if not instance.has_edge(s, t):
                raise InstanceError(f"Mensaje phi para la arista inexistente ({s},{t}).")
            if np.shape(msg) != (instance.label_counts[s],):
                raise InstanceError(f"Mensaje phi_{s}{t} con forma {np.shape(msg)}.")
            if not np.all(np.isfinite(msg)):
                raise InstanceError("Mensajes phi no finitos.")

    @classmethod
    def zeros(cls, instance: EnergyInstance) -> "Reparametrization":
        messages = {}
        for s, t in instance.edges:
            messages[(s, t)] = np.zeros(instance.label_counts[s])
            messages[(t, s)] = np.zeros(instance.label_counts[t])
        return cls(messages=messages, node_offsets=np.zeros(instance.n_nodes))

    @classmethod
    def random(cls, instance: EnergyInstance, rng: np.random.Generator, scale: float = 10.0) -> "Reparametrization":
        """Reparametrización aleatoria (útil para pruebas de invariancia)."""
        messages = {}
        for s, t in instance.edges:
            messages[(s, t)] = rng.uniform(-scale, scale, instance.label_counts[s])
            messages[(t, s)] = rng.uniform(-scale, scale, instance.label_counts[t])
        return cls(messages=messages, node_offsets=rng.uniform(-scale, scale, instance.n_nodes))
