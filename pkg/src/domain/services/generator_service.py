"""
Servicio de dominio para generar instancias aleatorias en rejilla.

Costes enteros con uniformes discretas inclusivas:
    unarios   f_s(i)     ~ U{0..100}
    full      f_st(i,j)  ~ U{0..100}
    potts     f_st(i,j)  = -gamma_st(i) [[i = j]],  gamma ~ U{0..50}

El generador es PCG64 sembrado con la semilla de la especificación; los
unarios se sortean antes que los costes por pares.
"""
import logging
from typing import List, Tuple

import numpy as np

from src.domain.entities.energy_instance import Edge, EnergyInstance
from src.domain.entities.gen_spec import Family, GenSpec

logger = logging.getLogger(__name__)

UNARY_MAX = 100
FULL_MAX = 100
POTTS_GAMMA_MAX = 50


def node_id(row: int, col: int, width: int) -> int:
    return row * width + col


def grid_edges(height: int, width: int, connectivity: int = 4) -> List[Edge]:
    """
    Aristas de la rejilla en orden por filas: derecha, abajo y, con
    conectividad 8, las dos diagonales hacia abajo.
    """
    edges = []
    for r in range(height):
        for c in range(width):
            s = node_id(r, c, width)
            if c + 1 < width:
                edges.append((s, node_id(r, c + 1, width)))
            if r + 1 < height:
                edges.append((s, node_id(r + 1, c, width)))
            if connectivity == 8 and r + 1 < height:
                if c + 1 < width:
                    edges.append((s, node_id(r + 1, c + 1, width)))
                if c > 0:
                    edges.append((s, node_id(r + 1, c - 1, width)))
    return edges


def generate(spec: GenSpec) -> EnergyInstance:
    """
    Genera una instancia determinista a partir de `spec`.

    Args:
        spec: Parámetros de generación

    Returns:
        EnergyInstance con `grid = (H, W)`
    """
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    k = spec.labels
    edges = grid_edges(spec.height, spec.width, spec.connectivity)
    unary = rng.integers(0, UNARY_MAX + 1, size=(spec.n_nodes, k))
    if spec.family == Family.FULL:
        tables = rng.integers(0, FULL_MAX + 1, size=(len(edges), k, k)).astype(float)
    elif spec.potts_per_edge:
        gamma = rng.integers(0, POTTS_GAMMA_MAX + 1, size=len(edges))
        tables = np.stack([-g * np.eye(k) for g in gamma]) if edges else np.zeros((0, k, k))
    else:
        gamma = rng.integers(0, POTTS_GAMMA_MAX + 1, size=(len(edges), k))
        tables = np.stack([-np.diag(g.astype(float)) for g in gamma]) if edges else np.zeros((0, k, k))
    # -0.0 -> 0.0 para una escritura estable
    tables = tables + 0.0
    logger.debug("Instancia %s generada: %d nodos, %d aristas", spec.to_dict(), spec.n_nodes, len(edges))
    return EnergyInstance(
        label_counts=tuple([k] * spec.n_nodes),
        unary=tuple(unary.astype(float)),
        edges=tuple(edges),
        pairwise=tuple(tables),
        f0=0.0,
        grid=(spec.height, spec.width),
    )


def grid_shape(instance: EnergyInstance) -> Tuple[int, int]:
    """(H, W) de la instancia; una instancia sin rejilla se trata como una fila."""
    return instance.grid if instance.grid else (1, instance.n_nodes)
