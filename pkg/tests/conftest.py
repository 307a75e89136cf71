"""
Fixtures compartidas: instancias pequeñas construidas a mano y contextos de
resolución con backend fijo.
"""
import itertools

import numpy as np
import pytest

from src.domain.entities.energy_instance import EnergyInstance
from src.domain.entities.gen_spec import Family, GenSpec
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.entities.relaxed_labeling import RelaxedLabeling
from src.domain.models.solver_context import SolverContext
from src.domain.services import energy_service, generator_service


def chain(unary, pairwise, f0=0.0):
    """Cadena 0-1-...-n con las tablas dadas (una por arista)."""
    n = len(unary)
    return EnergyInstance(
        label_counts=tuple(len(u) for u in unary),
        unary=tuple(np.asarray(u, dtype=float) for u in unary),
        edges=tuple((s, s + 1) for s in range(n - 1)),
        pairwise=tuple(np.asarray(p, dtype=float) for p in pairwise),
        f0=f0,
    )


def random_instance(seed, n=3, k=3, edges=None, scale=10):
    """Instancia aleatoria entera (cadena por defecto)."""
    rng = np.random.default_rng(seed)
    edges = [(s, s + 1) for s in range(n - 1)] if edges is None else list(edges)
    return EnergyInstance(
        label_counts=tuple([k] * n),
        unary=tuple(rng.integers(0, scale + 1, size=(n, k)).astype(float)),
        edges=tuple(edges),
        pairwise=tuple(rng.integers(-scale, scale + 1, size=(len(edges), k, k)).astype(float)),
    )


def grid_instance(seed, height=2, width=2, labels=3, family=Family.POTTS):
    return generator_service.generate(
        GenSpec(seed=seed, height=height, width=width, labels=labels, family=family)
    )


def labelings(instance):
    return itertools.product(*(range(k) for k in instance.label_counts))


def random_mu(instance, rng):
    """Combinación convexa de indicadores: punto factible del politopo."""
    states = list(labelings(instance))
    weights = rng.dirichlet(np.ones(len(states)))
    deltas = [energy_service.delta_embed(instance, x) for x in states]
    node = [sum(w * d.node[s] for w, d in zip(weights, deltas)) for s in range(instance.n_nodes)]
    edge = [sum(w * d.edge[e] for w, d in zip(weights, deltas)) for e in range(instance.n_edges)]
    return RelaxedLabeling(node=tuple(node), edge=tuple(edge))


def random_mapping(label_counts, rng):
    """Aplicación por píxel aleatoria: cada nodo manda un subconjunto a una etiqueta."""
    tables = []
    for k in label_counts:
        target = int(rng.integers(k))
        moved = rng.random(k) < 0.5
        tables.append(tuple(target if m else i for i, m in enumerate(moved)))
    return PixelwiseMapping(tables=tuple(tables))


@pytest.fixture
def ctx():
    """Simplex de referencia (aritmética racional en estos tamaños)."""
    return SolverContext(backend_name="simplex")


@pytest.fixture
def highs_ctx():
    return SolverContext(backend_name="highs")


@pytest.fixture
def chain2():
    """f0=1, f_0=(0,2), f_1=(0,3), f_01=[[0,1],[1,0]]; óptimo único (0,0)."""
    return chain([[0, 2], [0, 3]], [[[0, 1], [1, 0]]], f0=1.0)


@pytest.fixture
def separable():
    """Tres nodos sin aristas con argmin únicos (1, 0, 2)."""
    return EnergyInstance(
        label_counts=(3, 3, 3),
        unary=(np.array([5.0, 0.0, 7.0]), np.array([2.0, 9.0, 4.0]), np.array([3.0, 3.0, 1.0])),
    )


@pytest.fixture
def frustrated_triangle():
    """Ciclo de 3 nodos, K=2, penaliza etiquetas iguales: salto de integralidad 1."""
    table = np.eye(2)
    return EnergyInstance(
        label_counts=(2, 2, 2),
        unary=tuple(np.zeros(2) for _ in range(3)),
        edges=((0, 1), (1, 2), (0, 2)),
        pairwise=(table, table, table),
    )


@pytest.fixture
def symmetric_chain():
    """Cadena ferromagnética sin unarios: mínimos (0,0,0) y (1,1,1)."""
    table = -np.eye(2)
    return chain([[0, 0], [0, 0], [0, 0]], [table, table])
