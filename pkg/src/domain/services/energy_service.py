"""
Servicio de dominio con las operaciones básicas sobre energías por pares:
evaluación, inmersión delta, transformaciones equivalentes y restricciones de
la instancia (subinstancias y reducción de etiquetas).
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.energy_instance import EnergyInstance, Labeling
from src.domain.entities.relaxed_labeling import RelaxedLabeling, Reparametrization
from src.domain.exceptions import InstanceError


def energy(instance: EnergyInstance, x: Sequence[int]) -> float:
    """
    Evalúa E_f(x) = f0 + sum_s f_s(x_s) + sum_st f_st(x_s, x_t).

    Args:
        instance: Instancia de energía
        x: Etiquetado completo

    Returns:
        Valor de la energía
    """
    x = instance.check_labeling(x)
    total = instance.f0
    for s, u in enumerate(instance.unary):
        total += u[x[s]]
    for (s, t), table in zip(instance.edges, instance.pairwise):
        total += table[x[s], x[t]]
    return float(total)


def delta_embed(instance: EnergyInstance, x: Sequence[int]) -> RelaxedLabeling:
    """Vector indicador delta(x) en el politopo local."""
    x = instance.check_labeling(x)
    node = []
    for s, k in enumerate(instance.label_counts):
        m = np.zeros(k)
        m[x[s]] = 1.0
        node.append(m)
    edge = []
    for s, t in instance.edges:
        m = np.zeros((instance.label_counts[s], instance.label_counts[t]))
        m[x[s], x[t]] = 1.0
        edge.append(m)
    return RelaxedLabeling(node=tuple(node), edge=tuple(edge), mu0=1.0)


def inner_product(instance: EnergyInstance, mu: RelaxedLabeling) -> float:
    """<f, mu> incluyendo el término constante f0 * mu0."""
    total = instance.f0 * mu.mu0
    for u, m in zip(instance.unary, mu.node):
        total += float(np.dot(u, m))
    for table, m in zip(instance.pairwise, mu.edge):
        total += float(np.sum(table * m))
    return float(total)


def reparametrize(instance: EnergyInstance, phi: Reparametrization) -> EnergyInstance:
    """
    Transformación equivalente f^phi.

        f^phi_s(i)    = f_s(i) + sum_t phi_st(i) - phi_s
        f^phi_st(i,j) = f_st(i,j) - phi_st(i) - phi_ts(j)
        f^phi_0       = f0 + sum_s phi_s
    """
    phi.check(instance)
    counts = instance.label_counts
    unary = [u.copy() for u in instance.unary]
    f0 = instance.f0
    for s in range(instance.n_nodes):
        for t in instance.neighbors(s):
            unary[s] += phi.message(s, t, counts[s])
        unary[s] -= phi.offset(s)
        f0 += phi.offset(s)
    pairwise = []
    for (s, t), table in zip(instance.edges, instance.pairwise):
        new = table - phi.message(s, t, counts[s])[:, None] - phi.message(t, s, counts[t])[None, :]
        pairwise.append(new)
    return instance.replace_costs(unary, pairwise, f0)


def zero_top_normalize(instance: EnergyInstance, y: Sequence[int]) -> EnergyInstance:
    """
    Reparametriza para que f_s(y_s) = 0 y f_st(y_s, .) = f_st(., y_t) = 0.

    La constante f0 absorbe el desplazamiento; la energía de todo etiquetado se
    conserva. Aplicarla dos veces con el mismo y no cambia nada.
    """
    y = instance.check_labeling(y)
    unary = [u.copy() for u in instance.unary]
    f0 = instance.f0
    pairwise = []
    for (s, t), table in zip(instance.edges, instance.pairwise):
        row = table[:, y[t]].copy()
        col = table[y[s], :].copy()
        corner = table[y[s], y[t]]
        new = table - row[:, None] - col[None, :] + corner
        new[:, y[t]] = 0.0
        new[y[s], :] = 0.0
        unary[s] += row - corner
        unary[t] += col - corner
        f0 += corner
        pairwise.append(new)
    for s in range(instance.n_nodes):
        shift = unary[s][y[s]]
        unary[s] -= shift
        unary[s][y[s]] = 0.0
        f0 += shift
    return instance.replace_costs(unary, pairwise, f0)


def raise_labels(instance: EnergyInstance, y: Sequence[int], eps: float) -> EnergyInstance:
    """Suma eps a f_s(y_s) en todos los nodos (variante épsilon)."""
    y = instance.check_labeling(y)
    unary = [u.copy() for u in instance.unary]
    for s in range(instance.n_nodes):
        unary[s][y[s]] += eps
    return instance.replace_costs(unary, instance.pairwise, instance.f0)


def energy_tensor(
    instance: EnergyInstance,
    unary: Optional[Sequence[np.ndarray]] = None,
    pairwise: Optional[Sequence[np.ndarray]] = None,
) -> np.ndarray:
    """
    Tensor denso de energías con un eje por nodo.

    `unary`/`pairwise` sustituyen a los costes de la instancia (admiten +inf).
    El llamador es responsable de limitar el número de estados.
    """
    n = instance.n_nodes
    unary = instance.unary if unary is None else unary
    pairwise = instance.pairwise if pairwise is None else pairwise
    tensor = np.full(tuple(instance.label_counts), instance.f0, dtype=float)
    for s, u in enumerate(unary):
        shape = [1] * n
        shape[s] = instance.label_counts[s]
        tensor = tensor + u.reshape(shape)
    for (s, t), table in zip(instance.edges, pairwise):
        shape = [1] * n
        shape[s] = instance.label_counts[s]
        shape[t] = instance.label_counts[t]
        oriented = table if s < t else table.T
        tensor = tensor + oriented.reshape(shape)
    return tensor


def subinstance(
    instance: EnergyInstance,
    nodes: Sequence[int],
    core: Sequence[int] = None,
) -> Tuple[EnergyInstance, Tuple[int, ...]]:
    """
    Subinstancia sobre `nodes` (en ese orden).

    Sin `core` se toman todas las aristas inducidas. Con `core` solo las aristas
    que tocan algún nodo de `core` (subproblema en estrella de una ventana).

    Returns:
        Tupla (subinstancia, nodos originales en el orden local)
    """
    nodes = tuple(int(s) for s in nodes)
    local = {s: k for k, s in enumerate(nodes)}
    if len(local) != len(nodes):
        raise InstanceError("Nodos repetidos en la subinstancia.")
    core_set = set(nodes) if core is None else set(int(s) for s in core)
    edges, pairwise = [], []
    for (s, t), table in zip(instance.edges, instance.pairwise):
        if s in local and t in local and (s in core_set or t in core_set):
            edges.append((local[s], local[t]))
            pairwise.append(table)
    sub = EnergyInstance(
        label_counts=tuple(instance.label_counts[s] for s in nodes),
        unary=tuple(instance.unary[s] for s in nodes),
        edges=tuple(edges),
        pairwise=tuple(pairwise),
        f0=0.0,
    )
    return sub, nodes


def star_nodes(instance: EnergyInstance, window: Sequence[int]) -> Tuple[int, ...]:
    """Nodos de la ventana seguidos de su frontera N(W) \\ W (ordenada)."""
    inside = [int(s) for s in window]
    inside_set = set(inside)
    boundary = sorted({t for s in inside for t in instance.neighbors(s) if t not in inside_set})
    return tuple(inside) + tuple(boundary)


def reduce_instance(
    instance: EnergyInstance,
    alive: Sequence[Sequence[int]],
) -> Tuple[EnergyInstance, Tuple[Tuple[int, ...], ...]]:
    """
    Restringe cada nodo a sus etiquetas vivas (en orden ascendente).

    Returns:
        Tupla (instancia reducida, etiquetas originales de cada etiqueta local)
    """
    labels = tuple(tuple(sorted(int(i) for i in a)) for a in alive)
    if len(labels) != instance.n_nodes:
        raise InstanceError("Conjuntos de etiquetas vivas de longitud incorrecta.")
    for s, a in enumerate(labels):
        if not a:
            raise InstanceError(f"El nodo {s} se queda sin etiquetas.")
        if a[0] < 0 or a[-1] >= instance.label_counts[s]:
            raise InstanceError(f"Etiqueta viva fuera de rango en el nodo {s}.")
    unary = [instance.unary[s][list(a)] for s, a in enumerate(labels)]
    pairwise = [table[np.ix_(labels[s], labels[t])] for (s, t), table in zip(instance.edges, instance.pairwise)]
    reduced = EnergyInstance(
        label_counts=tuple(len(a) for a in labels),
        unary=tuple(unary),
        edges=instance.edges,
        pairwise=tuple(pairwise),
        f0=instance.f0,
        grid=instance.grid,
    )
    return reduced, labels


def to_local_labeling(labels: Sequence[Sequence[int]], y: Sequence[int]) -> Labeling:
    """Traduce un etiquetado original a índices locales de una instancia reducida."""
    out: List[int] = []
    for s, (a, v) in enumerate(zip(labels, y)):
        if v not in a:
            raise InstanceError(f"La etiqueta {v} del nodo {s} no está viva.")
        out.append(list(a).index(v))
    return tuple(out)
