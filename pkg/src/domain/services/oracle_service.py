"""
Oráculos exactos para instancias pequeñas: enumeración completa y
programación dinámica por frontera siguiendo el orden de los nodos (fila a
fila en rejillas). Se usan para certificar persistencias y medir el salto de
integralidad.
"""
import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.certificate import Mode, PersistencyCertificate
from src.domain.entities.energy_instance import EnergyInstance, Labeling
from src.domain.exceptions import EnumerationCapError, InstanceError
from src.domain.models.solver_context import SolverContext, default_context
from src.domain.services import energy_service, lp_service

logger = logging.getLogger(__name__)

Pair = Tuple[int, int, int, int]


@dataclass
class OracleCheck:
    """Resultado de certificar un conjunto de eliminaciones contra el óptimo exacto."""
    mode: Mode
    optimum: float
    constrained: float
    passed: bool
    violations: List[Tuple[int, ...]]

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "optimum": self.optimum,
            "constrained": self.constrained,
            "passed": self.passed,
            "violations": [list(v) for v in self.violations],
        }


def _tolerance(instance: EnergyInstance) -> float:
    return 1e-7 * (1.0 + instance.max_abs_cost())


def _masked_costs(
    instance: EnergyInstance,
    forbidden: Iterable[Tuple[int, int]] = (),
    forced: Optional[Dict[int, int]] = None,
    forbidden_pairs: Iterable[Pair] = (),
) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """Costes con +inf en las etiquetas prohibidas y en los pares excluidos."""
    unary = [u.copy() for u in instance.unary]
    for s, i in forbidden:
        unary[s][i] = np.inf
    for s, i in (forced or {}).items():
        if not 0 <= i < instance.label_counts[s]:
            raise InstanceError(f"Etiqueta forzada {i} fuera de rango en el nodo {s}.")
        keep = unary[s][i]
        unary[s][:] = np.inf
        unary[s][i] = keep
    pairwise = [p.copy() for p in instance.pairwise]
    for s, t, i, j in forbidden_pairs:
        eid = instance.edge_id(s, t)
        if instance.edges[eid] == (s, t):
            pairwise[eid][i, j] = np.inf
        else:
            pairwise[eid][j, i] = np.inf
    return unary, pairwise


def _frontier_min(instance: EnergyInstance, unary, pairwise, cap: int) -> float:
    """
    Mínimo exacto por eliminación de variables en el orden 0..n-1.

    La tabla vive sobre la frontera (nodos ya añadidos con vecinos pendientes).
    """
    n = instance.n_nodes
    last = [max([s] + list(instance.neighbors(s))) for s in range(n)]
    frontier: List[int] = []
    table = np.array(0.0)
    for k in range(n):
        table = table[..., None] + unary[k].reshape((1,) * len(frontier) + (-1,))
        frontier.append(k)
        for t in instance.neighbors(k):
            if t >= k:
                continue
            pair = pairwise[instance.edge_id(t, k)]
            pair = pair if instance.edges[instance.edge_id(t, k)] == (t, k) else pair.T
            shape = [1] * len(frontier)
            shape[frontier.index(t)] = pair.shape[0]
            shape[-1] = pair.shape[1]
            table = table + pair.reshape(shape)
        if table.size > cap:
            raise EnumerationCapError(f"La frontera alcanza {table.size} estados (límite {cap}).")
        for v in [v for v in frontier if last[v] <= k]:
            axis = frontier.index(v)
            table = table.min(axis=axis)
            frontier.pop(axis)
    return float(table) + instance.f0


def min_energy(
    instance: EnergyInstance,
    forbidden: Iterable[Tuple[int, int]] = (),
    forced: Optional[Dict[int, int]] = None,
    forbidden_pairs: Iterable[Pair] = (),
    ctx: Optional[SolverContext] = None,
) -> float:
    """
    min E(x) sobre los etiquetados que evitan `forbidden` y `forbidden_pairs`
    y respetan `forced` (+inf si no hay ninguno).

    Enumera cuando el número de estados cabe en el límite y usa programación
    dinámica por frontera en otro caso.
    """
    ctx = default_context(ctx)
    unary, pairwise = _masked_costs(instance, forbidden, forced, forbidden_pairs)
    if instance.n_states() <= ctx.enum_cap:
        return float(np.min(energy_service.energy_tensor(instance, unary, pairwise)))
    return _frontier_min(instance, unary, pairwise, ctx.enum_cap)


def brute_force_minimize(
    instance: EnergyInstance,
    ctx: Optional[SolverContext] = None,
) -> Tuple[float, List[Labeling]]:
    """
    Mínimo exacto y conjunto completo de minimizadores por enumeración.

    Raises:
        EnumerationCapError: Si el número de etiquetados supera el límite
    """
    ctx = default_context(ctx)
    if instance.n_states() > ctx.enum_cap:
        raise EnumerationCapError(f"{instance.n_states()} estados superan el límite {ctx.enum_cap}.")
    tensor = energy_service.energy_tensor(instance)
    value = float(np.min(tensor))
    optima = np.argwhere(tensor <= value + _tolerance(instance))
    return value, [tuple(int(v) for v in row) for row in optima]


def certify(
    instance: EnergyInstance,
    certificate: PersistencyCertificate,
    ctx: Optional[SolverContext] = None,
) -> OracleCheck:
    """
    Débil: algún óptimo evita todas las eliminaciones (etiquetas y pares).
    Estricto: ningún óptimo usa una etiqueta o un par eliminado.
    """
    ctx = default_context(ctx)
    tol = _tolerance(instance)
    optimum = min_energy(instance, ctx=ctx)
    if certificate.mode == Mode.WEAK:
        constrained = min_energy(instance, certificate.eliminated, None, certificate.pair_exclusions, ctx)
        passed = constrained <= optimum + tol
        return OracleCheck(Mode.WEAK, optimum, constrained, passed, [] if passed else list(certificate.eliminated))

    violations: List[Tuple[int, ...]] = []
    best_violating = np.inf
    for s, i in certificate.eliminated:
        value = min_energy(instance, forced={s: i}, ctx=ctx)
        best_violating = min(best_violating, value)
        if value <= optimum + tol:
            violations.append((s, i))
    for s, t, i, j in certificate.pair_exclusions:
        value = min_energy(instance, forced={s: i, t: j}, ctx=ctx)
        best_violating = min(best_violating, value)
        if value <= optimum + tol:
            violations.append((s, t, i, j))
    return OracleCheck(Mode.STRICT, optimum, float(best_violating), not violations, violations)


def optima_avoid(optima: Sequence[Labeling], eliminated: Iterable[Tuple[int, int]], mode: Mode) -> bool:
    """Comprobación directa sobre un conjunto de minimizadores ya enumerado."""
    eliminated = set(eliminated)

    def clean(x: Labeling) -> bool:
        return not any((s, v) in eliminated for s, v in enumerate(x))

    if Mode(mode) == Mode.WEAK:
        return any(clean(x) for x in optima)
    return all(clean(x) for x in optima)


def integrality_gap(instance: EnergyInstance, ctx: Optional[SolverContext] = None) -> float:
    """Mínimo entero menos óptimo del LP de Schlesinger."""
    ctx = default_context(ctx)
    exact = min_energy(instance, ctx=ctx)
    relaxed = lp_service.solve_relaxation(instance, ctx).value
    gap = exact - relaxed
    if gap < -ctx.tol.gap * max(1.0, abs(exact)) * 100:
        logger.warning("Salto de integralidad negativo (%.3g): revisar el backend LP", gap)
    return gap


def all_labelings(instance: EnergyInstance) -> Iterable[Labeling]:
    """Iterador sobre todos los etiquetados (producto cartesiano)."""
    return itertools.product(*(range(k) for k in instance.label_counts))
