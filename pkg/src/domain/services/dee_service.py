"""
Servicio de dominio de eliminación de callejones sin salida (DEE): la
condición simple de Goldstein (DEE1) y su extensión a pares (DEE2), ambas
iteradas hasta el punto fijo.
"""
import logging
from typing import Dict, List, Optional, Set, Tuple

import numpy as np

from src.domain.entities.certificate import Method, Mode, PersistencyCertificate
from src.domain.entities.energy_instance import Edge, EnergyInstance
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.exceptions import CertificationError
from src.domain.models.solver_context import SolverContext, default_context
from src.domain.services import mapping_service

logger = logging.getLogger(__name__)


class _DeeState:
    """Etiquetas vivas, pares excluidos y aplicación acumulada."""

    def __init__(self, instance: EnergyInstance, mode: Mode, tol: float):
        self.instance = instance
        self.mode = mode
        self.tol = tol
        self.alive: List[List[int]] = [list(range(k)) for k in instance.label_counts]
        self.dead_pairs: Dict[Edge, Set[Tuple[int, int]]] = {e: set() for e in instance.edges}
        self.mapping = PixelwiseMapping.identity(instance.label_counts)
        self.min_swap_value = np.inf
        self.n_swaps = 0

    def pair_alive(self, s: int, t: int, i: int, j: int) -> bool:
        if (s, t) in self.dead_pairs:
            return (i, j) not in self.dead_pairs[(s, t)]
        return (j, i) not in self.dead_pairs[(t, s)]

    def accepts(self, value: float, tie_ok: bool) -> bool:
        """Criterio >= (débil, con desempate) o > (estricto)."""
        if value > self.tol:
            return True
        return self.mode == Mode.WEAK and abs(value) <= self.tol and tie_ok

    def record_swap(self, s: int, alpha: int, beta: int, value: float):
        self.alive[s].remove(alpha)
        swap = PixelwiseMapping.from_entries(self.instance.label_counts, {(s, alpha): beta})
        self.mapping = mapping_service.compose(self.mapping, swap)
        self.min_swap_value = min(self.min_swap_value, value)
        self.n_swaps += 1


def _neighbor_term(
    state: _DeeState,
    s: int,
    alpha: int,
    beta: int,
    exclude: Optional[int],
    feedback: bool,
) -> Optional[float]:
    """
    sum_{t in N(s)\\exclude} min_{x_t} [f_st(alpha, x_t) - f_st(beta, x_t)].

    Con `feedback` el mínimo recorre los x_t con (alpha, x_t) vivo y devuelve
    None si algún x_t así tiene (beta, x_t) excluido (beta no es un destino
    seguro).
    """
    instance = state.instance
    total = 0.0
    for t in instance.neighbors(s):
        if t == exclude:
            continue
        table = instance.pair(s, t)
        best = np.inf
        for x in state.alive[t]:
            if feedback:
                if not state.pair_alive(s, t, alpha, x):
                    continue
                if not state.pair_alive(s, t, beta, x):
                    return None
            best = min(best, table[alpha, x] - table[beta, x])
        total += best
    return total


def _label_pass(state: _DeeState, feedback: bool) -> int:
    """Una pasada de eliminaciones de etiqueta; devuelve cuántas hubo."""
    instance = state.instance
    eliminated = 0
    for s in range(instance.n_nodes):
        for alpha in list(state.alive[s]):
            if len(state.alive[s]) == 1:
                break
            for beta in list(state.alive[s]):
                if beta == alpha:
                    continue
                term = _neighbor_term(state, s, alpha, beta, None, feedback)
                if term is None:
                    continue
                value = instance.unary[s][alpha] - instance.unary[s][beta] + term
                if state.accepts(value, beta < alpha):
                    state.record_swap(s, alpha, beta, float(value))
                    eliminated += 1
                    break
    return eliminated


def _pair_pass(state: _DeeState) -> List[Tuple[int, int, int, int]]:
    """Una pasada de eliminaciones de pares (alpha_s, alpha_t) frente a (beta_s, beta_t)."""
    instance = state.instance
    new = []
    for (s, t), table in zip(instance.edges, instance.pairwise):
        candidates = [(i, j) for i in state.alive[s] for j in state.alive[t] if state.pair_alive(s, t, i, j)]
        for a_s, a_t in candidates:
            if not state.pair_alive(s, t, a_s, a_t):
                continue
            for b_s, b_t in candidates:
                if (b_s, b_t) == (a_s, a_t) or not state.pair_alive(s, t, b_s, b_t):
                    continue
                term_s = _neighbor_term(state, s, a_s, b_s, t, True)
                if term_s is None:
                    continue
                term_t = _neighbor_term(state, t, a_t, b_t, s, True)
                if term_t is None:
                    continue
                value = (
                    instance.unary[s][a_s] - instance.unary[s][b_s]
                    + instance.unary[t][a_t] - instance.unary[t][b_t]
                    + table[a_s, a_t] - table[b_s, b_t]
                    + term_s + term_t
                )
                tie_ok = b_s <= a_s and b_t <= a_t
                if state.accepts(value, tie_ok):
                    state.dead_pairs[(s, t)].add((a_s, a_t))
                    new.append((s, t, a_s, a_t))
                    break
    return new


def _run_dee1(state: _DeeState, feedback: bool = False):
    passes = 0
    while _label_pass(state, feedback):
        passes += 1
    logger.debug("DEE1: punto fijo tras %d pasadas, %d intercambios", passes + 1, state.n_swaps)


def _certify(
    instance: EnergyInstance,
    state: _DeeState,
    method: Method,
    ctx: SolverContext,
) -> PersistencyCertificate:
    eps = None
    if state.mode == Mode.STRICT:
        eps = mapping_service.strict_epsilon(instance, ctx)
        if np.isfinite(state.min_swap_value):
            eps = min(eps, state.min_swap_value)
    report = mapping_service.verify_improving(instance, state.mapping, state.mode, eps=eps, ctx=ctx)
    _, certificate = mapping_service.eliminate(instance, state.mapping, method, state.mode, report, ctx)
    return certificate


def dee1(
    instance: EnergyInstance,
    mode: Mode = Mode.WEAK,
    ctx: Optional[SolverContext] = None,
) -> PersistencyCertificate:
    """
    DEE simple: elimina alpha en s si existe beta vivo con

        f_s(alpha) - f_s(beta) + sum_t min_{x_t vivo} [f_st(alpha,x_t) - f_st(beta,x_t)] >= 0

    (> 0 en modo estricto), iterando hasta que no haya más eliminaciones.
    """
    ctx = default_context(ctx)
    state = _DeeState(instance, Mode(mode), ctx.tol.verify)
    _run_dee1(state)
    return _certify(instance, state, Method.DEE1, ctx)


def dee2(
    instance: EnergyInstance,
    mode: Mode = Mode.WEAK,
    feedback: bool = True,
    ctx: Optional[SolverContext] = None,
) -> PersistencyCertificate:
    """
    DEE1 hasta el punto fijo y después eliminaciones de pares por arista.

    Los pares eliminados se registran como exclusiones del certificado. Con
    `feedback` también restringen los mínimos de nuevas eliminaciones de
    etiqueta; si la aplicación resultante no supera la verificación por LP se
    repite sin realimentación.
    """
    ctx = default_context(ctx)
    mode = Mode(mode)
    state = _DeeState(instance, mode, ctx.tol.verify)
    _run_dee1(state)
    pairs: List[Tuple[int, int, int, int]] = []
    while True:
        new_pairs = _pair_pass(state)
        pairs.extend(new_pairs)
        new_labels = _label_pass(state, True) if feedback else 0
        if not new_pairs and not new_labels:
            break
    try:
        certificate = _certify(instance, state, Method.DEE2, ctx)
    except CertificationError:
        if not feedback:
            raise
        logger.warning("DEE2 con realimentación no es verificable por LP; se repite sin realimentación.")
        return dee2(instance, mode, feedback=False, ctx=ctx)
    certificate.pair_exclusions = sorted(pairs)
    logger.info("DEE2: %d pares excluidos", len(pairs))
    return certificate
