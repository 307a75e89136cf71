"""
Servicio de dominio de persistencia por ventanas.

Cada ventana W se resuelve sobre su subproblema en estrella (W, su frontera
N(W) y las aristas que tocan W) de la instancia ya reducida; el resultado se
re-verifica contra la reducción vigente y se compone con la aplicación global.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from joblib import Parallel, delayed

from src.domain.entities.certificate import Method, Mode, PersistencyCertificate
from src.domain.entities.energy_instance import EnergyInstance, Labeling
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.entities.window import Window
from src.config.settings import settings
from src.domain.exceptions import CertificationError, WindowBudgetError
from src.domain.models.linear_program import OptimalFacetPoint
from src.domain.models.solver_context import SolverContext, default_context
from src.domain.services import dee_service, energy_service, lp_service, mapping_service, persistency_service
from src.domain.services.generator_service import node_id

logger = logging.getLogger(__name__)


@dataclass
class WindowResult:
    """Aplicación local de una ventana sobre la reducción en la que se calculó."""
    index: int
    window: Window
    nodes: Tuple[int, ...]
    y: Optional[Labeling] = None
    mapping: Optional[PixelwiseMapping] = None
    diagnostic: Optional[str] = None


def grid_windows(instance: EnergyInstance, size: Tuple[int, int], stride: int) -> List[Window]:
    """
    Rectángulos alineados de `size` = (alto, ancho) con paso `stride`; la
    última fila y columna de ventanas se ajustan al borde.
    """
    height, width = instance.grid if instance.grid else (1, instance.n_nodes)
    h, w = min(size[0], height), min(size[1], width)
    stride = max(1, int(stride))

    def starts(total: int, extent: int) -> List[int]:
        values = list(range(0, total - extent + 1, stride))
        if values[-1] != total - extent:
            values.append(total - extent)
        return values

    windows = []
    for r0 in starts(height, h):
        for c0 in starts(width, w):
            nodes = [node_id(r, c, width) for r in range(r0, r0 + h) for c in range(c0, c0 + w)]
            windows.append(Window.of(nodes, name=f"r{r0}c{c0}"))
    return windows


def instance_graph(instance: EnergyInstance) -> nx.Graph:
    graph = nx.Graph()
    graph.add_nodes_from(range(instance.n_nodes))
    graph.add_edges_from(instance.edges)
    return graph


def bfs_windows(instance: EnergyInstance, radius: int, stride: int = 1) -> List[Window]:
    """Bolas de radio `radius` (distancia en aristas) centradas cada `stride` nodos."""
    graph = instance_graph(instance)
    windows = []
    for center in range(0, instance.n_nodes, max(1, int(stride))):
        lengths = nx.single_source_shortest_path_length(graph, center, cutoff=radius)
        windows.append(Window.of(sorted(lengths), name=f"bfs{center}"))
    return windows


def star_problem(instance: EnergyInstance, window: Window) -> Tuple[EnergyInstance, Tuple[int, ...]]:
    """Subinstancia en estrella de la ventana: nodos de W primero, después la frontera."""
    window.check(instance.n_nodes)
    return energy_service.subinstance(instance, energy_service.star_nodes(instance, window.nodes), core=window.nodes)


def l1_size(star: EnergyInstance, n_window: int) -> Tuple[int, int]:
    """Número de variables y restricciones del (L1) de una estrella."""
    counts = star.label_counts
    variables = sum(counts[s] - 1 for s in range(n_window))
    variables += sum(counts[s] + counts[t] for s, t in star.edges) + star.n_nodes
    constraints = sum(counts) + sum(2 * counts[s] * counts[t] for s, t in star.edges) + 1
    return variables, constraints


def check_budget(star: EnergyInstance, window: Window, budget: int):
    variables, constraints = l1_size(star, len(window))
    if max(variables, constraints) > budget:
        raise WindowBudgetError(
            f"Ventana {window.label}: {variables} variables y {constraints} restricciones superan el presupuesto {budget}."
        )


def window_test_problem(
    instance: EnergyInstance,
    window: Window,
    ctx: Optional[SolverContext] = None,
) -> OptimalFacetPoint:
    """
    Problema de prueba min <f, (I - Q) mu> con q_s = 0 en W e identidad fuera.

    Se resuelve sobre la estrella de la ventana, que da el mismo valor; el
    punto devuelto (con `mu` sobre la estrella) expone O_s para los nodos de W
    en las primeras posiciones.
    """
    ctx = default_context(ctx)
    star, nodes = star_problem(instance, window)
    collapse = PixelwiseMapping(
        tables=tuple(
            tuple(0 for _ in range(k)) if local < len(window) else tuple(range(k))
            for local, k in enumerate(star.label_counts)
        )
    )
    lp = mapping_service.build_verification_lp(star, collapse)
    lp.name = f"window-test-{window.label}"
    return lp_service.relative_interior_optimum(lp, ctx, instance=star)


def window_supports(window: Window, point: OptimalFacetPoint) -> List[Tuple[int, ...]]:
    """O_s de cada nodo de W según el punto del problema de prueba."""
    return [
        tuple(i for i in range(len(point.mu.node[local])) if point.positive(lp_service.node_var(local, i)))
        for local in range(len(window))
    ]


def window_test_labeling(point: OptimalFacetPoint) -> Labeling:
    """y local de la estrella: menor índice en argmax mu_s."""
    return lp_service.labeling_from_interior(point)


def _solve_window(
    reduced: EnergyInstance,
    index: int,
    window: Window,
    y_reduced: Optional[Labeling],
    ctx: SolverContext,
) -> WindowResult:
    """
    (L1) de una ventana sobre la instancia reducida (ejecutable en paralelo).

    Solo el exceso de presupuesto queda como diagnóstico; los fallos del
    solver, de integralidad y de verificación se propagan.
    """
    star, nodes = star_problem(reduced, window)
    result = WindowResult(index=index, window=window, nodes=nodes)
    try:
        check_budget(star, window, ctx.window_budget)
    except WindowBudgetError as exc:
        result.diagnostic = str(exc)
        return result
    if y_reduced is None:
        y_star = window_test_labeling(window_test_problem(reduced, window, ctx))
    else:
        y_star = tuple(y_reduced[s] for s in nodes)
    _, certificate = persistency_service.solve_L1(star, y_star, ctx, movable=range(len(window)))
    result.y = y_star
    result.mapping = certificate.mapping
    return result


def _fold(
    instance: EnergyInstance,
    current: PixelwiseMapping,
    labels: Sequence[Sequence[int]],
    result: WindowResult,
    ctx: SolverContext,
) -> Optional[PixelwiseMapping]:
    """
    Compone el resultado de una ventana con la aplicación global; None si su
    y ya no está viva en la reducción vigente.

    Raises:
        CertificationError: Si la aplicación de la ventana no supera la
            re-verificación sobre la reducción vigente
    """
    # y_W en etiquetas originales; la frontera no se mueve
    core = result.nodes[: len(result.window)]
    y_original = [labels[s][result.y[local]] for local, s in enumerate(core)]
    if any(current(s, v) != v for s, v in zip(core, y_original)):
        result.diagnostic = f"Ventana {result.window.label}: y ya no está viva"
        return None
    lifted = mapping_service.lift_mapping(
        mapping_service.embed_mapping(result.mapping, result.nodes, [len(a) for a in labels]),
        labels,
        instance.label_counts,
    )
    candidate = mapping_service.compose(current, lifted)
    if candidate == current:
        return current

    alive = [current.image(s) for s in range(instance.n_nodes)]
    reduced, now = energy_service.reduce_instance(instance, alive)
    star, nodes = star_problem(reduced, result.window)
    tables = []
    for s in nodes:
        index = {v: k for k, v in enumerate(now[s])}
        tables.append(tuple(index[lifted(s, v)] for v in now[s]))
    local = PixelwiseMapping(tables=tuple(tables))
    report = mapping_service.verify_improving(star, local, Mode.WEAK, ctx=ctx)
    if not report.improving:
        message = f"Ventana {result.window.label}: la re-verificación falla (valor {report.value:.3g})"
        logger.error("%s", message)
        raise CertificationError(message)
    return candidate


def _history_rows(step: int, window: str, p: PixelwiseMapping) -> List[dict]:
    return [
        {"step": step, "window": window, "node": s, "remaining": len(p.image(s))}
        for s in range(p.n_nodes)
    ]


def window_persistency(
    instance: EnergyInstance,
    windows: Sequence[Window],
    ctx: Optional[SolverContext] = None,
    dee: bool = False,
    sweeps: int = 1,
    y: Optional[Sequence[int]] = None,
    n_jobs: int = settings.JOBS,
) -> PersistencyCertificate:
    """
    Persistencia por ventanas con composición global.

    Args:
        instance: Instancia completa
        windows: Ventanas a procesar (se pliegan en este orden)
        ctx: Contexto; `ctx.window_budget` limita el tamaño de cada (L1) local
        dee: Ejecuta DEE1 antes de cada barrido
        sweeps: Número de barridos sobre la lista de ventanas
        y: Etiquetado de prueba fijo (por defecto, del problema de prueba de cada ventana)
        n_jobs: Trabajos de joblib para resolver las ventanas de un barrido

    Returns:
        Certificado débil con el historial de etiquetas restantes

    Raises:
        CertificationError: Si una ventana o la composición no supera la verificación
        SolverError: Si falla el (L1) de una ventana, incluido un xi no entero
    """
    ctx = default_context(ctx)
    y = instance.check_labeling(y) if y is not None else None
    current = PixelwiseMapping.identity(instance.label_counts)
    history = _history_rows(0, "start", current)
    diagnostics: List[str] = []
    order: List[str] = []
    step = 0
    for sweep in range(max(1, sweeps)):
        if dee:
            alive = [current.image(s) for s in range(instance.n_nodes)]
            reduced, labels = energy_service.reduce_instance(instance, alive)
            pre = dee_service.dee1(reduced, ctx=ctx)
            current = mapping_service.compose(current, mapping_service.lift_mapping(pre.mapping, labels, instance.label_counts))
            step += 1
            history += _history_rows(step, f"dee1-{sweep}", current)

        alive = [current.image(s) for s in range(instance.n_nodes)]
        reduced, labels = energy_service.reduce_instance(instance, alive)
        y_reduced = None
        if y is not None:
            y_reduced = energy_service.to_local_labeling(labels, [current(s, v) for s, v in enumerate(y)])
        results = Parallel(n_jobs=n_jobs)(
            delayed(_solve_window)(reduced, k, w, y_reduced, ctx) for k, w in enumerate(windows)
        )
        for result in results:
            if result.mapping is None:
                diagnostics.append(result.diagnostic)
                logger.warning("%s", result.diagnostic)
                continue
            folded = _fold(instance, current, labels, result, ctx)
            if folded is None:
                diagnostics.append(result.diagnostic)
                logger.warning("%s", result.diagnostic)
                continue
            gained = len(folded.moved()) - len(current.moved())
            current = folded
            step += 1
            order.append(result.window.label)
            history += _history_rows(step, result.window.label, current)
            logger.info("Barrido %d, ventana %s: +%d eliminadas (%d en total)",
                        sweep, result.window.label, gained, len(current.moved()))

    report = mapping_service.verify_improving(instance, current, Mode.WEAK, ctx=ctx)
    if not report.improving:
        raise CertificationError(f"La composición de ventanas no supera la verificación global (valor {report.value:.3g}).")
    _, certificate = mapping_service.eliminate(instance, current, Method.WINDOW, Mode.WEAK, report, ctx)
    certificate.diagnostics = diagnostics + [f"orden: {', '.join(order)}"]
    certificate.history = history
    return certificate


def remaining_labels(p: PixelwiseMapping) -> np.ndarray:
    return np.array([len(p.image(s)) for s in range(p.n_nodes)])
