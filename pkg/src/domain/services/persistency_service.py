"""
Servicio de dominio de persistencia máxima: programa (L1) reducido y su
variante épsilon para aplicaciones "subconjunto a uno", el algoritmo
todos-a-uno-desconocido, el bucle genérico MaxImprove y las condiciones
necesarias sobre la cara óptima del LP de relajación.
"""
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from src.domain.entities.certificate import Method, Mode, PersistencyCertificate, VerificationReport
from src.domain.entities.energy_instance import EnergyInstance, Labeling
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.exceptions import CertificationError, IntegralityError, SolverError
from src.domain.models.linear_program import INF, LinearProgram, OptimalFacetPoint, RowKind, Sense
from src.domain.models.solver_context import SolverContext, default_context
from src.domain.services import energy_service, lp_service, mapping_service

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class XiVector:
    """Indicadores xi_si por nodo (xi_{s,y_s} = 0)."""
    values: Tuple[np.ndarray, ...]

    def moved(self, threshold: float = 0.5) -> List[Tuple[int, ...]]:
        return [tuple(int(i) for i in np.flatnonzero(v > threshold)) for v in self.values]

    def is_integral(self, tol: float) -> bool:
        return all(np.all(np.minimum(np.abs(v), np.abs(1.0 - v)) <= tol) for v in self.values)


def _xi_var(s: int, i: int) -> tuple:
    return ("xi", s, i)


def _phi_var(s: int, t: int, i: int) -> tuple:
    return ("phi", s, t, i)


def _offset_var(s: int) -> tuple:
    return ("phi", s)


def build_l1_lp(
    normalized: EnergyInstance,
    y: Labeling,
    movable: Optional[Iterable[int]] = None,
    fixed_xi: Optional[Sequence[np.ndarray]] = None,
) -> LinearProgram:
    """
    Programa (L1) reducido sobre una instancia normalizada respecto a y.

    Las variables xi_si existen para los nodos de `movable` (todos por
    defecto) y etiquetas i != y_s. Con `fixed_xi` las xi se fijan por cotas y
    el programa solo decide phi (prueba de factibilidad).
    """
    counts = normalized.label_counts
    movable = set(range(normalized.n_nodes)) if movable is None else set(movable)
    lp = LinearProgram(name="l1")
    xi = {}
    for s in sorted(movable):
        for i in range(counts[s]):
            if i == y[s]:
                continue
            if fixed_xi is None:
                xi[(s, i)] = lp.add_variable(_xi_var(s, i), lower=0.0, upper=1.0)
            else:
                value = float(fixed_xi[s][i])
                xi[(s, i)] = lp.add_variable(_xi_var(s, i), lower=value, upper=value)
    for s, t in normalized.edges:
        for a, b in ((s, t), (t, s)):
            for i in range(counts[a]):
                lp.add_variable(_phi_var(a, b, i), lower=-INF)
    for s in range(normalized.n_nodes):
        lp.add_variable(_offset_var(s), lower=-INF)

    for s, u in enumerate(normalized.unary):
        for i in range(counts[s]):
            # f_s(i) xi_si + sum_t phi_st(i) - phi_s >= 0
            row = {_phi_var(s, t, i): 1.0 for t in normalized.neighbors(s)}
            row[_offset_var(s)] = -1.0
            if (s, i) in xi and u[i] != 0:
                row[xi[(s, i)]] = float(u[i])
            lp.add_constraint(row, RowKind.GE, 0.0, name=f"u_{s}_{i}")

    for (s, t), table in zip(normalized.edges, normalized.pairwise):
        for i in range(counts[s]):
            for j in range(counts[t]):
                value = float(table[i, j])
                messages = {_phi_var(s, t, i): -1.0, _phi_var(t, s, j): -1.0}
                if value <= 0:
                    if value == 0:
                        lp.add_constraint(messages, RowKind.GE, 0.0, name=f"m_{s}_{t}_{i}_{j}")
                        continue
                    for node, label in ((s, i), (t, j)):
                        row = dict(messages)
                        if (node, label) in xi:
                            row[xi[(node, label)]] = value
                        lp.add_constraint(row, RowKind.GE, 0.0, name=f"m_{s}_{t}_{i}_{j}_{node}")
                else:
                    lp.add_constraint(messages, RowKind.GE, -value, name=f"p_{s}_{t}_{i}_{j}")
                    row = dict(messages)
                    for node, label in ((s, i), (t, j)):
                        if (node, label) in xi:
                            row[xi[(node, label)]] = value
                    lp.add_constraint(row, RowKind.GE, 0.0, name=f"p_{s}_{t}_{i}_{j}_xi")

    lp.add_constraint({_offset_var(s): 1.0 for s in range(normalized.n_nodes)}, RowKind.GE, 0.0, name="offsets")
    lp.set_objective({var: 1.0 for var in xi.values()}, Sense.MAXIMIZE)
    return lp


def _xi_from_values(instance: EnergyInstance, values: Dict, tol: float) -> Tuple[XiVector, XiVector]:
    raw, rounded = [], []
    for s, k in enumerate(instance.label_counts):
        v = np.array([values.get(_xi_var(s, i), 0.0) for i in range(k)])
        raw.append(v)
        rounded.append(np.round(v))
    return XiVector(tuple(raw)), XiVector(tuple(rounded))


def _solve_l1_mapping(
    instance: EnergyInstance,
    y: Labeling,
    ctx: SolverContext,
    movable: Optional[Iterable[int]] = None,
) -> Tuple[XiVector, PixelwiseMapping]:
    normalized = energy_service.zero_top_normalize(instance, y)
    lp = build_l1_lp(normalized, y, movable)
    solution = lp_service.solve(lp, ctx).require_optimal(lp.name)
    raw, rounded = _xi_from_values(instance, solution.primal, ctx.tol.integrality)
    if not raw.is_integral(ctx.tol.integrality):
        worst = max(float(np.max(np.minimum(np.abs(v), np.abs(1 - v)))) for v in raw.values if v.size)
        raise IntegralityError(f"xi óptimo no entero (desviación {worst:.3g}).")

    values = dict(solution.primal)
    for s, v in enumerate(rounded.values):
        for i, value in enumerate(v):
            if _xi_var(s, i) in values:
                values[_xi_var(s, i)] = float(value)
    residual = lp_service.primal_residual(lp, values)
    if residual > ctx.tol.feas * 100:
        logger.warning("xi redondeado viola (L1) en %.3g; se confía en la re-verificación.", residual)

    p = PixelwiseMapping.subset_to_one(instance.label_counts, y, rounded.moved())
    logger.debug("(L1): %d etiquetas movidas (valor LP %.6g)", len(p.moved()), solution.value)
    return rounded, p


def solve_L1(
    instance: EnergyInstance,
    y: Sequence[int],
    ctx: Optional[SolverContext] = None,
    movable: Optional[Iterable[int]] = None,
) -> Tuple[XiVector, PersistencyCertificate]:
    """
    Resuelve (L1) para la etiqueta de prueba y y certifica la aplicación p_xi.

    Args:
        instance: Instancia de energía (se normaliza internamente)
        y: Etiquetado de prueba
        ctx: Contexto de resolución
        movable: Nodos con xi libre (el resto queda fijo en la identidad)

    Returns:
        Tupla (xi, certificado débil)

    Raises:
        IntegralityError: Si el óptimo no es entero dentro de tolerancia
        CertificationError: Si la re-verificación por LP falla
    """
    ctx = default_context(ctx)
    y = instance.check_labeling(y)
    xi, p = _solve_l1_mapping(instance, y, ctx, movable)
    report = mapping_service.verify_improving(instance, p, Mode.WEAK, ctx=ctx)
    if not report.improving:
        raise CertificationError(f"La aplicación de (L1) no supera la verificación (valor {report.value:.3g}).")
    _, certificate = mapping_service.eliminate(instance, p, Method.L1, Mode.WEAK, report, ctx, y=y)
    return xi, certificate


def solve_eps_L1(
    instance: EnergyInstance,
    y: Sequence[int],
    eps: Optional[float] = None,
    ctx: Optional[SolverContext] = None,
    movable: Optional[Iterable[int]] = None,
) -> Tuple[XiVector, PersistencyCertificate]:
    """
    (L1) sobre la instancia con f_s(y_s) aumentado en eps; certificado estricto
    con margen eps.
    """
    ctx = default_context(ctx)
    y = instance.check_labeling(y)
    eps = mapping_service.strict_epsilon(instance, ctx) if eps is None else float(eps)
    if eps <= 0:
        raise ValueError("eps debe ser positivo.")
    raised = energy_service.raise_labels(instance, y, eps)
    xi, p = _solve_l1_mapping(raised, y, ctx, movable)
    report = mapping_service.verify_improving(instance, p, Mode.STRICT, eps=eps, ctx=ctx)
    if not report.improving:
        raise CertificationError(f"La aplicación de (eps-L1) no supera la verificación estricta (valor {report.value:.3g}).")
    _, certificate = mapping_service.eliminate(instance, p, Method.EPS_L1, Mode.STRICT, report, ctx, y=y)
    return xi, certificate


def l1_feasible(
    instance: EnergyInstance,
    y: Sequence[int],
    xi: Sequence[np.ndarray],
    ctx: Optional[SolverContext] = None,
) -> bool:
    """¿Existe phi que haga factible (L1) con los xi dados (posiblemente fraccionarios)?"""
    ctx = default_context(ctx)
    y = instance.check_labeling(y)
    normalized = energy_service.zero_top_normalize(instance, y)
    lp = build_l1_lp(normalized, y, fixed_xi=xi)
    lp.set_objective({}, Sense.MAXIMIZE)
    solution = lp_service.solve(lp, ctx)
    return solution.is_optimal


def relaxation_point(instance: EnergyInstance, ctx: Optional[SolverContext] = None) -> OptimalFacetPoint:
    """Punto del interior relativo de la cara óptima del LP de Schlesinger."""
    return lp_service.relaxation_interior(instance, ctx)


def select_test_labeling(instance: EnergyInstance, ctx: Optional[SolverContext] = None,
                         point: Optional[OptimalFacetPoint] = None) -> Labeling:
    """
    y_s = etiqueta entera de mu_s donde exista; si no, la de menor índice en
    argmax mu_s.
    """
    point = relaxation_point(instance, ctx) if point is None else point
    return lp_service.labeling_from_interior(point)


def max_strong_all_to_one_unknown(
    instance: EnergyInstance,
    eps: Optional[float] = None,
    ctx: Optional[SolverContext] = None,
) -> PersistencyCertificate:
    """
    Todos-a-uno desconocido: y desde el LP de relajación y después (eps-L1).
    """
    ctx = default_context(ctx)
    y = select_test_labeling(instance, ctx)
    _, certificate = solve_eps_L1(instance, y, eps, ctx)
    certificate.method = Method.ALL_TO_ONE_UNKNOWN
    return certificate


def _edge_positive(point: OptimalFacetPoint, instance: EnergyInstance, s: int, t: int, i: int, j: int) -> bool:
    if instance.edges[instance.edge_id(s, t)] == (s, t):
        return point.positive(lp_service.edge_var(s, t, i, j))
    return point.positive(lp_service.edge_var(t, s, j, i))


def _prune(instance: EnergyInstance, y: Labeling, xi: List[np.ndarray], point: OptimalFacetPoint) -> int:
    """Aplica las tres reglas de poda en orden; devuelve cuántos xi pasan a 0."""
    pruned = 0
    for s in range(instance.n_nodes):
        for i in range(instance.label_counts[s]):
            if xi[s][i] != 1:
                continue
            if not point.positive(lp_service.node_var(s, y[s])) and point.positive(lp_service.node_var(s, i)):
                xi[s][i] = 0
                pruned += 1
                continue
            hit = False
            for t in instance.neighbors(s):
                for j in range(instance.label_counts[t]):
                    if not _edge_positive(point, instance, s, t, i, j):
                        continue
                    if xi[t][j] == 0 and not _edge_positive(point, instance, s, t, y[s], j):
                        hit = True
                    elif xi[t][j] == 1 and not _edge_positive(point, instance, s, t, y[s], y[t]):
                        hit = True
                    if hit:
                        break
                if hit:
                    break
            if hit:
                xi[s][i] = 0
                pruned += 1
    return pruned


def max_improve(
    instance: EnergyInstance,
    y: Sequence[int],
    ctx: Optional[SolverContext] = None,
) -> PersistencyCertificate:
    """
    Bucle MaxImprove: parte de todas las etiquetas movidas hacia y y poda con
    el interior relativo de la cara óptima del problema de verificación hasta
    que la aplicación es mejorante.

    Raises:
        SolverError: Si una ronda no poda nada con valor negativo
    """
    ctx = default_context(ctx)
    y = instance.check_labeling(y)
    xi = [np.array([0 if i == y[s] else 1 for i in range(k)]) for s, k in enumerate(instance.label_counts)]
    max_rounds = sum(k - 1 for k in instance.label_counts) + 1
    for round_ in range(1, max_rounds + 1):
        p = PixelwiseMapping.subset_to_one(instance.label_counts, y, [np.flatnonzero(v) for v in xi])
        if p.is_identity():
            report = VerificationReport(value=0.0, improving=True, mode=Mode.WEAK, backend="trivial")
            break
        lp = mapping_service.build_verification_lp(instance, p)
        solution = lp_service.solve(lp, ctx).require_optimal(lp.name)
        if solution.value >= -ctx.tol.verify:
            report = VerificationReport(value=solution.value, improving=True, mode=Mode.WEAK, backend=solution.backend)
            break
        point = lp_service.relative_interior_optimum(lp, ctx)
        pruned = _prune(instance, y, xi, point)
        logger.info("MaxImprove ronda %d: v=%.4g, %d indicadores podados", round_, solution.value, pruned)
        if pruned == 0:
            raise SolverError(f"MaxImprove no progresa con v={solution.value:.3g}.")
    else:
        raise SolverError("MaxImprove excedió el número máximo de rondas.")
    _, certificate = mapping_service.eliminate(instance, p, Method.MAX_IMPROVE, Mode.WEAK, report, ctx, y=y)
    return certificate


def optimal_supports(
    instance: EnergyInstance,
    point: OptimalFacetPoint,
) -> Tuple[List[frozenset], Dict[Tuple[int, int], Set[Tuple[int, int]]]]:
    """O_s y O_st (en orientación canónica) desde el soporte del punto interior."""
    nodes = lp_service.support_sets(point, instance)
    edges = {}
    for s, t in instance.edges:
        edges[(s, t)] = {
            (i, j)
            for i in range(instance.label_counts[s])
            for j in range(instance.label_counts[t])
            if point.positive(lp_service.edge_var(s, t, i, j))
        }
    return nodes, edges


def passes_necessary_conditions(
    instance: EnergyInstance,
    p: PixelwiseMapping,
    point: OptimalFacetPoint,
    mode: Mode = Mode.WEAK,
) -> bool:
    """
    Débil: p mantiene la cara óptima, p_s(O_s) ⊆ O_s y p(O_st) ⊆ O_st.
    Estricto: p_s(i) = i para todo i en O_s.
    """
    nodes, edges = optimal_supports(instance, point)
    if Mode(mode) == Mode.STRICT:
        return all(p(s, i) == i for s, support in enumerate(nodes) for i in support)
    for s, support in enumerate(nodes):
        if any(p(s, i) not in support for i in support):
            return False
    for (s, t), support in edges.items():
        if any((p(s, i), p(t, j)) not in support for i, j in support):
            return False
    return True


def necessary_condition_filter(
    instance: EnergyInstance,
    candidates: Sequence[PixelwiseMapping],
    mode: Mode = Mode.WEAK,
    ctx: Optional[SolverContext] = None,
    point: Optional[OptimalFacetPoint] = None,
) -> List[PixelwiseMapping]:
    """Descarta las aplicaciones candidatas que violan las condiciones necesarias."""
    point = relaxation_point(instance, ctx) if point is None else point
    kept = [p for p in candidates if passes_necessary_conditions(instance, p, point, mode)]
    logger.debug("Condiciones necesarias (%s): %d de %d candidatas", Mode(mode).value, len(kept), len(candidates))
    return kept


def _reduced_step(
    instance: EnergyInstance,
    current: PixelwiseMapping,
    y: Labeling,
    mode: Mode,
    eps: Optional[float],
    ctx: SolverContext,
) -> PixelwiseMapping:
    """Un paso (L1)/(eps-L1) sobre la instancia reducida a la imagen de `current`."""
    labels = [current.image(s) for s in range(instance.n_nodes)]
    reduced, labels = energy_service.reduce_instance(instance, labels)
    y_local = energy_service.to_local_labeling(labels, [current(s, v) for s, v in enumerate(y)])
    if mode == Mode.STRICT:
        _, step = solve_eps_L1(reduced, y_local, eps, ctx)
    else:
        _, step = solve_L1(reduced, y_local, ctx)
    lifted = mapping_service.lift_mapping(step.mapping, labels, instance.label_counts)
    return mapping_service.compose(current, lifted)


def _final_certificate(
    instance: EnergyInstance,
    p: PixelwiseMapping,
    method: Method,
    mode: Mode,
    eps: Optional[float],
    ctx: SolverContext,
    y: Optional[Labeling] = None,
) -> PersistencyCertificate:
    report = mapping_service.verify_improving(instance, p, mode, eps=eps, ctx=ctx)
    if not report.improving:
        raise CertificationError(
            f"La composición de {method.value} no supera la verificación global (valor {report.value:.3g})."
        )
    _, certificate = mapping_service.eliminate(instance, p, method, mode, report, ctx, y=y)
    return certificate


def one_against_all(
    instance: EnergyInstance,
    mode: Mode = Mode.WEAK,
    eps: Optional[float] = None,
    ctx: Optional[SolverContext] = None,
) -> PersistencyCertificate:
    """
    Barrido uno-contra-todos: (L1) o (eps-L1) con y uniforme = alpha para cada
    etiqueta alpha, componiendo cada paso sobre la instancia ya reducida.
    """
    ctx = default_context(ctx)
    mode = Mode(mode)
    if mode == Mode.STRICT and eps is None:
        eps = mapping_service.strict_epsilon(instance, ctx)
    current = PixelwiseMapping.identity(instance.label_counts)
    for alpha in range(max(instance.label_counts)):
        y = tuple(min(alpha, k - 1) for k in instance.label_counts)
        current = _reduced_step(instance, current, y, mode, eps, ctx)
        logger.info("Barrido alpha=%d: %d etiquetas eliminadas", alpha, len(current.moved()))
    return _final_certificate(instance, current, Method.L1_SWEEP, mode, eps, ctx)


def dee2_plus_l1(instance: EnergyInstance, ctx: Optional[SolverContext] = None) -> PersistencyCertificate:
    """
    DEE2 seguido de (L1) sobre la instancia reducida, con y elegido por las
    condiciones necesarias y trasladado por la aplicación de DEE2.
    """
    from src.domain.services import dee_service

    ctx = default_context(ctx)
    dee = dee_service.dee2(instance, ctx=ctx)
    y = select_test_labeling(instance, ctx)
    y_mapped = tuple(dee.mapping(s, v) for s, v in enumerate(y))
    p = _reduced_step(instance, dee.mapping, y_mapped, Mode.WEAK, None, ctx)
    return _final_certificate(instance, p, Method.DEE2_L1, Mode.WEAK, None, ctx, y=y_mapped)
