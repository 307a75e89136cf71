"""
Servicio de dominio para aplicaciones por píxel: acción sobre etiquetados y
sobre el politopo local, verificación de la propiedad mejorante (por LP y por
enumeración), composición y eliminación certificada de etiquetas.
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.domain.entities.certificate import Method, Mode, PersistencyCertificate, VerificationReport
from src.domain.entities.energy_instance import EnergyInstance, Labeling
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.entities.relaxed_labeling import RelaxedLabeling, Reparametrization
from src.domain.exceptions import CertificationError, EnumerationCapError, MappingError
from src.domain.models.linear_program import INF, LinearProgram, RowKind, Sense
from src.domain.models.solver_context import SolverContext, default_context
from src.domain.services import energy_service, lp_service

logger = logging.getLogger(__name__)


def apply_mapping(p: PixelwiseMapping, x: Sequence[int]) -> Labeling:
    """y_s = p_s(x_s)."""
    if len(x) != p.n_nodes:
        raise MappingError(f"Etiquetado de longitud {len(x)} para una aplicación de {p.n_nodes} nodos.")
    return tuple(p(s, int(v)) for s, v in enumerate(x))


def _stochastic(table: Sequence[int]) -> np.ndarray:
    """Matriz P_s con P_s[i, i'] = [[p_s(i') = i]]."""
    k = len(table)
    matrix = np.zeros((k, k))
    matrix[list(table), list(range(k))] = 1.0
    return matrix


def linear_extension_apply(instance: EnergyInstance, p: PixelwiseMapping, mu: RelaxedLabeling) -> RelaxedLabeling:
    """
    Extensión lineal [p] aplicada a mu:

        ([p]mu)_s  = P_s mu_s
        ([p]mu)_st = P_s mu_st P_t^T
    """
    p.check_shape(instance.label_counts)
    matrices = [_stochastic(t) for t in p.tables]
    node = tuple(P.dot(m) for P, m in zip(matrices, mu.node))
    edge = tuple(
        matrices[s].dot(m).dot(matrices[t].T)
        for (s, t), m in zip(instance.edges, mu.edge)
    )
    return RelaxedLabeling(node=node, edge=edge, mu0=mu.mu0)


def product_pair_indicators(instance: EnergyInstance, xi: Sequence[np.ndarray]) -> List[np.ndarray]:
    """xi_stij = xi_si * xi_tj (elección por defecto dentro de Sigma)."""
    return [np.outer(xi[s], xi[t]) for s, t in instance.edges]


def sigma_violations(
    instance: EnergyInstance,
    y: Sequence[int],
    xi: Sequence[np.ndarray],
    xi_pair: Sequence[np.ndarray],
    tol: float = 1e-9,
) -> List[str]:
    """Restricciones de Sigma (y xi_{s,y_s} = 0) violadas."""
    problems = []
    for s, v in enumerate(xi):
        v = np.asarray(v, dtype=float)
        if np.min(v) < -tol or np.max(v) > 1 + tol:
            problems.append(f"xi_{s} fuera de [0,1]")
        if abs(v[y[s]]) > tol:
            problems.append(f"xi_{s},y_s distinto de cero")
    for (s, t), w in zip(instance.edges, xi_pair):
        lower = np.maximum(0.0, xi[s][:, None] + xi[t][None, :] - 1.0)
        upper = np.minimum(xi[s][:, None], xi[t][None, :])
        if np.any(w < lower - tol) or np.any(w > upper + tol):
            problems.append(f"xi_({s},{t}) fuera de Sigma")
    return problems


def apply_xi_mapping(
    instance: EnergyInstance,
    y: Sequence[int],
    xi: Sequence[np.ndarray],
    mu: RelaxedLabeling,
    xi_pair: Optional[Sequence[np.ndarray]] = None,
) -> RelaxedLabeling:
    """
    Aplicación linealizada P_xi para xi fraccionario en Sigma.

    Con xi entero coincide con la extensión lineal de p_xi. Sin `xi_pair` se
    usan los productos xi_si * xi_tj.

    Raises:
        MappingError: Si (xi, xi_pair) no pertenece a Sigma
    """
    y = instance.check_labeling(y)
    xi = [np.asarray(v, dtype=float) for v in xi]
    xi_pair = product_pair_indicators(instance, xi) if xi_pair is None else [np.asarray(w, dtype=float) for w in xi_pair]
    problems = sigma_violations(instance, y, xi, xi_pair)
    if problems:
        raise MappingError("xi fuera de Sigma: " + "; ".join(problems))

    node = []
    for s, (v, m) in enumerate(zip(xi, mu.node)):
        out = (1.0 - v) * m
        out[y[s]] += float(np.dot(v, m))
        node.append(out)
    edge = []
    for (s, t), w, m in zip(instance.edges, xi_pair, mu.edge):
        xs, xt = xi[s][:, None], xi[t][None, :]
        out = (1.0 - xs - xt + w) * m
        out[:, y[t]] += ((xt - w) * m).sum(axis=1)
        out[y[s], :] += ((xs - w) * m).sum(axis=0)
        out[y[s], y[t]] += float((w * m).sum())
        edge.append(out)
    return RelaxedLabeling(node=tuple(node), edge=tuple(edge), mu0=mu.mu0)


def improvement_costs(
    instance: EnergyInstance,
    p: PixelwiseMapping,
) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    Vector g = (I - [p]^T) f por componentes:

        g_s(i)    = f_s(i) - f_s(p_s(i))
        g_st(i,j) = f_st(i,j) - f_st(p_s(i), p_t(j))

    La componente constante es cero.
    """
    p.check_shape(instance.label_counts)
    unary = [u - u[list(p.tables[s])] for s, u in enumerate(instance.unary)]
    pairwise = [
        table - table[np.ix_(p.tables[s], p.tables[t])]
        for (s, t), table in zip(instance.edges, instance.pairwise)
    ]
    return unary, pairwise


def strict_epsilon(instance: EnergyInstance, ctx: Optional[SolverContext] = None) -> float:
    """Margen estricto por defecto: factor * max|f|."""
    ctx = default_context(ctx)
    return ctx.tol.strict_eps_factor * max(instance.max_abs_cost(), 1.0)


def build_verification_lp(
    instance: EnergyInstance,
    p: PixelwiseMapping,
    mode: Mode = Mode.WEAK,
    eps: float = 0.0,
) -> LinearProgram:
    """
    LP de verificación min_{mu en Lambda} <(I - [p]^T) f - eps h, mu>, con
    h_s(i) = [[p_s(i) != i]] en modo estricto.
    """
    unary, pairwise = improvement_costs(instance, p)
    if Mode(mode) == Mode.STRICT:
        for s, table in enumerate(p.tables):
            moved = np.array([v != i for i, v in enumerate(table)], dtype=float)
            unary[s] = unary[s] - eps * moved
    lp = lp_service.add_local_polytope(LinearProgram(name=f"verify-{Mode(mode).value}"), instance)
    lp.set_objective(lp_service.cost_objective(instance, unary, pairwise, 0.0), Sense.MINIMIZE)
    return lp


def verify_improving(
    instance: EnergyInstance,
    p: PixelwiseMapping,
    mode: Mode = Mode.WEAK,
    eps: Optional[float] = None,
    ctx: Optional[SolverContext] = None,
) -> VerificationReport:
    """
    Comprueba que [p] es mejorante sobre el politopo local.

    Args:
        instance: Instancia de energía
        p: Aplicación por píxel idempotente
        mode: WEAK o STRICT
        eps: Margen del modo estricto (por defecto `strict_epsilon`)
        ctx: Contexto de resolución

    Returns:
        VerificationReport; `witness` es el minimizador cuando falla

    Raises:
        SolverError: Si el LP no se resuelve con éxito
    """
    ctx = default_context(ctx)
    mode = Mode(mode)
    margin = 0.0
    if mode == Mode.STRICT:
        margin = strict_epsilon(instance, ctx) if eps is None else float(eps)
    if p.is_identity():
        return VerificationReport(value=0.0, improving=True, mode=mode, strict_margin=margin, backend="trivial")

    lp = build_verification_lp(instance, p, mode, margin)
    solution = lp_service.solve(lp, ctx).require_optimal(lp.name)
    improving = solution.value >= -ctx.tol.verify
    witness = None if improving else lp_service.relaxed_from_values(instance, solution.primal)
    logger.debug("Verificación %s: valor=%.3g, mejorante=%s", mode.value, solution.value, improving)
    return VerificationReport(
        value=solution.value,
        improving=improving,
        mode=mode,
        strict_margin=margin,
        witness=witness,
        backend=solution.backend,
    )


def _moved_mask(p: PixelwiseMapping) -> np.ndarray:
    """Máscara booleana p(x) != x sobre el tensor de etiquetados."""
    n = p.n_nodes
    mask = np.zeros(p.label_counts, dtype=bool)
    for s, table in enumerate(p.tables):
        shape = [1] * n
        shape[s] = len(table)
        moved = np.array([v != i for i, v in enumerate(table)]).reshape(shape)
        mask = mask | moved
    return mask


def verify_improving_bruteforce(
    instance: EnergyInstance,
    p: PixelwiseMapping,
    mode: Mode = Mode.WEAK,
    ctx: Optional[SolverContext] = None,
) -> bool:
    """
    Comprobación exhaustiva: E(p(x)) <= E(x) para todo x (modo débil) o
    E(p(x)) < E(x) siempre que p(x) != x (modo estricto).

    Raises:
        EnumerationCapError: Si el número de etiquetados supera el límite
    """
    ctx = default_context(ctx)
    p.check_shape(instance.label_counts)
    if instance.n_states() > ctx.enum_cap:
        raise EnumerationCapError(f"{instance.n_states()} estados superan el límite {ctx.enum_cap}.")
    tensor = energy_service.energy_tensor(instance)
    mapped = tensor[np.ix_(*p.tables)]
    tol = 1e-9 * max(1.0, instance.max_abs_cost())
    if Mode(mode) == Mode.WEAK:
        return bool(np.all(mapped <= tensor + tol))
    mask = _moved_mask(p)
    return bool(np.all(mapped[mask] < tensor[mask] - tol))


def component_wise_sufficient(
    instance: EnergyInstance,
    p: PixelwiseMapping,
    phi: Optional[Reparametrization] = None,
    mode: Mode = Mode.WEAK,
    tol: Optional[float] = None,
) -> bool:
    """
    Condición suficiente por componentes sobre f^phi:

        f_u(p_u(i)) <= f_u(i),   f_st(p_s(i), p_t(j)) <= f_st(i, j)

    En modo estricto además f_u(p_u(i)) < f_u(i) para toda etiqueta movida.
    """
    tol = default_context().tol.verify if tol is None else tol
    target = instance if phi is None else energy_service.reparametrize(instance, phi)
    unary, pairwise = improvement_costs(target, p)
    if any(np.min(g) < -tol for g in unary if g.size):
        return False
    if any(np.min(g) < -tol for g in pairwise if g.size):
        return False
    if Mode(mode) == Mode.STRICT:
        for s, table in enumerate(p.tables):
            for i, v in enumerate(table):
                if v != i and unary[s][i] <= tol:
                    return False
    return True


def _message_var(s: int, t: int, i: int) -> tuple:
    return ("phi", s, t, i)


def extract_reparametrization(
    instance: EnergyInstance,
    p: PixelwiseMapping,
    ctx: Optional[SolverContext] = None,
) -> Optional[Reparametrization]:
    """
    Busca phi con (I - [p]^T) f^phi >= 0 por componentes.

    Resuelve min delta sujeto a (I - [p]^T) f^phi + delta >= 0; los
    desplazamientos phi_s se cancelan y se devuelven a cero.

    Returns:
        Reparametrization si delta es cero dentro de tolerancia, None si no
    """
    ctx = default_context(ctx)
    p.check_shape(instance.label_counts)
    counts = instance.label_counts
    g_unary, g_pair = improvement_costs(instance, p)
    lp = LinearProgram(name="characterization")
    delta = lp.add_variable(("delta",), lower=0.0)
    for s, t in instance.edges:
        for a, b in ((s, t), (t, s)):
            for i in range(counts[a]):
                lp.add_variable(_message_var(a, b, i), lower=-INF)

    def add_term(coeffs: Dict, var, value: float):
        coeffs[var] = coeffs.get(var, 0.0) + value

    for s in range(instance.n_nodes):
        table = p.tables[s]
        for i, v in enumerate(table):
            if v == i:
                continue
            # g_s(i) + sum_t phi_st(i) - phi_st(p_s(i)) + delta >= 0
            coeffs = {delta: 1.0}
            for t in instance.neighbors(s):
                add_term(coeffs, _message_var(s, t, i), 1.0)
                add_term(coeffs, _message_var(s, t, v), -1.0)
            lp.add_constraint(coeffs, RowKind.GE, -float(g_unary[s][i]), name=f"u_{s}_{i}")
    for (s, t), g in zip(instance.edges, g_pair):
        ps, pt = p.tables[s], p.tables[t]
        for i in range(counts[s]):
            for j in range(counts[t]):
                if ps[i] == i and pt[j] == j:
                    continue
                # g_st(i,j) - phi_st(i) - phi_ts(j) + phi_st(p_s(i)) + phi_ts(p_t(j)) + delta >= 0
                coeffs = {delta: 1.0}
                add_term(coeffs, _message_var(s, t, i), -1.0)
                add_term(coeffs, _message_var(t, s, j), -1.0)
                add_term(coeffs, _message_var(s, t, ps[i]), 1.0)
                add_term(coeffs, _message_var(t, s, pt[j]), 1.0)
                lp.add_constraint(coeffs, RowKind.GE, -float(g[i, j]), name=f"p_{s}_{t}_{i}_{j}")
    lp.set_objective({delta: 1.0}, Sense.MINIMIZE)
    solution = lp_service.solve(lp, ctx).require_optimal(lp.name)
    threshold = ctx.tol.verify * (1.0 + instance.max_abs_cost())
    if solution.value > threshold:
        logger.debug("Sin reparametrización por componentes: delta=%.3g", solution.value)
        return None
    messages = {}
    for s, t in instance.edges:
        for a, b in ((s, t), (t, s)):
            messages[(a, b)] = np.array([solution.primal[_message_var(a, b, i)] for i in range(counts[a])])
    return Reparametrization(messages=messages, node_offsets=np.zeros(instance.n_nodes))


def compose(p1: PixelwiseMapping, p2: PixelwiseMapping) -> PixelwiseMapping:
    """
    Composición por nodos p2 o p1, cerrada a su punto fijo.

    Raises:
        MappingError: Si las formas no coinciden o alguna tabla cicla
    """
    if p1.label_counts != p2.label_counts:
        raise MappingError("Composición de aplicaciones con conjuntos de etiquetas distintos.")
    tables = []
    for s, (a, b) in enumerate(zip(p1.tables, p2.tables)):
        q = [b[a[i]] for i in range(len(a))]
        closed = []
        for i in range(len(q)):
            v = i
            for _ in range(len(q)):
                if q[v] == v:
                    break
                v = q[v]
            if q[v] != v:
                raise MappingError(f"La composición cicla en el nodo {s} desde la etiqueta {i}.")
            closed.append(v)
        tables.append(tuple(closed))
    return PixelwiseMapping(tables=tuple(tables))


def lift_mapping(
    local: PixelwiseMapping,
    labels: Sequence[Sequence[int]],
    label_counts: Sequence[int],
) -> PixelwiseMapping:
    """
    Eleva una aplicación de la instancia reducida (etiquetas vivas `labels`) a
    la original; las etiquetas no vivas quedan fijas.
    """
    tables = []
    for s, (alive, k) in enumerate(zip(labels, label_counts)):
        table = list(range(k))
        for local_i, original in enumerate(alive):
            table[original] = alive[local.tables[s][local_i]]
        tables.append(tuple(table))
    return PixelwiseMapping(tables=tuple(tables))


def embed_mapping(
    local: PixelwiseMapping,
    nodes: Sequence[int],
    label_counts: Sequence[int],
) -> PixelwiseMapping:
    """Extiende por la identidad una aplicación definida sobre `nodes`."""
    tables = [tuple(range(k)) for k in label_counts]
    for local_s, s in enumerate(nodes):
        tables[s] = local.tables[local_s]
    return PixelwiseMapping(tables=tuple(tables))


def eliminate(
    instance: EnergyInstance,
    p: PixelwiseMapping,
    method: Method,
    mode: Mode = Mode.WEAK,
    report: Optional[VerificationReport] = None,
    ctx: Optional[SolverContext] = None,
    y: Optional[Sequence[int]] = None,
) -> Tuple[Tuple[Tuple[int, ...], ...], PersistencyCertificate]:
    """
    Elimina las etiquetas movidas por una aplicación verificada.

    Sin `report` se verifica aquí mismo.

    Returns:
        Tupla (etiquetas vivas por nodo, certificado)

    Raises:
        CertificationError: Si la aplicación no es mejorante en el modo pedido
    """
    mode = Mode(mode)
    if report is None or report.mode != mode:
        report = verify_improving(instance, p, mode, ctx=ctx)
    if not report.improving:
        raise CertificationError(
            f"Aplicación no mejorante en modo {mode.value} (valor {report.value:.3g}); no se elimina nada."
        )
    certificate = PersistencyCertificate(
        method=Method(method),
        mode=mode,
        mapping=p,
        verification=report,
        y=tuple(int(v) for v in y) if y is not None else None,
    )
    alive = tuple(p.image(s) for s in range(p.n_nodes))
    logger.info(
        "%s (%s): %d etiquetas eliminadas, completitud %.2f%%",
        certificate.method.value, mode.value, certificate.n_eliminated, certificate.completeness,
    )
    return alive, certificate
