"""
Servicio de dominio para programas lineales sobre el politopo local:
construcción del LP de Schlesinger, resolución con control de calidad y
extracción de puntos del interior relativo de la cara óptima.
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.domain.entities.energy_instance import EnergyInstance
from src.domain.entities.relaxed_labeling import RelaxedLabeling
from src.domain.models.linear_program import (
    INF,
    LinearProgram,
    LpSolution,
    LpStatus,
    OptimalFacetPoint,
    Row,
    RowKind,
    Sense,
    VarId,
)
from src.domain.models.solver_context import SolverContext, default_context

logger = logging.getLogger(__name__)

MU0 = ("mu0",)


def node_var(s: int, i: int) -> tuple:
    return ("mu", s, i)


def edge_var(s: int, t: int, i: int, j: int) -> tuple:
    """Variable mu_st(i,j) en la orientación canónica (s,t) de la arista."""
    return ("mu", s, t, i, j)


def add_local_polytope(lp: LinearProgram, instance: EnergyInstance) -> LinearProgram:
    """
    Declara las variables mu y las restricciones del politopo local en `lp`.

    Filas: mu0 = 1, normalización por nodo y marginalización por arista en
    ambos sentidos.
    """
    lp.add_variable(MU0)
    for s, k in enumerate(instance.label_counts):
        for i in range(k):
            lp.add_variable(node_var(s, i))
    for s, t in instance.edges:
        for i in range(instance.label_counts[s]):
            for j in range(instance.label_counts[t]):
                lp.add_variable(edge_var(s, t, i, j))

    lp.add_constraint({MU0: 1.0}, RowKind.EQ, 1.0, name="mu0")
    for s, k in enumerate(instance.label_counts):
        row = {node_var(s, i): 1.0 for i in range(k)}
        row[MU0] = -1.0
        lp.add_constraint(row, RowKind.EQ, 0.0, name=f"norm_{s}")
    for s, t in instance.edges:
        ks, kt = instance.label_counts[s], instance.label_counts[t]
        for i in range(ks):
            row = {edge_var(s, t, i, j): 1.0 for j in range(kt)}
            row[node_var(s, i)] = -1.0
            lp.add_constraint(row, RowKind.EQ, 0.0, name=f"marg_{s}_{t}_{i}")
        for j in range(kt):
            row = {edge_var(s, t, i, j): 1.0 for i in range(ks)}
            row[node_var(t, j)] = -1.0
            lp.add_constraint(row, RowKind.EQ, 0.0, name=f"marg_{t}_{s}_{j}")
    return lp


def cost_objective(
    instance: EnergyInstance,
    unary: Optional[Sequence[np.ndarray]] = None,
    pairwise: Optional[Sequence[np.ndarray]] = None,
    f0: Optional[float] = None,
) -> Dict[VarId, float]:
    """
    Coeficientes de <g, mu> para un vector de costes g con la forma de la instancia
    (por defecto los costes de la propia instancia).
    """
    unary = instance.unary if unary is None else unary
    pairwise = instance.pairwise if pairwise is None else pairwise
    f0 = instance.f0 if f0 is None else f0
    coeffs: Dict[VarId, float] = {MU0: float(f0)}
    for s, u in enumerate(unary):
        for i, value in enumerate(u):
            coeffs[node_var(s, i)] = float(value)
    for (s, t), table in zip(instance.edges, pairwise):
        for (i, j), value in np.ndenumerate(table):
            coeffs[edge_var(s, t, i, j)] = float(value)
    return coeffs


def build_schlesinger_lp(instance: EnergyInstance) -> LinearProgram:
    """
    LP de relajación estándar sobre el politopo local: min <f, mu>.

    Args:
        instance: Instancia de energía

    Returns:
        Programa lineal listo para resolver
    """
    lp = add_local_polytope(LinearProgram(name="schlesinger"), instance)
    lp.set_objective(cost_objective(instance), Sense.MINIMIZE)
    return lp


def relaxed_from_values(instance: EnergyInstance, values: Dict[VarId, float]) -> RelaxedLabeling:
    """Reconstruye el etiquetado relajado a partir de los valores de las variables mu."""
    node = [
        np.array([values[node_var(s, i)] for i in range(k)])
        for s, k in enumerate(instance.label_counts)
    ]
    edge = []
    for s, t in instance.edges:
        ks, kt = instance.label_counts[s], instance.label_counts[t]
        table = np.array([[values[edge_var(s, t, i, j)] for j in range(kt)] for i in range(ks)])
        edge.append(table.reshape(ks, kt))
    return RelaxedLabeling(node=tuple(node), edge=tuple(edge), mu0=values[MU0])


def primal_residual(lp: LinearProgram, values: Dict[VarId, float]) -> float:
    """Máxima violación relativa de filas y cotas en el punto dado."""
    worst = 0.0
    for row in lp.rows:
        activity = sum(float(coef) * values[var] for var, coef in row.coeffs)
        scale = 1.0 + abs(float(row.rhs)) + sum(abs(float(coef) * values[var]) for var, coef in row.coeffs)
        gap = activity - float(row.rhs)
        violation = abs(gap) if row.kind == RowKind.EQ else max(0.0, -gap)
        worst = max(worst, violation / scale)
    for var, (lo, hi) in lp.variables.items():
        x = values[var]
        worst = max(worst, (lo - x) / (1.0 + abs(x)), (x - hi) / (1.0 + abs(x)))
    return worst


def dual_bound(lp: LinearProgram, dual: np.ndarray, slack: float = 1e-6) -> float:
    """
    Cota lagrangiana asociada a los multiplicadores `dual`.

    Un coste reducido de magnitud menor que `slack` relativo sobre una cota
    infinita se trata como cero. Devuelve +-inf si los multiplicadores no
    acotan el problema.
    """
    c, A, kinds, b, lower, upper = lp.matrices()
    reduced = c - A.T.dot(dual)
    scale = max(1.0, float(np.max(np.abs(c)))) if len(c) else 1.0
    minimize = lp.sense == Sense.MINIMIZE
    total = float(np.dot(b, dual))
    for r, lo, hi in zip(reduced, lower, upper):
        if r == 0:
            continue
        # minimizar: r*x en su mínimo sobre [lo, hi]; maximizar: en su máximo
        use_lower = (r > 0) == minimize
        bound = lo if use_lower else hi
        if not np.isfinite(bound):
            if abs(r) <= slack * scale:
                continue
            return -INF if minimize else INF
        total += r * bound
    return total


def solve(lp: LinearProgram, ctx: Optional[SolverContext] = None) -> LpSolution:
    """
    Resuelve `lp` con el backend del contexto y valida el resultado.

    Un óptimo cuyo residuo primal o cuyo salto primal-dual supere las
    tolerancias se devuelve con estado SOLVER_ERROR.
    """
    ctx = default_context(ctx)
    backend = ctx.backend.resolve(lp)
    solution = backend.solve(lp)
    if not solution.is_optimal:
        logger.debug("LP %s: %s", lp.name, solution.status.value)
        return solution

    factor = 1.0 if backend.is_exact(lp) else 100.0
    residual = primal_residual(lp, solution.primal)
    if residual > ctx.tol.feas * factor:
        solution.status = LpStatus.SOLVER_ERROR
        solution.message = f"residuo primal {residual:.3g}"
        logger.warning("LP %s: residuo primal %.3g con %s", lp.name, residual, solution.backend)
        return solution

    if solution.dual is not None:
        solution.dual_value = dual_bound(lp, solution.dual)
        gap = abs(solution.value - solution.dual_value)
        if gap > ctx.tol.gap * factor * max(1.0, abs(solution.value)):
            solution.status = LpStatus.SOLVER_ERROR
            solution.message = f"salto primal-dual {gap:.3g}"
            logger.warning("LP %s: salto primal-dual %.3g con %s", lp.name, gap, solution.backend)
            return solution
    logger.debug(
        "LP %s resuelto con %s: valor=%.9g, %d iteraciones",
        lp.name, solution.backend, solution.value, solution.iterations,
    )
    return solution


def _support_coordinates(lp: LinearProgram) -> List[VarId]:
    return [var for var, (lo, _) in lp.variables.items() if np.isfinite(lo)]


def relative_interior_optimum(
    lp: LinearProgram,
    ctx: Optional[SolverContext] = None,
    instance: Optional[EnergyInstance] = None,
) -> OptimalFacetPoint:
    """
    Óptimo de `lp` con soporte máximo sobre la cara óptima.

    Con backend exacto se resuelve un único programa homogeneizado; con backend
    en coma flotante se restringe la cara por holgura complementaria y se
    maximizan iterativamente las coordenadas aún nulas.

    Args:
        lp: Programa con óptimo finito
        ctx: Contexto de resolución
        instance: Si se da, el resultado incluye `mu` como RelaxedLabeling

    Returns:
        OptimalFacetPoint con valores, soporte y valor óptimo
    """
    ctx = default_context(ctx)
    base = solve(lp, ctx).require_optimal(lp.name)
    backend = ctx.backend.resolve(lp)
    coords = _support_coordinates(lp)
    if backend.is_exact(lp) and base.exact_value is not None:
        point = _batched_interior(lp, base, coords, backend, ctx)
    else:
        point = _iterative_interior(lp, base, coords, ctx)
    if instance is not None:
        point.mu = relaxed_from_values(instance, point.values)
    logger.debug("Interior relativo de %s: |soporte|=%d en %d resoluciones", lp.name, len(point.support), point.n_solves)
    return point


def _batched_interior(lp: LinearProgram, base: LpSolution, coords: List[VarId], backend, ctx) -> OptimalFacetPoint:
    """
    Programa homogeneizado: x = lambda * punto de la cara, lambda >= 1,
    t_j <= x_j - lo_j * lambda, 0 <= t_j <= 1, max sum t.
    """
    lam = ("__lambda",)
    h = LinearProgram(name=f"{lp.name}-interior")
    for var, (lo, hi) in lp.variables.items():
        h.add_variable(("x", var), lower=0.0 if lo == 0 else -INF, upper=0.0 if hi == 0 else INF)
    h.add_variable(lam, lower=1.0)
    for var, (lo, hi) in lp.variables.items():
        if np.isfinite(lo) and lo != 0:
            h.add_constraint({("x", var): 1.0, lam: -lo}, RowKind.GE, 0.0)
        if np.isfinite(hi) and hi != 0:
            h.add_constraint({("x", var): -1.0, lam: hi}, RowKind.GE, 0.0)
    for row in lp.rows:
        coeffs = {("x", var): coef for var, coef in row.coeffs}
        coeffs[lam] = -row.rhs
        h.add_constraint(coeffs, row.kind, 0.0)
    optimum = {("x", var): coef for var, coef in lp.objective.items()}
    optimum[lam] = -base.exact_value
    h.add_constraint(optimum, RowKind.EQ, 0.0, name="optimal_face")
    objective = {}
    for var in coords:
        lo = lp.variables[var][0]
        t = ("t", var)
        h.add_variable(t, lower=0.0, upper=1.0)
        h.add_constraint({("x", var): 1.0, lam: -lo, t: -1.0}, RowKind.GE, 0.0)
        objective[t] = 1.0
    h.set_objective(objective, Sense.MAXIMIZE)

    solution = backend.solve(h).require_optimal(h.name)
    scale = solution.primal[lam]
    values = {var: solution.primal[("x", var)] / scale for var in lp.variables}
    support = frozenset(var for var in coords if solution.primal[("t", var)] > 0.5)
    return OptimalFacetPoint(value=base.value, values=values, support=support, n_solves=2)


def _optimal_face(lp: LinearProgram, base: LpSolution) -> LinearProgram:
    """Cara óptima descrita por holgura complementaria con el dual de `base`."""
    c, A, kinds, b, lower, upper = lp.matrices()
    reduced = c - A.T.dot(base.dual)
    threshold = 1e-7 * (1.0 + (float(np.max(np.abs(c))) if len(c) else 0.0))
    minimize = lp.sense == Sense.MINIMIZE
    face = lp.copy(name=f"{lp.name}-face")
    for (var, (lo, hi)), r in zip(lp.variables.items(), reduced):
        if abs(r) <= threshold:
            continue
        at_lower = (r > 0) == minimize
        if at_lower and np.isfinite(lo):
            face.variables[var] = (lo, lo)
        elif not at_lower and np.isfinite(hi):
            face.variables[var] = (hi, hi)
    rows = []
    for row, y in zip(lp.rows, base.dual):
        if row.kind == RowKind.GE and abs(y) > threshold:
            rows.append(Row(coeffs=row.coeffs, kind=RowKind.EQ, rhs=row.rhs, name=row.name))
        else:
            rows.append(row)
    face.rows = rows
    return face


def _iterative_interior(lp: LinearProgram, base: LpSolution, coords: List[VarId], ctx) -> OptimalFacetPoint:
    tau = ctx.tol.supp
    lower = {var: lp.variables[var][0] for var in coords}
    support = {var for var in coords if base.primal[var] - lower[var] > tau}
    rest = [var for var in coords if var not in support]
    points = [base.primal]
    face = _optimal_face(lp, base)
    n_solves = 1
    while rest:
        face.set_objective({var: 1.0 for var in rest}, Sense.MAXIMIZE)
        solution = solve(face, ctx).require_optimal(face.name)
        n_solves += 1
        gains = {var: solution.primal[var] - lower[var] for var in rest}
        new = {var for var, gain in gains.items() if gain > tau}
        if not new:
            break
        support |= new
        rest = [var for var in rest if var not in new]
        points.append(solution.primal)
    values = {var: float(np.mean([p[var] for p in points])) for var in lp.variables}
    achieved = lp.objective_value(values)
    if abs(achieved - base.value) > ctx.tol.gap * max(1.0, abs(base.value)) * 100:
        logger.warning("Punto interior de %s con valor %.9g frente a %.9g", lp.name, achieved, base.value)
    return OptimalFacetPoint(value=base.value, values=values, support=frozenset(support), n_solves=n_solves)


def lp_value(lp: LinearProgram, ctx: Optional[SolverContext] = None) -> float:
    return solve(lp, ctx).require_optimal(lp.name).value


def solve_relaxation(instance: EnergyInstance, ctx: Optional[SolverContext] = None) -> LpSolution:
    """Resuelve el LP de Schlesinger; `dual_value` contiene psi."""
    return solve(build_schlesinger_lp(instance), ctx).require_optimal("schlesinger")


def relaxation_interior(instance: EnergyInstance, ctx: Optional[SolverContext] = None) -> OptimalFacetPoint:
    return relative_interior_optimum(build_schlesinger_lp(instance), ctx, instance=instance)


def labeling_from_interior(point: OptimalFacetPoint) -> tuple:
    """y_s = menor índice en argmax_i mu_s(i) (mu_s(i)=1 si el nodo es entero)."""
    return tuple(int(np.argmax(m)) for m in point.mu.node)


def integral_nodes(point: OptimalFacetPoint, tol: float = 1e-7) -> List[int]:
    return [s for s, m in enumerate(point.mu.node) if np.max(m) >= 1.0 - tol]


def support_sets(point: OptimalFacetPoint, instance: EnergyInstance) -> List[frozenset]:
    """O_s a partir del soporte del punto interior."""
    return [
        frozenset(i for i in range(k) if node_var(s, i) in point.support)
        for s, k in enumerate(instance.label_counts)
    ]

