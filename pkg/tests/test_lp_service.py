import numpy as np
import pytest

from conftest import labelings, random_instance
from src.domain.models.linear_program import LinearProgram, LpStatus, RowKind, Sense
from src.domain.services import energy_service, lp_service, oracle_service


def brute_min(instance):
    return min(energy_service.energy(instance, x) for x in labelings(instance))


def test_schlesinger_lp_counts(chain2):
    lp = lp_service.build_schlesinger_lp(chain2)
    assert lp.n_variables == 1 + 4 + 4
    assert lp.n_constraints == 2 * 2 + 2 + 1
    assert lp.sense == Sense.MINIMIZE


def test_objective_at_delta_is_energy():
    instance = random_instance(0, n=4, k=2, edges=[(0, 1), (1, 2), (2, 3), (3, 0)])
    lp = lp_service.build_schlesinger_lp(instance)
    for x in labelings(instance):
        values = {var: 0.0 for var in lp.variables}
        values[lp_service.MU0] = 1.0
        for s, v in enumerate(x):
            values[lp_service.node_var(s, v)] = 1.0
        for s, t in instance.edges:
            values[lp_service.edge_var(s, t, x[s], x[t])] = 1.0
        assert lp.objective_value(values) == pytest.approx(energy_service.energy(instance, x))


@pytest.mark.parametrize("seed", range(3))
def test_relaxation_is_tight_on_trees(seed, ctx):
    instance = random_instance(seed, n=3, k=3)
    solution = lp_service.solve_relaxation(instance, ctx)
    assert solution.is_optimal
    assert solution.value == pytest.approx(brute_min(instance), abs=1e-9)


def test_frustrated_cycle_has_gap(frustrated_triangle, ctx):
    value = lp_service.solve_relaxation(frustrated_triangle, ctx).value
    assert value == pytest.approx(0.0, abs=1e-9)
    assert brute_min(frustrated_triangle) == 1.0


def test_weak_duality(ctx):
    instance = random_instance(9, n=3, k=2, edges=[(0, 1), (1, 2), (0, 2)])
    solution = lp_service.solve_relaxation(instance, ctx)
    assert solution.dual_value is not None
    assert solution.dual_value <= solution.value + 1e-7


def test_simple_bound_program(ctx):
    lp = LinearProgram(name="bound")
    lp.add_variable("x")
    lp.add_constraint({"x": 1.0}, RowKind.GE, 3.0)
    lp.set_objective({"x": 1.0}, Sense.MINIMIZE)
    assert lp_service.lp_value(lp, ctx) == pytest.approx(3.0)


def test_empty_region_is_infeasible(ctx):
    lp = LinearProgram(name="empty")
    lp.add_variable("x")
    lp.add_constraint({"x": 1.0}, RowKind.GE, 3.0)
    lp.add_constraint({"x": -1.0}, RowKind.GE, -1.0)
    lp.set_objective({"x": 1.0}, Sense.MINIMIZE)
    assert lp_service.solve(lp, ctx).status == LpStatus.INFEASIBLE


def test_interior_of_segment_face(ctx):
    lp = LinearProgram(name="segment")
    lp.add_variable("a")
    lp.add_variable("b")
    lp.add_constraint({"a": 1.0, "b": 1.0}, RowKind.EQ, 1.0)
    lp.set_objective({"a": 1.0, "b": 1.0}, Sense.MINIMIZE)
    point = lp_service.relative_interior_optimum(lp, ctx)
    assert point.value == pytest.approx(1.0)
    assert point.support == frozenset({"a", "b"})
    assert point.values["a"] + point.values["b"] == pytest.approx(1.0)


def test_interior_of_unique_optimum(chain2, ctx):
    point = lp_service.relaxation_interior(chain2, ctx)
    assert point.positive(lp_service.node_var(0, 0))
    assert not point.positive(lp_service.node_var(0, 1))
    assert lp_service.labeling_from_interior(point) == (0, 0)
    assert lp_service.integral_nodes(point) == [0, 1]


@pytest.mark.parametrize("backend", ["simplex", "highs"])
def test_interior_covers_symmetric_minima(symmetric_chain, backend, ctx):
    point = lp_service.relaxation_interior(symmetric_chain, ctx.with_backend(backend))
    for s in range(3):
        assert point.positive(lp_service.node_var(s, 0))
        assert point.positive(lp_service.node_var(s, 1))
    assert point.mu.is_feasible(symmetric_chain, tol=1e-7)


def test_interior_support_contains_vertex_supports(ctx):
    instance = random_instance(12, n=3, k=2, edges=[(0, 1), (1, 2), (0, 2)], scale=2)
    point = lp_service.relaxation_interior(instance, ctx)
    rng = np.random.default_rng(0)
    lp = lp_service.build_schlesinger_lp(instance)
    for _ in range(3):
        # perturbación dentro de la cara óptima: mismo valor, otro vértice
        face = lp.copy()
        face.add_constraint(
            {var: -coef for var, coef in lp.objective.items()}, RowKind.GE, -point.value - 1e-9
        )
        face.set_objective({var: float(rng.uniform(-1, 1)) for var in lp.variables}, Sense.MINIMIZE)
        vertex = lp_service.solve(face, ctx.with_backend("highs")).require_optimal()
        for var, value in vertex.primal.items():
            if value > 1e-6:
                assert point.positive(var)


def test_highs_agrees_with_simplex(ctx, highs_ctx):
    instance = random_instance(21, n=4, k=3, edges=[(0, 1), (1, 2), (2, 3), (0, 3)])
    exact = lp_service.solve_relaxation(instance, ctx).value
    approx = lp_service.solve_relaxation(instance, highs_ctx).value
    assert approx == pytest.approx(exact, abs=1e-6)
    assert exact <= oracle_service.min_energy(instance, ctx=ctx) + 1e-9
