import numpy as np
import pytest

from conftest import grid_instance, random_instance
from src.domain.entities.certificate import Method, Mode
from src.domain.entities.gen_spec import Family
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.services import lp_service, mapping_service, oracle_service, persistency_service


def test_separable_instance_is_fully_eliminated(separable, ctx):
    xi, certificate = persistency_service.solve_L1(separable, (1, 0, 2), ctx)
    assert certificate.completeness == 100.0
    assert certificate.alive() == [(1,), (0,), (2,)]
    np.testing.assert_array_equal(xi.values[0], [1, 0, 1])
    assert xi.is_integral(1e-6)


def test_tight_tree_with_optimal_y_is_fully_eliminated(ctx):
    for seed in range(3):
        instance = random_instance(seed, n=3, k=3)
        _, optima = oracle_service.brute_force_minimize(instance, ctx)
        _, certificate = persistency_service.solve_L1(instance, optima[0], ctx)
        assert certificate.completeness == 100.0


@pytest.mark.parametrize("family", [Family.POTTS, Family.FULL])
def test_l1_is_integral_and_sound(family, ctx):
    for seed in range(2):
        instance = grid_instance(seed, family=family)
        y = persistency_service.select_test_labeling(instance, ctx)
        xi, certificate = persistency_service.solve_L1(instance, y, ctx)
        assert xi.is_integral(1e-6)
        assert certificate.method == Method.L1
        assert certificate.mode == Mode.WEAK
        assert certificate.y == y
        assert oracle_service.certify(instance, certificate, ctx).passed

        eps_xi, strict = persistency_service.solve_eps_L1(instance, y, None, ctx)
        assert eps_xi.is_integral(1e-6)
        assert strict.mode == Mode.STRICT
        assert oracle_service.certify(instance, strict, ctx).passed
        assert set(strict.eliminated) <= set(certificate.eliminated)


def test_rounded_xi_is_feasible(ctx):
    instance = random_instance(3, n=3, k=3, edges=[(0, 1), (1, 2), (0, 2)])
    y = (0, 1, 2)
    xi, _ = persistency_service.solve_L1(instance, y, ctx)
    assert persistency_service.l1_feasible(instance, y, xi.values, ctx)


@pytest.mark.parametrize("scale", [0.25, 0.5, 0.75])
def test_fractional_xi_rounds_up_to_optimal_xi(separable, scale, ctx):
    triangle = random_instance(3, n=3, k=3, edges=[(0, 1), (1, 2), (0, 2)])
    for instance, y in ((separable, (1, 0, 2)), (triangle, (0, 1, 2))):
        xi, _ = persistency_service.solve_L1(instance, y, ctx)
        fractional = [scale * v for v in xi.values]
        assert persistency_service.l1_feasible(instance, y, fractional, ctx)
        rounded = [(v > 0).astype(float) for v in fractional]
        for a, b in zip(rounded, xi.values):
            np.testing.assert_array_equal(a, b)
        assert persistency_service.l1_feasible(instance, y, rounded, ctx)


def test_large_eps_eliminates_nothing(ctx):
    instance = random_instance(4, n=3, k=3)
    _, certificate = persistency_service.solve_eps_L1(instance, (0, 0, 0), 1e6, ctx)
    assert certificate.n_eliminated == 0


def test_eps_monotonicity(ctx):
    instance = random_instance(5, n=3, k=3)
    y = persistency_service.select_test_labeling(instance, ctx)
    previous = None
    for eps in (0.01, 1.0, 5.0):
        _, certificate = persistency_service.solve_eps_L1(instance, y, eps, ctx)
        current = set(certificate.eliminated)
        if previous is not None:
            assert current <= previous
        previous = current


def test_all_to_one_unknown_is_strictly_sound(ctx):
    for seed in range(2):
        instance = grid_instance(seed, labels=2, height=2, width=3)
        certificate = persistency_service.max_strong_all_to_one_unknown(instance, ctx=ctx)
        assert certificate.method == Method.ALL_TO_ONE_UNKNOWN
        assert certificate.mode == Mode.STRICT
        assert oracle_service.certify(instance, certificate, ctx).passed


@pytest.mark.slow
def test_all_to_one_unknown_on_small_cyclic_graphs(ctx):
    edges = [(s, s + 1) for s in range(7)] + [(0, 7), (0, 4), (2, 6)]
    eliminated = 0
    for seed in range(50):
        instance = random_instance(300 + seed, n=8, k=2, edges=edges)
        certificate = persistency_service.max_strong_all_to_one_unknown(instance, ctx=ctx)
        assert certificate.mode == Mode.STRICT
        assert oracle_service.certify(instance, certificate, ctx).passed, seed
        eliminated += certificate.n_eliminated
    assert eliminated > 0


def test_max_improve_is_dominated_by_l1(ctx):
    for seed in range(3):
        instance = random_instance(20 + seed, n=3, k=3, edges=[(0, 1), (1, 2), (0, 2)])
        y = persistency_service.select_test_labeling(instance, ctx)
        certificate = persistency_service.max_improve(instance, y, ctx)
        _, l1 = persistency_service.solve_L1(instance, y, ctx)
        assert certificate.method == Method.MAX_IMPROVE
        assert certificate.verification.improving
        assert set(certificate.eliminated) <= set(l1.eliminated)
        assert oracle_service.certify(instance, certificate, ctx).passed


def test_max_improve_on_tight_instance_matches_l1(ctx):
    instance = random_instance(1, n=3, k=3)
    _, optima = oracle_service.brute_force_minimize(instance, ctx)
    certificate = persistency_service.max_improve(instance, optima[0], ctx)
    assert certificate.completeness == 100.0


def test_one_against_all_and_dee2_plus_l1(ctx):
    instance = grid_instance(3, labels=3)
    sweep = persistency_service.one_against_all(instance, ctx=ctx)
    assert sweep.method == Method.L1_SWEEP
    assert oracle_service.certify(instance, sweep, ctx).passed

    combined = persistency_service.dee2_plus_l1(instance, ctx)
    assert combined.method == Method.DEE2_L1
    assert mapping_service.verify_improving(instance, combined.mapping, Mode.WEAK, ctx=ctx).improving
    assert oracle_service.certify(instance, combined, ctx).passed


def test_necessary_condition_filter(chain2, ctx):
    point = persistency_service.relaxation_point(chain2, ctx)
    identity = PixelwiseMapping.identity((2, 2))
    moves_optimal_label = PixelwiseMapping(tables=((1, 1), (0, 1)))
    kept = persistency_service.necessary_condition_filter(
        chain2, [identity, moves_optimal_label], Mode.STRICT, point=point
    )
    assert kept == [identity]


def test_strictly_improving_maps_pass_the_filter(ctx):
    for seed in range(3):
        instance = random_instance(30 + seed, n=3, k=3, edges=[(0, 1), (1, 2), (0, 2)])
        point = lp_service.relaxation_interior(instance, ctx)
        y = persistency_service.select_test_labeling(instance, ctx, point=point)
        _, certificate = persistency_service.solve_eps_L1(instance, y, None, ctx)
        assert persistency_service.passes_necessary_conditions(instance, certificate.mapping, point, Mode.STRICT)
