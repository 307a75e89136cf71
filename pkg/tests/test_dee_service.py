import numpy as np
import pytest

from conftest import chain, grid_instance, random_instance
from src.domain.entities.certificate import Method, Mode
from src.domain.entities.energy_instance import EnergyInstance
from src.domain.services import dee_service, energy_service, mapping_service, oracle_service


def test_separable_keeps_only_unary_argmin(separable, ctx):
    certificate = dee_service.dee1(separable, ctx=ctx)
    assert certificate.method == Method.DEE1
    assert certificate.alive() == [(1,), (0,), (2,)]
    assert certificate.n_eliminated == 6


def test_uniform_costs_tie_break(ctx):
    instance = EnergyInstance.zeros((2, 2), edges=[(0, 1)])
    weak = dee_service.dee1(instance, Mode.WEAK, ctx)
    assert weak.alive() == [(0,), (0,)]
    strict = dee_service.dee1(instance, Mode.STRICT, ctx)
    assert strict.n_eliminated == 0


def test_dee2_without_pairwise_matches_dee1(separable, ctx):
    assert dee_service.dee2(separable, ctx=ctx).eliminated == dee_service.dee1(separable, ctx=ctx).eliminated


@pytest.mark.parametrize("seed", range(4))
def test_dee_is_sound_and_dee2_extends_dee1(seed, ctx):
    instance = random_instance(seed, n=4, k=3, edges=[(0, 1), (1, 2), (2, 3), (0, 3)])
    first = dee_service.dee1(instance, ctx=ctx)
    second = dee_service.dee2(instance, ctx=ctx)
    assert set(first.eliminated) <= set(second.eliminated)
    assert first.verification.improving and second.verification.improving
    assert oracle_service.certify(instance, first, ctx).passed
    assert oracle_service.certify(instance, second, ctx).passed


def test_strict_dee1_is_sound_on_grids(ctx):
    for seed in range(3):
        instance = grid_instance(seed, height=2, width=3, labels=3)
        certificate = dee_service.dee1(instance, Mode.STRICT, ctx)
        assert certificate.mode == Mode.STRICT
        assert oracle_service.certify(instance, certificate, ctx).passed


def test_dee1_reaches_a_fixpoint(ctx):
    instance = grid_instance(4, height=2, width=3, labels=3)
    certificate = dee_service.dee1(instance, ctx=ctx)
    reduced, _ = energy_service.reduce_instance(instance, certificate.alive())
    assert dee_service.dee1(reduced, ctx=ctx).n_eliminated == 0


def test_dee1_mapping_on_star_is_component_wise_improving():
    # estrella centrada en 0: todas las etiquetas 1 quedan dominadas por la 0
    table = np.array([[0.0, 1.0], [2.0, 1.0]])
    instance = EnergyInstance(
        label_counts=(2, 2, 2),
        unary=(np.array([0.0, 1.0]), np.zeros(2), np.zeros(2)),
        edges=((0, 1), (0, 2)),
        pairwise=(table, table),
    )
    certificate = dee_service.dee1(instance)
    assert (0, 1) in certificate.eliminated
    assert certificate.alive() == [(0,), (0,), (0,)]
    assert mapping_service.component_wise_sufficient(instance, certificate.mapping)


def test_dee2_records_pair_exclusions(ctx):
    # DEE1 no elimina nada: cada etiqueta es la mejor para algún vecino
    instance = chain([[0, 0], [0, 0]], [[[0, 5], [5, 0]]])
    assert dee_service.dee1(instance, ctx=ctx).n_eliminated == 0
    certificate = dee_service.dee2(instance, ctx=ctx)
    assert certificate.pair_exclusions == [(0, 1, 0, 1), (0, 1, 1, 0), (0, 1, 1, 1)]
    assert certificate.alive() == [(0,), (0,)]
    assert oracle_service.certify(instance, certificate, ctx).passed
