from types import SimpleNamespace

import numpy as np
import pytest

from conftest import grid_instance, random_instance
from src.domain.entities.certificate import Method, Mode
from src.domain.entities.pixelwise_mapping import PixelwiseMapping
from src.domain.entities.window import Window
from src.domain.exceptions import CertificationError, InstanceError, IntegralityError
from src.domain.models.solver_context import SolverContext
from src.domain.services import mapping_service, oracle_service, persistency_service, window_service


def test_grid_windows_tile_the_grid():
    instance = grid_instance(0, height=4, width=4, labels=2)
    windows = window_service.grid_windows(instance, (2, 2), 2)
    assert [w.label for w in windows] == ["r0c0", "r0c2", "r2c0", "r2c2"]
    assert windows[0].nodes == (0, 1, 4, 5)


def test_last_grid_window_is_clamped_to_border():
    instance = grid_instance(0, height=4, width=4, labels=2)
    windows = window_service.grid_windows(instance, (3, 3), 2)
    assert [w.label for w in windows] == ["r0c0", "r0c1", "r1c0", "r1c1"]
    assert all(len(w) == 9 for w in windows)


def test_bfs_windows_on_chain():
    instance = random_instance(0, n=5, k=2)
    windows = window_service.bfs_windows(instance, radius=1, stride=2)
    assert [w.label for w in windows] == ["bfs0", "bfs2", "bfs4"]
    assert [w.nodes for w in windows] == [(0, 1), (1, 2, 3), (3, 4)]


def test_window_validation():
    with pytest.raises(InstanceError):
        Window.of([])
    with pytest.raises(InstanceError):
        Window.of([1, 1])
    with pytest.raises(InstanceError):
        window_service.star_problem(random_instance(0, n=2, k=2), Window.of([5]))


def test_star_problem_keeps_edges_touching_window():
    instance = grid_instance(1, height=2, width=2)
    star, nodes = window_service.star_problem(instance, Window.of([0]))
    assert nodes == (0, 1, 2)
    assert star.n_edges == 2
    assert star.label_counts == (3, 3, 3)


def test_single_node_window_support_is_unary_argmin(separable, ctx):
    for s, best in enumerate((1, 0, 2)):
        window = Window.of([s])
        point = window_service.window_test_problem(separable, window, ctx)
        assert window_service.window_supports(window, point) == [(best,)]
        assert window_service.window_test_labeling(point) == (best,)


def test_whole_graph_window_matches_l1(ctx):
    instance = grid_instance(2, height=2, width=2)
    y = persistency_service.select_test_labeling(instance, ctx)
    _, l1 = persistency_service.solve_L1(instance, y, ctx)
    window = Window.of(range(instance.n_nodes), name="all")
    certificate = window_service.window_persistency(instance, [window], ctx, y=y, n_jobs=1)
    assert certificate.method == Method.WINDOW
    assert certificate.mode == Mode.WEAK
    assert set(certificate.eliminated) == set(l1.eliminated)


@pytest.mark.parametrize("dee", [False, True])
def test_overlapping_windows_pass_global_verification(dee, ctx):
    instance = grid_instance(5, height=2, width=3)
    windows = window_service.grid_windows(instance, (2, 2), 1)
    certificate = window_service.window_persistency(instance, windows, ctx, dee=dee, n_jobs=1)
    assert mapping_service.verify_improving(instance, certificate.mapping, Mode.WEAK, ctx=ctx).improving
    assert oracle_service.certify(instance, certificate, ctx).passed
    assert certificate.diagnostics[-1].startswith("orden:")


def test_window_budget_is_reported(ctx):
    instance = grid_instance(3, height=2, width=2)
    tight = SolverContext(backend_name="simplex", window_budget=1)
    windows = window_service.grid_windows(instance, (2, 2), 1)
    certificate = window_service.window_persistency(instance, windows, tight, n_jobs=1)
    assert certificate.n_eliminated == 0
    assert "presupuesto" in certificate.diagnostics[0]
    assert certificate.diagnostics[-1] == "orden: "


def test_history_tracks_remaining_labels(ctx):
    instance = grid_instance(4, height=2, width=3)
    windows = window_service.grid_windows(instance, (2, 2), 1)
    certificate = window_service.window_persistency(instance, windows, ctx, sweeps=2, n_jobs=1)
    history = certificate.history
    start = [row for row in history if row["step"] == 0]
    assert [row["window"] for row in start] == ["start"] * instance.n_nodes
    assert all(row["remaining"] == 3 for row in start)

    last_step = max(row["step"] for row in history)
    last = sorted((row for row in history if row["step"] == last_step), key=lambda row: row["node"])
    assert [row["remaining"] for row in last] == [len(a) for a in certificate.alive()]
    assert list(window_service.remaining_labels(certificate.mapping)) == [len(a) for a in certificate.alive()]


def test_window_solver_failure_propagates(chain2, ctx, monkeypatch):
    def failing_l1(*args, **kwargs):
        raise IntegralityError("xi óptimo no entero (desviación 0.5).")

    monkeypatch.setattr(persistency_service, "solve_L1", failing_l1)
    with pytest.raises(IntegralityError):
        window_service.window_persistency(chain2, [Window.of([0])], ctx, y=(0, 0), n_jobs=1)


def test_window_map_failing_reverification_raises(chain2, ctx, monkeypatch):
    # mover el nodo 0 a la etiqueta 1 empeora la energía de (0, 0) en 3
    worsening = PixelwiseMapping(tables=((1, 1), (0, 1)))

    def fake_l1(star, y, ctx=None, movable=None):
        return None, SimpleNamespace(mapping=worsening)

    monkeypatch.setattr(persistency_service, "solve_L1", fake_l1)
    with pytest.raises(CertificationError, match="re-verificación"):
        window_service.window_persistency(chain2, [Window.of([0])], ctx, y=(0, 0), n_jobs=1)


def test_star_verification_equals_global_verification(ctx):
    window = Window.of([1, 4])
    improving_seen = rejected_seen = 0
    for seed in range(8):
        instance = grid_instance(seed, height=2, width=3, labels=3)
        star, nodes = window_service.star_problem(instance, window)
        rng = np.random.default_rng(seed)
        y = [int(v) for v in rng.integers(0, 3, instance.n_nodes)]
        moved = [list(rng.choice(3, size=2, replace=False)) if s in window.nodes else [] for s in range(instance.n_nodes)]
        candidates = [PixelwiseMapping.subset_to_one(instance.label_counts, y, moved)]

        _, local_l1 = persistency_service.solve_L1(star, tuple(y[s] for s in nodes), ctx, movable=range(len(window)))
        candidates.append(mapping_service.embed_mapping(local_l1.mapping, nodes, instance.label_counts))

        for p in candidates:
            local = PixelwiseMapping(tables=tuple(p.tables[s] for s in nodes))
            on_star = mapping_service.verify_improving(star, local, Mode.WEAK, ctx=ctx)
            on_graph = mapping_service.verify_improving(instance, p, Mode.WEAK, ctx=ctx)
            assert on_star.value == pytest.approx(on_graph.value, abs=1e-7)
            assert on_star.improving == on_graph.improving
            improving_seen += on_graph.improving
            rejected_seen += not on_graph.improving
    assert improving_seen >= 8
    assert rejected_seen >= 1
