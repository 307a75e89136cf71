import pytest
from pydantic import ValidationError

from src.application.dto.run_config import RunConfig, ToleranceConfig, parse_shape
from src.domain.entities.gen_spec import Family


def test_parse_shape():
    assert parse_shape("3x4") == (3, 4)
    assert parse_shape("8") == (8, 8)
    assert parse_shape(" 10X10 ") == (10, 10)
    with pytest.raises(ValueError):
        parse_shape("3x")


def test_defaults():
    config = RunConfig(command="gen")
    assert config.method == ["l1"]
    assert config.grid == (10, 10)
    assert config.labels == 3
    assert config.family == Family.POTTS
    assert config.y == "from-lp"


def test_window_defaults():
    config = RunConfig(command="persist", instance="a.txt", method=["window"])
    assert config.window == (8, 8)
    assert config.stride == 4
    config = RunConfig(command="persist", instance="a.txt", method=["window"], window=(3, 5))
    assert config.stride == 1
    assert RunConfig(command="persist", instance="a.txt", method=["window"], radius=2).window is None


@pytest.mark.parametrize(
    "kwargs",
    [
        {"command": "gen", "labels": 1},
        {"command": "gen", "method": ["qpbo"]},
        {"command": "gen", "method": []},
        {"command": "gen", "y": "random"},
        {"command": "gen", "jobs": 0},
        {"command": "gen", "grid": (0, 3)},
        {"command": "persist"},
        {"command": "verify", "instance": "a.txt"},
        {"command": "bench"},
        {"command": "gen", "eps": 0.0},
        {"command": "fit"},
    ],
)
def test_invalid_configs(kwargs):
    with pytest.raises(ValidationError):
        RunConfig(**kwargs)


def test_y_specs_are_accepted():
    for y in ("from-lp", "uniform:2", "file:labels.txt"):
        assert RunConfig(command="gen", y=y).y == y


def test_derived_objects():
    config = RunConfig(
        command="bench",
        output="bench.csv",
        grid=(2, 3),
        labels=4,
        conn=8,
        family="full",
        backend="simplex",
        cap=500,
        budget=77,
        tolerances=ToleranceConfig(supp=1e-5),
    )
    spec = config.gen_spec(9)
    assert (spec.seed, spec.height, spec.width, spec.labels, spec.connectivity) == (9, 2, 3, 4, 8)
    assert spec.family == Family.FULL
    ctx = config.solver_context()
    assert ctx.backend_name == "simplex"
    assert ctx.enum_cap == 500
    assert ctx.window_budget == 77
    assert ctx.tol.supp == 1e-5
