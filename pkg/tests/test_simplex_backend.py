from fractions import Fraction

import pytest

from src.domain.models.linear_program import INF, LinearProgram, LpStatus, RowKind, Sense
from src.domain.solvers import AutoBackend, get_backend
from src.domain.solvers.simplex_backend import SimplexBackend


def small_program():
    # max x + y  s.a.  x + 2y <= 4,  3x + y <= 6,  x, y >= 0
    lp = LinearProgram(name="small")
    lp.add_variable("x")
    lp.add_variable("y")
    lp.add_constraint({"x": -1, "y": -2}, RowKind.GE, -4)
    lp.add_constraint({"x": -3, "y": -1}, RowKind.GE, -6)
    lp.set_objective({"x": 1, "y": 1}, Sense.MAXIMIZE)
    return lp


def test_exact_optimum_is_rational():
    solution = SimplexBackend().solve(small_program())
    assert solution.status == LpStatus.OPTIMAL
    assert solution.exact_value == Fraction(14, 5)
    assert solution.primal["x"] == pytest.approx(1.6)
    assert solution.primal["y"] == pytest.approx(1.2)
    assert solution.backend == "simplex-exact"


def test_float_path_matches_exact():
    solution = SimplexBackend(exact_var_limit=0).solve(small_program())
    assert solution.exact_value is None
    assert solution.value == pytest.approx(2.8)


def test_free_variable_and_equality():
    lp = LinearProgram(name="free")
    lp.add_variable("z", lower=-INF)
    lp.add_variable("w")
    lp.add_constraint({"z": 1, "w": 1}, RowKind.EQ, -2)
    lp.set_objective({"w": 1}, Sense.MINIMIZE)
    solution = SimplexBackend().solve(lp)
    assert solution.is_optimal
    assert solution.primal["z"] == pytest.approx(-2.0)
    assert solution.value == pytest.approx(0.0)


def test_unbounded_program():
    lp = LinearProgram(name="unbounded")
    lp.add_variable("x")
    lp.add_constraint({"x": 1}, RowKind.GE, 1)
    lp.set_objective({"x": 1}, Sense.MAXIMIZE)
    assert SimplexBackend().solve(lp).status == LpStatus.UNBOUNDED


def test_degenerate_program_terminates():
    # vértice degenerado en el origen: Bland evita el ciclado
    lp = LinearProgram(name="degenerate")
    for v in ("a", "b", "c", "d"):
        lp.add_variable(v)
    lp.add_constraint({"a": -0.5, "b": 5.5, "c": 2.5, "d": -9}, RowKind.GE, 0)
    lp.add_constraint({"a": -0.5, "b": 1.5, "c": 0.5, "d": -1}, RowKind.GE, 0)
    lp.add_constraint({"a": -1}, RowKind.GE, -1)
    lp.set_objective({"a": 10, "b": -57, "c": -9, "d": -24}, Sense.MAXIMIZE)
    solution = SimplexBackend().solve(lp)
    assert solution.is_optimal
    assert solution.value == pytest.approx(1.0)


def test_auto_backend_picks_by_size():
    auto = AutoBackend(exact_limit=2)
    small = small_program()
    assert auto.resolve(small).name == "simplex"
    small.add_variable("extra")
    assert auto.resolve(small).name == "highs"


def test_unknown_backend_name():
    with pytest.raises(ValueError):
        get_backend("cplex")
