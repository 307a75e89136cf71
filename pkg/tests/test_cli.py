import json

import pandas as pd
import pytest

from src.infrastructure.cli.main import (
    EXIT_CERTIFICATION,
    EXIT_OK,
    EXIT_USAGE,
    main,
    parse_seeds,
)

CHAIN = "nodes 2\nlabels 0 2\nlabels 1 2\nf0 1\nunary 0 1 2\nunary 1 1 3\nedge 0 1\npair 0 1 0 1 1\npair 0 1 1 0 1\n"
SEPARABLE = (
    "nodes 3\n"
    + "".join(f"labels {s} 3\n" for s in range(3))
    + "unary 0 0 5\nunary 0 2 7\nunary 1 0 2\nunary 1 1 9\nunary 1 2 4\n"
    + "unary 2 0 3\nunary 2 1 3\nunary 2 2 1\n"
)


@pytest.fixture
def chain_file(tmp_path):
    path = tmp_path / "chain.txt"
    path.write_text(CHAIN)
    return path


def test_parse_seeds():
    assert parse_seeds("7") == [7]
    assert parse_seeds("2:5") == [2, 3, 4]
    assert parse_seeds("1,4,9") == [1, 4, 9]


def test_gen_is_byte_identical(tmp_path):
    args = ["gen", "--seed", "3", "--grid", "3x3", "--labels", "3"]
    assert main(args + ["-o", str(tmp_path / "a.txt")]) == EXIT_OK
    assert main(args + ["-o", str(tmp_path / "b.txt")]) == EXIT_OK
    assert (tmp_path / "a.txt").read_bytes() == (tmp_path / "b.txt").read_bytes()


def test_gen_three_seeds_three_files(tmp_path):
    assert main(["gen", "--seed", "0:3", "--grid", "2x2", "-o", str(tmp_path / "out")]) == EXIT_OK
    files = sorted((tmp_path / "out").iterdir())
    assert [f.name for f in files] == [f"potts_2x2_K3_c4_s{s}.txt" for s in range(3)]
    assert len({f.read_bytes() for f in files}) == 3


def test_gen_rejects_single_label(tmp_path):
    assert main(["gen", "--labels", "1", "-o", str(tmp_path / "a.txt")]) == EXIT_USAGE


def test_usage_errors(tmp_path, chain_file):
    assert main([]) == EXIT_USAGE
    assert main(["persist"]) == EXIT_USAGE
    assert main(["gen", "--grid", "3by3"]) == EXIT_USAGE
    assert main(["persist", "-i", str(tmp_path / "missing.txt")]) == EXIT_USAGE
    assert main(["persist", "-i", str(chain_file), "--method", "qpbo"]) == EXIT_USAGE


def test_solve_reports_exact_minimum(tmp_path, chain_file):
    out = tmp_path / "solve.json"
    assert main(["solve", "-i", str(chain_file), "--backend", "simplex", "-o", str(out)]) == EXIT_OK
    result = json.loads(out.read_text())
    assert result["lp_value"] == pytest.approx(1.0)
    assert result["labeling"] == [0, 0]
    assert result["node_marginals"][0] == pytest.approx([1.0, 0.0])
    assert result["exact"] == 1.0
    assert result["gap"] == pytest.approx(0.0, abs=1e-9)


def test_persist_l1_writes_verified_certificate(tmp_path, chain_file):
    out = tmp_path / "cert.json"
    lp = tmp_path / "verify.lp"
    code = main([
        "persist", "-i", str(chain_file), "--method", "l1", "--backend", "simplex",
        "--certify", "-o", str(out), "--dump-lp", str(lp),
    ])
    assert code == EXIT_OK
    document = json.loads(out.read_text())
    assert document["method"] == "l1"
    assert document["mode"] == "weak"
    assert document["verification"]["improving"] is True
    assert document["oracle"]["passed"] is True
    assert document["alive"] == [[0], [0]]
    assert document["completeness"] == 100.0
    assert lp.read_text().endswith("End\n")


def test_persist_dee1_on_separable(tmp_path):
    instance = tmp_path / "sep.txt"
    instance.write_text(SEPARABLE)
    out = tmp_path / "cert.json"
    assert main(["persist", "-i", str(instance), "--method", "dee1", "-o", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    assert document["n_eliminated"] == 6
    assert document["alive"] == [[1], [0], [2]]


def test_persist_several_methods_and_history(tmp_path):
    instance = tmp_path / "grid.txt"
    assert main(["gen", "--seed", "1", "--grid", "2x3", "-o", str(instance)]) == EXIT_OK
    out = tmp_path / "certs.json"
    history = tmp_path / "history.csv"
    code = main([
        "persist", "-i", str(instance), "--method", "dee1,window", "--window", "2x2", "--stride", "1",
        "--backend", "simplex", "-o", str(out), "--history", str(history),
    ])
    assert code == EXIT_OK
    documents = json.loads(out.read_text())
    assert [d["method"] for d in documents] == ["dee1", "window"]
    table = pd.read_csv(history)
    assert list(table.columns) == ["step", "window", "node", "remaining"]
    assert (table[table["step"] == 0]["remaining"] == 3).all()


def test_verify_exit_codes(tmp_path, chain_file):
    good = tmp_path / "good.txt"
    good.write_text("map 0 1 0\nmap 1 1 0\n")
    bad = tmp_path / "bad.txt"
    bad.write_text("map 0 0 1\n")
    report = tmp_path / "report.json"
    base = ["verify", "-i", str(chain_file), "--backend", "simplex"]
    assert main(base + ["--mapping", str(good), "-o", str(report)]) == EXIT_OK
    assert json.loads(report.read_text())["improving"] is True
    assert main(base + ["--mapping", str(bad)]) == EXIT_CERTIFICATION
    assert main(base + ["--mapping", str(bad), "--mode", "strict"]) == EXIT_CERTIFICATION

    broken = tmp_path / "broken.txt"
    broken.write_text("map 0 0 1\nmap 0 1 0\n")
    assert main(base + ["--mapping", str(broken)]) == EXIT_USAGE


def test_bench_rows_are_sorted_and_reproducible(tmp_path):
    args = [
        "bench", "--seed", "0:3", "--grid", "2x2", "--labels", "3",
        "--method", "l1,dee1", "--backend", "simplex",
    ]
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["-o", str(first)]) == EXIT_OK
    assert main(args + ["-o", str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()

    df = pd.read_csv(first)
    assert list(df.columns) == [
        "seed", "family", "K", "conn", "method", "mode", "completeness", "gap", "wall_ms", "certified",
    ]
    assert len(df) == 3 * 2
    assert list(zip(df["seed"], df["method"])) == [(s, m) for s in range(3) for m in ("dee1", "l1")]
    assert df["certified"].all()
    assert (df["wall_ms"] == 0).all()
