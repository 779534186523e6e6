import json

import pandas as pd
import pytest
from graphs import complete_graph, path_graph

from geosolve import oracles
from geosolve.bench import BENCH_COLUMNS, bench_budget
from geosolve.cli import EXIT_ERROR, EXIT_FALSE, EXIT_OK, RunConfig, main
from geosolve.geometry import GeometricInstance, build_intersection_graph


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


@pytest.fixture
def path_file(tmp_path):
    path = tmp_path / "path.txt"
    path_graph(5).save(path)
    return str(path)


def test_gen_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        argv = ["gen", "--n", "20", "--seed", "3", "--out", str(out)]
        assert main(argv) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    assert len(GeometricInstance.load(a)) == 20


def test_gen_empty_instance(tmp_path):
    out = tmp_path / "empty.json"
    assert main(["gen", "--n", "0", "--seed", "1", "--out", str(out)]) == 0
    assert len(GeometricInstance.load(out)) == 0


def test_gen_needs_seed(tmp_path):
    out = tmp_path / "x.json"
    assert main(["gen", "--n", "5", "--out", str(out)]) == EXIT_ERROR
    assert not out.exists()


def test_decompose_single_disk(capsys, tmp_path, single_disk):
    path = tmp_path / "disk.json"
    single_disk.save(path)
    out = tmp_path / "decomposition.json"
    code, payload = _run(
        capsys, "decompose", "--instance", str(path), "--out", str(out)
    )
    assert code == EXIT_OK
    assert payload["decomposition"]["weighted_depth"] == 1.0
    assert payload["partition"]["parts"] == [[0]]
    assert json.loads(out.read_text()) == payload


def test_kernel_keeps_small_parts(capsys, path_file):
    code, payload = _run(capsys, "kernel", "--graph", path_file)
    assert code == EXIT_OK
    assert sorted(v for p in payload["parts"] for v in p) == list(range(5))
    assert payload["h_vertices"] == 5
    assert payload["compression_ratio"] == 1.0


def test_kernel_compresses_clique(capsys, tmp_path):
    path = tmp_path / "clique.txt"
    complete_graph(6).save(path)
    out = tmp_path / "kernel.json"
    code, payload = _run(
        capsys, "kernel", "--graph", str(path), "--out", str(out)
    )
    assert code == EXIT_OK
    assert payload["parts"] == [list(range(6))]
    assert payload["delta"] == 0
    assert payload["h_vertices"] == 3
    assert json.loads(out.read_text()) == payload


def test_solve_independent_set(capsys, instance_file):
    code, payload = _run(
        capsys, "solve", "is", "--instance", str(instance_file), "--verify"
    )
    assert code == EXIT_OK
    g = build_intersection_graph(GeometricInstance.load(instance_file))
    assert payload["value"] == oracles.brute_is(g).value
    assert payload["oracle_check"]["agrees"]


def test_solve_weighted_independent_set(capsys, tmp_path, path_file):
    weights = tmp_path / "weights.json"
    weights.write_text("[1, 5, 1, 5, 1]")
    code, payload = _run(
        capsys, "solve", "wis", "--graph", path_file, "--weights", str(weights)
    )
    assert code == EXIT_OK
    assert payload["value"] == 10
    assert payload["witness"] == [1, 3]


def test_solve_steiner(capsys, tmp_path, path_file):
    terminals = tmp_path / "terminals.txt"
    terminals.write_text("0 4\n")
    common = ["--graph", path_file, "--terminals", str(terminals)]
    code, payload = _run(
        capsys, "solve", "steiner", *common, "--k", "5", "--seed", "1",
        "--witness", "--verify",
    )
    assert code == EXIT_OK
    assert payload["witness"] == [0, 1, 2, 3, 4]
    assert payload["params"]["terminals"] == [0, 4]
    assert payload["oracle_check"]["agrees"]
    code, payload = _run(
        capsys, "solve", "steiner", *common, "--k", "4", "--seed", "1"
    )
    assert code == EXIT_FALSE
    assert payload["answer"] is False


def test_randomized_solve_needs_seed(capsys, path_file):
    assert main(["solve", "cvc", "--graph", path_file, "--k", "3"]) == 1
    assert capsys.readouterr().out == ""
    assert main(["solve", "cvc", "--graph", path_file, "--seed", "1"]) == 1


def test_solve_writes_json(capsys, tmp_path, path_file):
    out = tmp_path / "result.json"
    code, payload = _run(
        capsys, "solve", "rds", "--graph", path_file, "--r", "2",
        "--json-out", str(out),
    )
    assert code == EXIT_OK
    assert payload["value"] == 1
    assert json.loads(out.read_text()) == payload


def test_oracle_commands(capsys, tmp_path):
    path = tmp_path / "path7.txt"
    path_graph(7).save(path)
    code, payload = _run(capsys, "oracle", "treedepth", "--graph", str(path))
    assert code == EXIT_OK
    assert payload["value"] == 3
    code, payload = _run(capsys, "oracle", "hamcycle", "--graph", str(path))
    assert code == EXIT_FALSE
    assert payload["value"] is False


def test_verify_solution(capsys, tmp_path, instance_file):
    solution = tmp_path / "solution.json"
    _run(
        capsys, "solve", "is", "--instance", str(instance_file),
        "--json-out", str(solution),
    )
    code, payload = _run(
        capsys, "verify", "--instance", str(instance_file),
        "--solution", str(solution),
    )
    assert code == EXIT_OK
    assert payload["valid"]
    assert payload["partition"] == [] and payload["decomposition"] == []
    data = json.loads(solution.read_text())
    data["value"] += 1
    solution.write_text(json.dumps(data))
    code, payload = _run(
        capsys, "verify", "--instance", str(instance_file),
        "--solution", str(solution),
    )
    assert code == EXIT_FALSE
    assert not payload["valid"]


def test_bench(tmp_path):
    out = tmp_path / "bench.csv"
    argv = [
        "bench", "--sizes", "20", "--solvers", "decompose", "is",
        "--density", "0.5", "--seed", "1", "--out", str(out),
    ]
    assert main(argv) == EXIT_OK
    table = pd.read_csv(out)
    assert list(table.columns) == BENCH_COLUMNS
    assert list(table["solver"]) == ["decompose", "is"]
    assert (table["n"] == 20).all()


def test_bench_cut_count_solvers(tmp_path):
    out = tmp_path / "bench.csv"
    argv = [
        "bench", "--sizes", "10", "--solvers", "steiner", "cvc", "fvs",
        "oct", "coct", "--k", "2", "--trials", "2", "--seed", "3",
        "--out", str(out),
    ]
    assert main(argv) == EXIT_OK
    table = pd.read_csv(out)
    assert list(table.columns) == BENCH_COLUMNS
    assert list(table["solver"]) == ["steiner", "cvc", "fvs", "oct", "coct"]
    assert (table["k"] == 2).all()
    fvs = table[table["solver"] == "fvs"].iloc[0]
    assert fvs["trials"] >= 1 and fvs["peak_monomials"] > 0


def test_bench_budget():
    assert bench_budget(0) == 1
    assert bench_budget(10) == 3
    assert bench_budget(16) == 4


def test_missing_input_file(tmp_path):
    missing = str(tmp_path / "missing.txt")
    assert main(["decompose", "--graph", missing]) == EXIT_ERROR


def test_run_config_validation():
    with pytest.raises(ValueError, match="needs --seed"):
        RunConfig("bench")
    with pytest.raises(ValueError, match="non-negative"):
        RunConfig("solve", problem="is", k=-1)
    with pytest.raises(ValueError, match="trials"):
        RunConfig("solve", problem="is", trials=0)
    config = RunConfig("solve", problem="steiner", seed=1, terminals=[0])
    assert config.to_dict()["terminals"] == [0]
