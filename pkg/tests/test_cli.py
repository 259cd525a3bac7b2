import json
import os
from fractions import Fraction

import pytest

from faithlab import config
from faithlab.main import EXIT_INPUT, EXIT_MODEL, EXIT_OK, EXIT_SIZE, run


def write_json(path, data):
    path.write_text(json.dumps(data))
    return str(path)


def run_json(capsys, argv):
    assert run(argv) == EXIT_OK
    return json.loads(capsys.readouterr().out)


NOISY_COPY = {
    "vertices": ["A", "B"],
    "cpts": {
        "A": {"parents": [], "table": [["1/2", "1/2"]]},
        "B": {"parents": ["A"], "table": [["3/4", "1/4"], ["1/4", "3/4"]]},
    },
}


class TestUsage:
    def test_no_arguments_prints_help(self, capsys):
        assert run([]) == EXIT_INPUT
        assert "usage: faithlab" in capsys.readouterr().out

    def test_unknown_command(self, capsys):
        assert run(["frobnicate"]) == EXIT_INPUT
        assert "error" in capsys.readouterr().err

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as e:
            run(["--version"])
        assert e.value.code == 0
        assert "Faithlab version" in capsys.readouterr().out

    def test_list(self, capsys):
        assert run(["list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "Graphs:" in out
        assert "cancelling" in out


class TestDsep:
    def test_chain_blocked(self, capsys):
        assert run(["dsep", "chain", "--a", "A", "--b", "C", "--c", "B"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "separated"

    def test_collider_opened(self, capsys):
        assert run(["dsep", "collider", "--a", "A", "--b", "B", "--c", "C"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "connected"

    def test_sets(self, capsys):
        assert run(["dsep", "chain", "--a", "A", "--b", "B,C"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "connected"

    def test_admg_file(self, tmp_path, capsys):
        source = write_json(tmp_path / "g.json", {"vertices": ["A", "B", "C"], "bidirected": [["A", "B"], ["B", "C"]]})
        assert run(["dsep", source, "--a", "A", "--b", "C"]) == EXIT_OK
        assert capsys.readouterr().out.strip() == "separated"

    def test_unknown_vertex(self, capsys):
        assert run(["dsep", "chain", "--a", "A", "--b", "Z"]) == EXIT_INPUT
        assert "Unknown vertex" in capsys.readouterr().err

    def test_cycle_is_a_model_error(self, tmp_path, capsys):
        source = write_json(tmp_path / "g.json", {"vertices": ["A", "B"], "edges": [["A", "B"], ["B", "A"]]})
        assert run(["dsep", source, "--a", "A", "--b", "B"]) == EXIT_MODEL
        assert "cycle" in capsys.readouterr().err


class TestProject:
    def test_latent_confounded(self, capsys):
        data = run_json(capsys, ["project", "latent-confounded"])
        assert data == {
            "vertices": ["A", "B", "C"],
            "edges": [["A", "B"], ["B", "C"]],
            "bidirected": [["A", "B"], ["A", "C"], ["B", "C"]],
        }

    def test_explicit_latent(self, capsys):
        data = run_json(capsys, ["project", "fork", "--latent", "B"])
        assert data == {"vertices": ["A", "C"], "edges": [], "bidirected": [["A", "C"]]}


class TestCheckFaithful:
    def test_cancelling(self, capsys):
        data = run_json(capsys, ["check-faithful", "cancelling"])
        assert data["family"] == "gaussian"
        assert data["is_faithful"] is False
        assert data["unfaithful_statements"] == [
            {"a": "A", "b": "C", "c": [], "separated": False, "defect": "0"}
        ]

    def test_model_file(self, tmp_path, capsys):
        source = write_json(tmp_path / "m.json", NOISY_COPY)
        data = run_json(capsys, ["check-faithful", source])
        assert data["is_faithful"] is True
        assert data["min_connected_defect"] == "1/8"

    def test_csv(self, capsys):
        assert run(["check-faithful", "deterministic-variable", "--format", "csv"]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "section,key,value"
        assert "is_faithful,,false" in lines

    def test_bad_row_is_a_model_error(self, tmp_path, capsys):
        data = json.loads(json.dumps(NOISY_COPY))
        data["cpts"]["B"]["table"][1] = ["1/4", "1/4"]
        assert run(["check-faithful", write_json(tmp_path / "m.json", data)]) == EXIT_MODEL
        assert "sums to 1/2" in capsys.readouterr().err

    def test_decimal_is_an_input_error(self, tmp_path, capsys):
        data = json.loads(json.dumps(NOISY_COPY))
        data["cpts"]["A"]["table"] = [["0.5", "0.5"]]
        assert run(["check-faithful", write_json(tmp_path / "m.json", data)]) == EXIT_INPUT

    def test_size_limit(self, monkeypatch, capsys):
        monkeypatch.setenv(config.MAX_VERTICES_ENV, "3")
        assert run(["check-faithful", "deterministic-relation"]) == EXIT_SIZE
        assert "limit 3" in capsys.readouterr().err


class TestInterpolate:
    def test_midpoint_of_opposite_copies(self, capsys):
        data = run_json(
            capsys,
            ["interpolate", "opposite-copy-0", "opposite-copy-1", "-l", "1/2", "--a", "X", "--b", "Y"],
        )
        assert data["lambda"] == "1/2"
        assert data["tv_to_start"] == "1/2"
        assert data["defect"] == "0"
        assert data["lambda_star"] is None
        assert data["model"]["cpts"]["Y"]["table"] == [["1/2", "1/2"], ["1/2", "1/2"]]
        assert {"cell": {"X": 0, "Y": 0}, "q": ["1/4", "-1/2"]} in data["polynomials"]

    def test_common_cause_stays_markov(self, capsys):
        data = run_json(capsys, ["interpolate", "common-cause-0", "common-cause-1", "--lambda", "1/3"])
        assert data["report"]["markov_violations"] == []

    def test_decimal_lambda(self, capsys):
        assert run(["interpolate", "opposite-copy-0", "opposite-copy-1", "-l", "0.5"]) == EXIT_INPUT

    def test_lambda_out_of_range(self, capsys):
        assert run(["interpolate", "opposite-copy-0", "opposite-copy-1", "-l", "3/2"]) == EXIT_INPUT

    def test_different_graphs(self, capsys):
        assert run(["interpolate", "opposite-copy-0", "common-cause-0", "-l", "1/2"]) == EXIT_MODEL


class TestExperiment:
    def test_measure_zero_is_reproducible(self, tmp_path, capsys):
        argv = ["experiment", "measure-zero", "--graph", "chain", "-n", "5", "-s", "3"]
        first, second = tmp_path / "first.json", tmp_path / "second.json"
        assert run(argv + ["-o", str(first)]) == EXIT_OK
        assert run(argv + ["-o", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()
        data = json.loads(first.read_text())
        assert data["exact_unfaithful"] == 0
        assert data["runtime"]["draws"] == 5

    def test_measure_zero_needs_a_graph(self, capsys):
        assert run(["experiment", "measure-zero"]) == EXIT_INPUT

    def test_epsilons_must_decrease(self, capsys):
        argv = ["experiment", "measure-zero", "--graph", "chain", "-n", "2", "--epsilons", "1/1000,1/10"]
        assert run(argv) == EXIT_INPUT

    def test_graph_cardinalities_reach_the_draws(self, tmp_path, capsys):
        source = write_json(
            tmp_path / "g.json", {"vertices": ["A", "B", "C"], "edges": [["A", "B"]], "cardinalities": {"A": 3}}
        )
        data = run_json(capsys, ["experiment", "measure-zero", "--graph", source, "-n", "2", "--resolution", "64"])
        assert data["config"]["cardinalities"] == {"A": 3, "B": 2, "C": 2}

    def test_single_state_cardinality_is_a_model_error(self, tmp_path, capsys):
        source = write_json(
            tmp_path / "g.json", {"vertices": ["A", "B"], "edges": [["A", "B"]], "cardinalities": {"A": 1, "B": 4}}
        )
        assert run(["experiment", "measure-zero", "--graph", source, "-n", "2"]) == EXIT_MODEL

    @pytest.mark.parametrize(
        "argv",
        [
            ["experiment", "measure-zero", "--graph", "chain", "-n", "2"],
            ["experiment", "line-scan", "--model", "cancelling", "--grid", "4"],
        ],
        ids=["measure-zero", "line-scan"],
    )
    def test_negative_seed(self, argv, capsys):
        assert run(argv + ["-s", "-1"]) == EXIT_INPUT
        assert "non-negative" in capsys.readouterr().err

    def test_negative_seed_for_openness(self, tmp_path, capsys):
        source = write_json(tmp_path / "m.json", NOISY_COPY)
        assert run(["experiment", "openness", "--model", source, "--probes", "2", "-s", "-1"]) == EXIT_INPUT

    def test_latent(self, capsys):
        data = run_json(
            capsys,
            ["experiment", "latent", "--graph", "latent-confounded", "-n", "2", "--resolution", "64"],
        )
        assert data["markov_violations"] == 0
        assert data["projection"]["bidirected"] == [["A", "B"], ["A", "C"], ["B", "C"]]

    def test_denseness(self, capsys):
        data = run_json(
            capsys,
            ["experiment", "denseness", "--model", "cancelling", "-n", "3", "--radii", "1/10,1/100"],
        )
        assert data["config"]["family"] == "gaussian"
        assert data["radius_faithful"] == [["1/10", "1"], ["1/100", "1"]]

    def test_denseness_needs_unfaithful_start(self, tmp_path, capsys):
        source = write_json(tmp_path / "m.json", NOISY_COPY)
        assert run(["experiment", "denseness", "--model", source, "-n", "2"]) == EXIT_INPUT

    def test_openness(self, tmp_path, capsys):
        source = write_json(tmp_path / "m.json", NOISY_COPY)
        data = run_json(capsys, ["experiment", "openness", "--model", source, "--probes", "5"])
        assert data["threshold"] == "1/32"
        assert data["passing"] == 5
        assert data["vacuous"] is False

    def test_line_scan(self, capsys):
        data = run_json(capsys, ["experiment", "line-scan", "--model", "cancelling", "--grid", "10"])
        assert data["witness"] == "(A, C | {})"
        assert data["line_zeros"] == 1


class TestConfig:
    def test_set_and_remove(self, capsys):
        assert run(["config", "--resolution", "64"]) == EXIT_OK
        with open(config.CONFIG_FILE) as file:
            assert json.load(file) == {"resolution": 64}
        assert run(["config", "--resolution", "-1"]) == EXIT_OK
        with open(config.CONFIG_FILE) as file:
            assert json.load(file) == {}

    def test_list(self, capsys):
        assert run(["config"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "max-vertices: 12 (default)" in out

    def test_bad_precision(self, capsys):
        assert run(["config", "--root-precision", "0.001"]) == EXIT_INPUT

    @pytest.mark.parametrize(
        "argv",
        [["--root-precision", "0"], ["--root-precision", "0/5"], ["--max-vertices", "0"], ["--resolution", "1"], ["--retry-budget", "0"]],
        ids=["precision", "zero-numerator", "max-vertices", "resolution", "retry-budget"],
    )
    def test_out_of_range_values_are_not_stored(self, argv, capsys):
        assert run(["config", *argv]) == EXIT_INPUT
        assert not os.path.exists(config.CONFIG_FILE)

    def test_stored_bad_value_falls_back_to_default(self, monkeypatch):
        monkeypatch.setitem(config.config, "root-precision", "0")
        monkeypatch.setitem(config.config, "max-vertices", 0)
        assert config.root_precision() == Fraction(1, 2**30)
        assert config.max_vertices() == 12
