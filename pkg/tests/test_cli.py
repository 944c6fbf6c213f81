"""CLI contract: subcommands, exit codes, determinism, DOT export."""
import json

import pytest

from polygame import serialize
from polygame.cli import run
from polygame.instances import triangle_game, triangle_profiles

K4_ORACLE = {
    "matroid": {
        "class": "graphic",
        "vertices": ["v1", "v2", "v3", "v4"],
        "edges": [["1", "v1", "v2"], ["2", "v2", "v3"], ["3", "v3", "v1"],
                  ["4", "v1", "v4"], ["5", "v2", "v4"], ["6", "v3", "v4"]],
    },
    "scale": 1.0,
}


@pytest.fixture()
def files(tmp_path):
    game = triangle_game()
    direct, indirect = triangle_profiles(game)
    paths = {}

    def write(name, payload):
        path = tmp_path / name
        path.write_text(serialize.dumps(payload))
        paths[name] = str(path)

    write("game.json", serialize.game_to_dict(game))
    write("direct.json", serialize.profile_to_dict(direct))
    write("indirect.json", serialize.profile_to_dict(indirect))
    bad = serialize.profile_to_dict(direct)
    bad["loads"]["1"]["e"] = 0.25
    write("infeasible.json", bad)
    write("oracle.json", K4_ORACLE)
    write("x.json", {"1": 1.0, "2": 1.0, "6": 1.0})
    write("y.json", {"3": 1.0, "4": 1.0, "5": 1.0})
    write("matroid.json", K4_ORACLE["matroid"])
    write("graph_cycle.json", {"vertices": ["a", "b", "c"],
                               "edges": [["1", "a", "b"], ["2", "b", "c"],
                                         ["3", "c", "a"]]})
    write("graph_tree.json", {"vertices": ["a", "b"],
                              "edges": [["1", "a", "b"], ["2", "a", "b"]]})
    write("uniform.json", {"matroid": {"class": "uniform", "m": 3, "k": 1}})
    paths["dir"] = tmp_path
    return paths


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out else None


class TestVerify:
    def test_equilibrium_exits_zero(self, files, capsys):
        code, payload = invoke(capsys, "verify", files["game.json"], files["direct.json"])
        assert code == 0
        assert payload["is_equilibrium"] is True
        assert payload["worst_violation"] == 0.0

    def test_non_equilibrium_exits_one(self, files, capsys, tmp_path):
        game = triangle_game()
        from polygame.game import profile_from_dists
        split = profile_from_dists(game, {"1": {("e",): 0.5, ("f", "g"): 0.5},
                                          "2": {("f",): 1.0}, "3": {("g",): 1.0}})
        path = tmp_path / "split.json"
        path.write_text(serialize.dumps(serialize.profile_to_dict(split)))
        code, payload = invoke(capsys, "verify", files["game.json"], str(path))
        assert code == 1
        assert payload["status"] == "not_equilibrium"

    def test_infeasible_exits_two_with_diagnostics(self, files, capsys):
        code, payload = invoke(capsys, "verify", files["game.json"],
                               files["infeasible.json"])
        assert code == 2
        assert payload["status"] == "infeasible"
        assert payload["problems"]

    def test_missing_file_exits_two(self, files, capsys):
        code = run(["verify", files["game.json"], "/nonexistent.json"])
        assert code == 2


class TestSolveAndProbe:
    def test_solve_triangle(self, files, capsys):
        code, payload = invoke(capsys, "solve", files["game.json"],
                               "--starts", "4", "--seed", "11")
        assert code == 0
        assert payload["count"] >= 1

    def test_probe_reports_multiplicity(self, files, capsys):
        code, payload = invoke(capsys, "probe", files["game.json"],
                               "--starts", "6", "--seed", "3")
        assert code == 0
        assert payload["count"] >= 1
        assert payload["starts"] == 6

    def test_deterministic_output(self, files, capsys):
        code1, p1 = invoke(capsys, "solve", files["game.json"], "--starts", "3",
                           "--seed", "7")
        code2, p2 = invoke(capsys, "solve", files["game.json"], "--starts", "3",
                           "--seed", "7")
        assert code1 == code2 and p1 == p2

    def test_seed_env_override(self, files, capsys, monkeypatch):
        _, by_flag = invoke(capsys, "probe", files["game.json"],
                            "--starts", "3", "--seed", "99")
        monkeypatch.setenv("POLYGAME_SEED", "99")
        _, by_env = invoke(capsys, "probe", files["game.json"],
                           "--starts", "3", "--seed", "5")
        assert by_env["seed"] == 99
        assert by_flag == by_env

    def test_jobs_flag(self, files, capsys):
        code, payload = invoke(capsys, "probe", files["game.json"],
                               "--starts", "4", "--seed", "3", "--jobs", "2")
        assert code == 0


class TestMatroidCheck:
    def test_k4_not_base_orderable(self, files, capsys):
        code, payload = invoke(capsys, "matroid", "check", files["matroid.json"])
        assert code == 1
        assert payload["axioms"] == {"normalized": True, "unit_increase": True,
                                     "cardinality_bound": True, "submodular": True}
        assert payload["base_orderable"] is False
        assert payload["witness_pair"]

    def test_uniform_ok(self, files, capsys, tmp_path):
        path = tmp_path / "u.json"
        path.write_text(json.dumps({"class": "uniform", "m": 4, "k": 2}))
        code, payload = invoke(capsys, "matroid", "check", str(path))
        assert code == 0 and payload["base_orderable"] is True


class TestExchange:
    def test_conflict_verdict_and_dot(self, files, capsys):
        dot_path = files["dir"] / "graphs.dot"
        code, payload = invoke(capsys, "exchange", files["oracle.json"],
                               files["x.json"], files["y.json"],
                               "--dot", str(dot_path))
        assert code == 1
        assert payload["status"] == "conflicting"
        assert set(payload["conflict"]["trapped_supply"]) == {"1", "6"}
        text = dot_path.read_text()
        assert "digraph" in text and "->" in text

    def test_directed_only(self, files, capsys):
        code, payload = invoke(capsys, "exchange", files["oracle.json"], files["x.json"])
        assert code == 0
        assert payload["directed_graph"]["kind"] == "directed"

    def test_not_in_polytope_exits_two(self, files, capsys, tmp_path):
        path = tmp_path / "badx.json"
        path.write_text(json.dumps({"1": 0.5}))
        code = run(["exchange", files["oracle.json"], str(path)])
        assert code == 2


class TestReproduce:
    @pytest.mark.parametrize("target", ["triangle", "k4", "cycle:3", "cycle:4",
                                        "queueing"])
    def test_targets_self_check(self, target, capsys):
        code, payload = invoke(capsys, "reproduce", target)
        assert code == 0
        assert payload["status"] == "ok"
        assert all(payload["self_check"].values())

    def test_unknown_target(self, capsys):
        assert run(["reproduce", "nonsense"]) == 2

    def test_out_file(self, files, capsys):
        out = files["dir"] / "triangle.json"
        code, payload = invoke(capsys, "reproduce", "triangle", "--out", str(out))
        assert code == 0
        assert json.loads(out.read_text()) == payload


class TestProperty:
    def test_bidir_clean(self, files, capsys):
        code, payload = invoke(capsys, "property", "bidir", files["uniform.json"],
                               "--samples", "50")
        assert code == 0 and payload["clean"] is True

    def test_bidir_conflict(self, files, capsys):
        code, payload = invoke(capsys, "property", "bidir", files["oracle.json"],
                               "--samples", "20")
        assert code == 1 and payload["clean"] is False

    def test_graph_verdicts(self, files, capsys):
        code, payload = invoke(capsys, "property", "graph", files["graph_cycle.json"])
        assert code == 1 and payload["uniqueness_property"] is False
        code, payload = invoke(capsys, "property", "graph", files["graph_tree.json"])
        assert code == 0 and payload["uniqueness_property"] is True
