import json
import subprocess
import sys

import pytest

from matchlab.constructions import example2, motivating_example, prop4
from matchlab.errors import SchemaError
from matchlab.io import (
    dumps_economy,
    dumps_profile,
    load_economy,
    loads_economy,
    loads_profile,
    save_economy,
)

MOTIVATING_FILE = """{
  "format_version": 1,
  "firms": ["f1", "f2", "f3"],
  "workers": ["w1", "w2", "w3"],
  "states": [
    {"id": "1", "probability": "1/2", "firm_utilities": [[3, 1, 2], [2, 3, 1], [1, 2, 3]]},
    {"id": "2", "probability": "1/2", "firm_utilities": [[3, 1, 2], [1, 3, 2], [1, 2, 3]]}
  ],
  "worker_utilities": [[2, 5, 2], [5, 2, 5], [1, 1, 1]]
}
"""


@pytest.fixture
def motivating_dir(tmp_path, cli):
    code, _, _ = cli("gen", "motivating", "--out", tmp_path / "motivating")
    assert code == 0
    return tmp_path / "motivating"


class TestFiles:
    def test_round_trip(self, tmp_path):
        for e in (motivating_example().economy, example2(4).economy, prop4(5, 2).economy):
            text = dumps_economy(e)
            back = loads_economy(text)
            assert back == e and dumps_economy(back) == text
            path = tmp_path / "e.json"
            save_economy(e, path)
            assert path.read_text() == text

    def test_profile_round_trip(self, motivating):
        e = motivating.economy
        for prof in motivating.profiles.values():
            text = dumps_profile(e, prof)
            assert loads_profile(text, e) == prof

    def test_hand_authored_matches_generator(self, motivating):
        assert loads_economy(MOTIVATING_FILE) == motivating.economy

    def test_fractions(self):
        text = MOTIVATING_FILE.replace('"probability": "1/2", "firm_utilities": [[3, 1, 2], [2',
                                    '"probability": "1/3", "firm_utilities": [["7/2", 1, 2], [2')
        text = text.replace('"1/2"', '"2/3"')
        e = loads_economy(text)
        assert str(e.belief[0]) == "1/3" and str(e.firm_utils[0][0][0]) == "7/2"
        assert '"7/2"' in dumps_economy(e) and '"1/3"' in dumps_economy(e)

    def test_duplicate_firm_in_report(self, motivating):
        bad = json.dumps({"format_version": 1, "reports": {"w1": ["f1", "f1"], "w2": [], "w3": []}})
        with pytest.raises(SchemaError, match="twice"):
            loads_profile(bad, motivating.economy)

    @pytest.mark.parametrize("reports,match", [
        ({"w1": ["f9"], "w2": [], "w3": []}, "unknown firms"),
        ({"w1": [], "w2": []}, "no report"),
        ({"w1": [], "w2": [], "w3": [], "w4": []}, "unknown workers"),
    ])
    def test_profile_names(self, motivating, reports, match):
        with pytest.raises(SchemaError, match=match):
            loads_profile(json.dumps({"format_version": 1, "reports": reports}), motivating.economy)

    @pytest.mark.parametrize("old,new,match", [
        ('"probability": "1/2", "firm_utilities": [[3, 1, 2], [1', '"probability": "1/3", "firm_utilities": [[3, 1, 2], [1', "sum to"),
        ("[2, 3, 1]", "[2, 2, 1]", "indifferent"),
        ("[2, 3, 1]", "[2, 3]", r"states\[0\]\.firm_utilities\[1\]"),
        ("[2, 3, 1]", "[2, 3.5, 1]", "integer"),
        ('"format_version": 1', '"format_version": 7', "version"),
        ('"1/2"', '"-1/2"', "positive"),
    ])
    def test_schema_errors(self, old, new, match):
        with pytest.raises(SchemaError, match=match):
            loads_economy(MOTIVATING_FILE.replace(old, new, 1))

    def test_syntax_error_line(self):
        with pytest.raises(SchemaError, match="line 4, column 13"):
            loads_economy(MOTIVATING_FILE.replace('"workers"', '"workers" "'))

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            load_economy(tmp_path / "nope.json")


class TestGen:
    def test_motivating(self, motivating_dir):
        assert (motivating_dir / "economy.json").exists()
        profiles = sorted(p.name for p in (motivating_dir / "profiles").iterdir())
        assert profiles == ["lambda1.json", "lambda2.json", "lambda3.json", "truthful.json"]
        manifest = json.loads((motivating_dir / "manifest.json").read_text())
        assert manifest["stable"]["1"] == [["f1", "w1"], ["f2", "w2"], ["f3", "w3"]]
        assert manifest["profiles"]["lambda3"]["outcome"]["1"] == [["f1", "w2"], ["f2", "w1"]]

    def test_prop4_manifest(self, tmp_path, cli):
        code, _, _ = cli("gen", "prop4", "--n", 8, "--k", 3, "--out", tmp_path)
        assert code == 0
        info = json.loads((tmp_path / "manifest.json").read_text())["info"]
        assert info["rank_improvement"] == {"k": 3, "workers": ["w4", "w5", "w6", "w7"]}

    def test_example2_constraints(self, tmp_path, cli):
        assert cli("gen", "example2", "--n", 4, "--out", tmp_path)[0] == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert len(manifest["constraints"]) == 2 and all(c["holds"] for c in manifest["constraints"])
        assert manifest["original"] == "original.json"

    def test_usage_errors(self, tmp_path, cli):
        assert cli("gen", "example2", "--n", 2, "--out", tmp_path)[0] == 2
        assert cli("gen", "prop4", "--n", 5, "--out", tmp_path)[0] == 2
        assert cli("gen", "append", "--out", tmp_path)[0] == 2
        assert cli("gen", "nonsense", "--out", tmp_path)[0] == 2

    def test_append(self, tmp_path, cli):
        orig = {
            "format_version": 1, "firms": ["a", "b"], "workers": ["x", "y"],
            "states": [{"id": "only", "probability": "1/1", "firm_utilities": [[2, 1], [1, 2]]}],
            "worker_utilities": [[2, 1], [1, 2]],
        }
        (tmp_path / "orig.json").write_text(json.dumps(orig))
        assert cli("gen", "append", "--input", tmp_path / "orig.json", "--out", tmp_path / "out")[0] == 0
        code, out, _ = cli("check", tmp_path / "out" / "economy.json", "--augmented", tmp_path / "orig.json", "--format", "json")
        assert code == 0 and json.loads(out)["augmented"]["holds"]

    def test_append_construction_failure(self, tmp_path, cli):
        orig = {
            "format_version": 1, "firms": ["a", "b"], "workers": ["x", "y"],
            "states": [{"id": "only", "probability": "1/1", "firm_utilities": [[2, 1], [1, 2]]}],
            "worker_utilities": [[1, 2], [2, 1]],
        }
        (tmp_path / "orig.json").write_text(json.dumps(orig))
        code, _, err = cli("gen", "append", "--input", tmp_path / "orig.json", "--out", tmp_path / "out")
        assert code == 3 and "construction failed" in err


class TestCheck:
    def test_spc_star_false(self, motivating_dir, cli):
        code, out, _ = cli("check", motivating_dir / "economy.json", "--spc-star", "--format", "json")
        assert code == 0
        data = json.loads(out)
        assert data == {"spc_star": {"holds": False, "reason": "SPC fails in state 1", "witness": None}}

    def test_example2_base_no_cycles(self, tmp_path, cli):
        cli("gen", "example2", "--n", 6, "--out", tmp_path)
        code, out, _ = cli("check", tmp_path / "original.json", "--cycles", "--format", "json")
        assert json.loads(out)["cycles"]["1"]["found"] is False

    def test_prop4_unique_stable(self, tmp_path, cli):
        cli("gen", "prop4", "--n", 8, "--k", 3, "--out", tmp_path)
        code, out, _ = cli("check", tmp_path / "economy.json", "--unique-stable", "--format", "json")
        assert json.loads(out)["unique_stable"] == {"1": True, "2": True}

    def test_all_checks_text(self, motivating_dir, cli):
        code, out, _ = cli("check", motivating_dir / "economy.json")
        assert code == 0
        for key in ("spc state 1: no", "spc*: no", "cycles state 1: (f1, w1, f2, w2)", "assortative firms", "unique stable"):
            assert key in out

    def test_assortative_witness(self, tmp_path, cli):
        cli("gen", "prop4", "--n", 5, "--k", 2, "--out", tmp_path)
        code, out, _ = cli("check", tmp_path / "original.json", "--assortative", "firms", "--spc", "--format", "json")
        data = json.loads(out)
        assert data["assortative"]["firms"] == {"1": True}
        assert data["spc"]["1"]["ordering"][0] == ["f1", "w1"]

    def test_bad_file(self, tmp_path, cli):
        (tmp_path / "bad.json").write_text("{")
        code, _, err = cli("check", tmp_path / "bad.json")
        assert code == 2 and "line 1" in err


class TestPlay:
    @pytest.mark.parametrize("label,state1", [
        ("truthful", [["f1", "w1"], ["f2", "w2"], ["f3", "w3"]]),
        ("lambda1", [["f1", "w2"], ["f2", "w1"], ["f3", "w3"]]),
    ])
    def test_profile_matchings(self, motivating_dir, cli, label, state1):
        code, out, _ = cli("play", motivating_dir / "economy.json", "--profile", motivating_dir / "profiles" / f"{label}.json", "--format", "json")
        data = json.loads(out)
        assert code == 0 and data["states"]["1"]["matching"] == state1

    def test_worker_proposing_same(self, motivating_dir, cli):
        args = ["play", motivating_dir / "economy.json", "--profile", motivating_dir / "profiles" / "truthful.json", "--format", "json"]
        assert cli(*args)[1] == cli(*args, "--proposing", "workers")[1]

    def test_state_filter_and_eu(self, motivating_dir, cli):
        code, out, _ = cli("play", motivating_dir / "economy.json", "--profile", motivating_dir / "profiles" / "lambda3.json", "--state", "1", "--format", "json")
        data = json.loads(out)
        assert list(data["states"]) == ["1"]
        assert data["states"]["1"]["true_ranks"]["w3"] is None
        assert data["worker_eu"] == {"w1": 3, "w2": 5, "w3": "5/2"}

    def test_unknown_state(self, motivating_dir, cli):
        code, _, _ = cli("play", motivating_dir / "economy.json", "--profile", motivating_dir / "profiles" / "lambda3.json", "--state", "9")
        assert code == 2


class TestBne:
    def test_verify_lambda1(self, motivating_dir, cli):
        for cls in ("full", "truncation"):
            code, out, _ = cli("bne", "verify", motivating_dir / "economy.json", "--profile", motivating_dir / "profiles" / "lambda1.json", "--class", cls, "--format", "json")
            assert code == 0 and json.loads(out)["is_bne"] is True

    def test_enumerate(self, motivating_dir, cli):
        code, out, _ = cli("bne", "enumerate", motivating_dir / "economy.json", "--class", "full", "--undominated-only", "--format", "json")
        data = json.loads(out)
        assert code == 0 and len(data["groups"]) == 4
        assert data["groups"][0]["is_stable_map"]

    def test_budget_exit(self, motivating_dir, cli, monkeypatch):
        assert cli("bne", "enumerate", motivating_dir / "economy.json", "--class", "full", "--budget", 10)[0] == 4
        monkeypatch.setenv("MATCHLAB_BUDGET", "10")
        assert cli("bne", "enumerate", motivating_dir / "economy.json", "--class", "full")[0] == 4

    def test_verify_needs_profile(self, motivating_dir, cli):
        assert cli("bne", "verify", motivating_dir / "economy.json", "--class", "full")[0] == 2

    def test_witness(self, motivating_dir, cli):
        bad = {"format_version": 1, "reports": {"w1": ["f3"], "w2": ["f1", "f2", "f3"], "w3": ["f2", "f1", "f3"]}}
        (motivating_dir / "bad.json").write_text(json.dumps(bad))
        code, out, _ = cli("bne", "verify", motivating_dir / "economy.json", "--profile", motivating_dir / "bad.json", "--class", "full", "--format", "json")
        data = json.loads(out)
        assert code == 0 and data["is_bne"] is False
        assert data["witness"]["worker"] == "w1" and data["witness"]["report"][0] == "f2"

    def test_worker_class_override(self, tmp_path, cli):
        cli("gen", "prop4", "--n", 5, "--k", 2, "--out", tmp_path)
        args = ["bne", "verify", tmp_path / "economy.json", "--profile", tmp_path / "profiles" / "candidate.json", "--class", "dropping"]
        for name in ("W1", "w5", "w4"):
            args += ["--worker-class", f"{name}=full"]
        code, out, _ = cli(*args)
        assert code == 0 and "BNE: yes" in out
        assert cli(*args, "--worker-class", "zz=full")[0] == 2


class TestStats:
    def test_truthful_vs_lambda3(self, motivating_dir, cli):
        p = motivating_dir / "profiles"
        code, out, _ = cli("stats", motivating_dir / "economy.json", "--base", p / "truthful.json", "--alt", p / "lambda3.json", "--format", "json")
        data = json.loads(out)
        assert data["matched_set_diff"]["1"] == {"only_alt": [], "only_base": ["f3", "w3"]}
        assert data["matched_set_diff"]["2"] == {"only_alt": [], "only_base": []}

    def test_identical_zero(self, motivating_dir, cli):
        p = motivating_dir / "profiles" / "lambda2.json"
        data = json.loads(cli("stats", motivating_dir / "economy.json", "--base", p, "--alt", p, "--format", "json")[1])
        assert set(data["rank_difference"]["average"].values()) == {0}
        assert set(data["preference"].values()) == {"indifferent"}

    def test_example2_n10(self, tmp_path, cli):
        cli("gen", "example2", "--n", 10, "--out", tmp_path)
        p = tmp_path / "profiles"
        workers = ",".join(f"w{i}" for i in range(1, 11))
        data = json.loads(cli("stats", tmp_path / "economy.json", "--base", p / "truthful.json", "--alt", p / "candidate.json", "--workers", workers, "--format", "json")[1])
        assert data["rank_difference"]["average"]["1"] == "9/2"

    def test_prop4_among_original_firms(self, tmp_path, cli):
        cli("gen", "prop4", "--n", 8, "--k", 3, "--out", tmp_path)
        p = tmp_path / "profiles"
        firms = ",".join(f"f{i}" for i in range(1, 9))
        data = json.loads(cli("stats", tmp_path / "economy.json", "--base", p / "truthful.json", "--alt", p / "candidate.json",
                              "--workers", "w4,w5,w6,w7", "--firms", firms, "--format", "json")[1])
        assert data["rank_difference"]["average"] == {"1": 3, "2": 3}

    def test_unknown_worker(self, motivating_dir, cli):
        p = motivating_dir / "profiles" / "lambda2.json"
        assert cli("stats", motivating_dir / "economy.json", "--base", p, "--alt", p, "--workers", "w9")[0] == 2


def test_json_output_deterministic(motivating_dir, cli):
    args = ["bne", "enumerate", motivating_dir / "economy.json", "--class", "dropping", "--format", "json"]
    first = cli(*args)[1]
    assert cli(*args, "--jobs", 2)[1] == first == cli(*args)[1]


def test_module_entry_point(motivating_dir):
    res = subprocess.run(
        [sys.executable, "-m", "matchlab", "play", str(motivating_dir / "economy.json"), "--profile", str(motivating_dir / "profiles" / "lambda1.json")],
        capture_output=True, text=True,
    )
    assert res.returncode == 0 and "state 1: {(f1,w2), (f2,w1), (f3,w3)}" in res.stdout
