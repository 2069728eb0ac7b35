import json
import math
import os

import pytest
from click.testing import CliRunner

from app import cli

from conftest import DATA_DIR

GAUSS = '{"center": "0", "logradius": "0"}'
SPINE_BOTTOM = '{"center": "0", "logradius": "-1/2"}'


@pytest.fixture
def run():
    runner = CliRunner()

    def invoke(*args):
        return runner.invoke(cli, list(args), catch_exceptions=False)

    return invoke


def doc(result):
    return json.loads(result.stdout)


@pytest.fixture
def certificate():
    with open(os.path.join(DATA_DIR, "sextic_certificate.json"), encoding="utf-8") as fh:
        return json.load(fh)


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestPointImage:
    def test_bottom_of_the_spine(self, run):
        result = run("point-image", '{"center": "0", "logradius": "-1/6"}')
        assert result.exit_code == 0
        out = doc(result)
        assert out["image"]["logradius"] == "1/2"
        assert out["local_degree"] == 6

    def test_gauss_point(self, run):
        out = doc(run("point-image", GAUSS))
        assert out["image"]["logradius"] == "0"
        assert out["local_degree"] == 3
        assert out["reduction"] == "(1)/(z**3 - z)"

    def test_refines_the_field(self, run):
        out = doc(run("point-image", '{"center": "0", "logradius": "1/4"}'))
        assert out["field"] == {"p": 3, "e": 12}
        assert out["image"]["logradius"] == "-1/4"
        assert out["local_degree"] == 1

    def test_point_from_a_file(self, run, tmp_path):
        path = write(tmp_path, "point.json", {"center": "0", "logradius": "0"})
        assert doc(run("point-image", path))["local_degree"] == 3

    @pytest.mark.parametrize("bad", ['{"center": "0"}', "{not json", '{"center": "x", "logradius": "0"}'])
    def test_malformed_point(self, run, bad):
        result = run("point-image", bad)
        assert result.exit_code == 2


def test_segment_image(run):
    out = doc(run("segment-image", GAUSS, SPINE_BOTTOM))
    assert [piece["expansion"] for piece in out["pieces"]] == [3, 3, 3]


class TestVerify:
    def test_bundled_certificate(self, run):
        result = run("verify")
        assert result.exit_code == 0
        out = doc(result)
        assert out["passed"] is True
        assert out["infinite_branching"] is True

    def test_text_format(self, run):
        result = run("verify", "--format", "text")
        assert result.exit_code == 0
        assert "(a) pass" in result.stdout

    def test_weak_expansion(self, run, tmp_path, certificate):
        for piece in certificate["subdivision"]:
            piece["c"] = 1
        result = run("verify", "--certificate", write(tmp_path, "cert.json", certificate))
        assert result.exit_code == 1
        assert doc(result)["failed"] == ["d"]

    def test_missing_preimage(self, run, tmp_path, certificate):
        certificate["preimages"] = certificate["preimages"][:1]
        result = run("verify", "--certificate", write(tmp_path, "cert.json", certificate))
        assert result.exit_code == 1
        assert doc(result)["failed"] == ["b"]

    def test_non_periodic_x0(self, run, tmp_path, certificate):
        certificate["interval"]["x0"] = {"center": "0", "logradius": "-1/3"}
        result = run("verify", "--certificate", write(tmp_path, "cert.json", certificate))
        assert result.exit_code == 1
        assert "a" in doc(result)["failed"]

    def test_short_covering(self, run, tmp_path, certificate):
        certificate["covering"][1]["n"] = 0
        result = run("verify", "--certificate", write(tmp_path, "cert.json", certificate))
        assert result.exit_code == 1
        assert "c" in doc(result)["failed"]

    def test_indifferent_map(self, run, tmp_path):
        config = {
            "field": {"p": 3, "e": 6},
            "map": {"num": ["0", "1", "3"], "den": ["1"]},
            "certificate": os.path.join(DATA_DIR, "sextic_certificate.json"),
        }
        result = run("--config", write(tmp_path, "config.json", config), "verify")
        assert result.exit_code == 1
        assert "a" in doc(result)["failed"]

    def test_missing_file(self, run, tmp_path):
        result = run("verify", "--certificate", str(tmp_path / "nope.json"))
        assert result.exit_code == 2


def test_branching(run):
    out = doc(run("branching", GAUSS))
    assert out["infinite_branching"] is True
    assert run("branching", SPINE_BOTTOM).exit_code == 2


def test_partition(run):
    out = doc(run("partition"))
    assert out["hypotheses"]["passed"] is True
    assert out["system"]["root"] == "U_inf1"
    assert len(out["system"]["families"]) == 2


def test_masses(run):
    out = doc(run("masses"))
    assert out["core"]["U_inf1"] == "1/2"
    assert out["core"]["U_inf2"] == "1/22"
    assert out["total_check"] == "1"


def test_masses_of_a_singular_system(run, tmp_path):
    system = {
        "d": 2,
        "states": [{"name": "A", "image": ["A"], "degree": 1}],
        "families": [{"entry": "A", "target": "A", "branch": 2}],
        "root": "A",
    }
    assert run("masses", "--system", write(tmp_path, "system.json", system)).exit_code == 2


@pytest.mark.parametrize("command", ["masses", "entropy", "shift-gf", "dendrite"])
def test_family_with_an_unknown_target(run, tmp_path, command):
    system = {
        "d": 6,
        "states": [{"name": "A", "image": ["A"], "degree": 3}],
        "families": [{"entry": "A", "target": "Nowhere", "branch": 1}],
        "root": "A",
    }
    result = run(command, "--system", write(tmp_path, "system.json", system))
    assert result.exit_code == 2
    assert "MalformedCertificate" in result.output


class TestEntropy:
    def test_exact_values(self, run):
        out = doc(run("entropy"))
        assert out["h_mu"]["exact"] == [["1", 2], ["5/11", 3]]
        assert out["h_top"]["minpoly"] == [6, -1, -4, 1]
        assert out["h_top"]["nats"] == pytest.approx(math.log(3.8557725066359887), abs=1e-9)
        checks = out["checks"]
        assert checks["total_mass"] == "1"
        assert checks["sandwich"] is True
        assert checks["state_independent"] is True
        assert checks["interval_null"]["coefficient"] == "1/4"

    def test_truncation(self, run):
        out = doc(run("entropy", "--which", "topological", "--method", "truncate", "--depth", "4"))
        assert [row["depth"] for row in out["truncation"]] == [0, 1, 2, 3, 4]
        assert "h_mu" not in out

    def test_other_state(self, run):
        out = doc(run("entropy", "--which", "topological", "--state", "U'_0"))
        assert out["h_top"]["state"] == "U'_0"
        assert out["h_top"]["minpoly"] == [6, -1, -4, 1]

    def test_countable_state(self, run):
        assert run("entropy", "--which", "topological", "--state", "V").exit_code == 2

    def test_is_deterministic(self, run):
        assert run("entropy").stdout == run("entropy").stdout


class TestDendrite:
    def test_depth_zero(self, run):
        out = doc(run("dendrite", "--depth", "0"))
        assert out["nodes"] == [{"id": 0, "label": "U_inf1", "depth": 0, "kind": "core"}]
        assert out["edges"] == []

    def test_depth_one(self, run):
        out = doc(run("dendrite", "--depth", "1"))
        assert len(out["nodes"]) == 12
        assert len(out["edges"]) == 11

    def test_dot(self, run):
        result = run("--format", "dot", "dendrite", "--depth", "1")
        assert result.stdout.startswith("digraph dendrite {")


def test_shift_gf(run):
    out = doc(run("shift-gf"))
    assert out["state"] == "U_inf1"
    assert out["numerator"] == ["0", "1", "0", "-3"]
    assert out["one_minus_numerator"] == ["1", "-4", "-1", "6"]
