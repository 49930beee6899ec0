import json

import pytest

import cli
from cli import Job, main
from errors import SchemaError
from exactgeom import hull


@pytest.fixture
def write(tmp_path):
    def _write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj), encoding="utf-8")
        return str(path)
    return _write


@pytest.fixture
def models(data_dir):
    return lambda name: str(data_dir / "models" / f"{name}.json")


def test_body_of_hyperplane_with_svg(tmp_path, write, models):
    divisor = write("divisor.json", {"divisor": ["0", "0", "1"]})
    out, svg = tmp_path / "out.json", tmp_path / "body.svg"
    code = main(["--input", models("P2"), "--input", divisor, "--task", "body", "--flag", "0,1",
                 "--out", str(out), "--svg", str(svg)])
    assert code == 0
    result = json.loads(out.read_text())
    assert result["body"]["vertices"] == [["0", "0"], ["0", "1"], ["1", "0"]]
    assert result["artifacts"]["svg"] == str(svg)
    assert "<path" in svg.read_text()


def test_decompose_on_blowup(write, models, capsys):
    divisor = write("divisor.json", {"divisor": {"class": ["1", "1"]}})
    assert main(["--input", models("Bl1P2"), "--input", divisor, "--task", "decompose"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result == {"P": ["1", "0"], "N": [{"curve": "E", "coeff": "1"}], "kind": "sigma"}


def test_classify_surface(write, models, capsys):
    divisor = write("divisor.json", {"divisor": ["1", "-1"]})
    assert main(["--input", models("Bl1P2"), "--input", divisor]) == 0
    assert "classification" in json.loads(capsys.readouterr().out)


def test_float_input_exits_2(write, models):
    divisor = write("divisor.json", {"divisor": [0, 0, 0.5]})
    assert main(["--input", models("P2"), "--input", divisor, "--task", "decompose"]) == 2


def test_missing_input_exits_2():
    assert main(["--task", "body"]) == 2


def test_kind_mismatch_exits_2(write, models):
    divisor = write("divisor.json", {"divisor": ["0", "0", "1"]})
    assert main(["--input", models("P2"), "--input", divisor, "--task", "body", "--kind", "sigma"]) == 2


def test_big_body_of_fibre_class_exits_3(write, models):
    divisor = write("divisor.json", {"divisor": ["0", "0", "1", "0"]})
    assert main(["--input", models("P1xP1"), "--input", divisor, "--task", "body", "--flag", "0,1"]) == 3
    assert main(["--input", models("P1xP1"), "--input", divisor, "--task", "body", "--flag", "0,1",
                 "--kind", "lim"]) == 0


def test_refuted_sample_exits_4(write, models, monkeypatch):
    monkeypatch.setattr(cli, "sample_body", lambda *args, **kwargs: [(1, hull([(0, 0), (2, 0)]))])
    divisor = write("divisor.json", {"divisor": ["0", "0", "1"]})
    assert main(["--input", models("P2"), "--input", divisor, "--task", "sample", "--flag", "0,1"]) == 4


def test_sample_task(write, models, capsys):
    doc = write("job.json", {"divisor": ["0", "0", "1"], "sample": {"degrees": [1, 2], "samples": 4}})
    assert main(["--input", models("P2"), "--input", doc, "--task", "sample", "--flag", "0,1", "--seed", "5"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["config"]["seed"] == 5
    assert not result["report"]["refuted"]


def test_render_from_body_json(tmp_path, write):
    body = write("body.json", {"body": {"vertices": [["0", "0"], ["1/2", "0"], ["0", "1"]]}, "title": "t"})
    svg = tmp_path / "t.svg"
    assert main(["--input", body, "--task", "render", "--svg", str(svg), "--out", str(tmp_path / "r.json")]) == 0
    assert "(1/2, 0)" in svg.read_text()


def test_check_single_instance(write, models, capsys):
    doc = write("instance.json", {"id": "mine", "divisor": ["1", "1"], "flag": {"curve": "E"}, "checks": ["zariski"]})
    assert main(["--input", models("Bl1P2"), "--input", doc, "--task", "check"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["summary"]["fail"] == 0
    assert {"check": "zariski", "instance": "mine", "status": "pass"} in result["reports"]


def test_job_validation():
    with pytest.raises(SchemaError):
        Job(task="nope")
    assert Job(task="check").inputs == []
