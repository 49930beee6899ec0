import json
from fractions import Fraction as F

import pytest

from errors import SchemaError
from exactgeom import equals, hull
from jsonio import (load_documents, parse_divisor, parse_flag, parse_flag_option, parse_model,
                    parse_sample_config, parse_schedule, polytope_from_json, polytope_to_json)
from oracle import GeneralCurveFlag
from surface import SurfFlag
from toric import InvariantFlag, ToricDivisor, ToricVariety


def test_parse_model_from_shipped_file(data_dir):
    doc = load_documents([data_dir / "models" / "F1.json"])
    X = parse_model(doc)
    assert isinstance(X, ToricVariety)
    assert X.n_rays == 4


def test_documents_merge(tmp_path, data_dir):
    extra = tmp_path / "divisor.json"
    extra.write_text(json.dumps({"divisor": {"coeffs": ["0", "0", "1"]}}))
    doc = load_documents([data_dir / "models" / "P2.json", extra])
    X = parse_model(doc)
    assert parse_divisor(X, doc["divisor"]) == ToricDivisor.of(0, 0, 1)


def test_floats_are_rejected(p2):
    with pytest.raises(SchemaError, match="floats"):
        parse_divisor(p2, [0, 0, 0.5])


def test_divisor_length_checked(p2, bl1p2):
    with pytest.raises(SchemaError):
        parse_divisor(p2, ["1", "1"])
    assert parse_divisor(bl1p2, {"class": ["1", "1/2"]}) == (1, F(1, 2))


def test_unknown_model_type():
    with pytest.raises(SchemaError, match="model.type"):
        parse_model({"type": "curve"})


def test_invalid_json_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(SchemaError, match="invalid JSON"):
        load_documents([bad])


def test_parse_flags(p2, bl1p2):
    assert parse_flag(p2, [0, 1]) == InvariantFlag((0, 1))
    assert parse_flag(bl1p2, "E") == SurfFlag("E")
    assert parse_flag(p2, {"ray": 0, "point": "general", "x0": "2"}) == GeneralCurveFlag(0, F(2))
    with pytest.raises(SchemaError):
        parse_flag(p2, {"curve": "E"})
    with pytest.raises(SchemaError):
        parse_flag(bl1p2, {"curve": "E", "point": "special"})


def test_flag_option(p2, bl1p2):
    assert parse_flag_option(p2, "0,1") == InvariantFlag((0, 1))
    assert parse_flag_option(bl1p2, "H-E") == SurfFlag("H-E")
    assert parse_flag_option(p2, '{"ray": 2}') == GeneralCurveFlag(2)
    with pytest.raises(SchemaError):
        parse_flag_option(p2, "a,b")


def test_schedule():
    assert parse_schedule("1/2,1/4,1/8,1/16") == (F(1, 2), F(1, 4), F(1, 8), F(1, 16))
    with pytest.raises(SchemaError):
        parse_schedule("1/2,1/4,1/8")
    with pytest.raises(SchemaError):
        parse_schedule("1/2,1/4,1/4,1/8")


def test_sample_config_override():
    cfg = parse_sample_config({"degrees": [1, 2]}, seed=11)
    assert cfg.seed == 11 and cfg.degrees == (1, 2)
    with pytest.raises(SchemaError):
        parse_sample_config({"samples": 0})


def test_polytope_json_is_exact():
    p = hull([(0, 0), (F(1, 3), 0), (0, F(2, 3))])
    out = polytope_to_json(p)
    assert out["vertices"] == [["0", "0"], ["0", "2/3"], ["1/3", "0"]]
    assert out["dim"] == 2
    assert equals(polytope_from_json(out), p)
    assert equals(polytope_from_json({"ambient_dim": 2, "halfspaces": out["halfspaces"]}), p)
