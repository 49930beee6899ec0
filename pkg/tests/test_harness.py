import json

import pytest

import harness
import toric
from errors import SchemaError
from exactgeom import scale
from harness import (FAIL, GATED, PASS, CheckReport, SuiteSummary, check_birational, check_slicing,
                     check_limiting_limit, load_library, random_instances, run_suite, summary_table)


@pytest.fixture(scope="module")
def library(data_dir):
    return load_library(data_dir)


def _pair(library, pid):
    return next(p for p in library.pairs if p.id == pid)


def test_library_loads(library):
    assert {"P2", "F1", "Bl1P2", "P1xP1-surface"} <= set(library.models)
    assert len(library.instances) >= 40
    big_toric_slicing = [i for i in library.instances
                         if i.is_toric and "slicing" in i.checks and toric.classify(i.model, i.divisor).big]
    assert len(big_toric_slicing) >= 20
    assert library.instance("p2-H").is_toric
    assert not library.instance("bl1p2-HpE-E").is_toric
    with pytest.raises(KeyError):
        library.instance("missing")


def test_library_rejects_inconsistent_expectations(tmp_path, data_dir):
    (tmp_path / "models").mkdir()
    (tmp_path / "models" / "P2.json").write_text((data_dir / "models" / "P2.json").read_text())
    bad = {"instances": [{"id": "x", "model": "P2", "divisor": ["0", "0", "1"],
                          "expect": {"kappa": 2, "kappa_nu": 1}}]}
    (tmp_path / "instances.json").write_text(json.dumps(bad))
    with pytest.raises(SchemaError, match="exceeds"):
        load_library(tmp_path)


def test_failed_report_needs_witness():
    with pytest.raises(ValueError):
        CheckReport("zariski", "x", FAIL)
    assert CheckReport("zariski", "x", GATED).to_json() == {"check": "zariski", "instance": "x", "status": "gated"}


def test_random_instances_are_seeded(library):
    a = random_instances(library, seed=1)
    b = random_instances(library, seed=1)
    assert len(a) >= 200
    assert [i.divisor for i in a] == [i.divisor for i in b]
    assert [i.divisor for i in a] != [i.divisor for i in random_instances(library, seed=2)]


@pytest.mark.parametrize("iid, check", [
    ("p2-H", "dim_vol"),
    ("p2-H", "positive_part"),
    ("p1p1-f1", "dim_vol"),
    ("bl1p2-HpE-E", "zariski"),
    ("bl1p2-H-HmE", "limiting_limit"),
    ("f1-H+E", "zariski"),
    ("bl1p2-HpE-E", "criteria"),
    ("bl1p2-H-H", "simplex"),
    ("p2-H", "oracle"),
])
def test_library_checks_pass(library, iid, check):
    report = harness.CHECKS[check](library.instance(iid))
    assert report.status == PASS, report.witness


def test_slicing_gated_by_augmented_locus(library):
    with pytest.raises(harness.HypothesisUnmet):
        check_slicing(library.instance("f1-H-through-E"), 1)
    assert check_slicing(library.instance("p2-H"), 1).status == PASS


@pytest.mark.parametrize("iid", ["f2-rational", "p1p1-2f1-3f2", "p3-2H"])
def test_slicing_matches_section_counts(library, iid):
    inst = library.instance(iid)
    for k in inst.k:
        report = check_slicing(inst, k)
        assert report.status == PASS, report.witness


def test_slicing_catches_a_body_of_the_wrong_size(library, monkeypatch):
    body, face = toric.okounkov_body, toric.restricted_body
    monkeypatch.setattr(toric, "okounkov_body", lambda *a, **kw: scale(body(*a, **kw), 2))
    monkeypatch.setattr(toric, "restricted_body", lambda *a, **kw: scale(face(*a, **kw), 2))
    report = check_slicing(library.instance("p2-H"), 1)
    assert report.status == FAIL
    assert list(report.witness) == ["k! vol"]


@pytest.mark.parametrize("iid", ["p1p1-f1", "f1-H+E", "f2-rational", "blp3-2H-E"])
def test_toric_limiting_body_matches_section_polytope(library, iid):
    report = check_limiting_limit(library.instance(iid))
    assert report.status == PASS, report.witness


def test_limiting_check_catches_a_bad_extrapolation(library, monkeypatch):
    limit = toric.limiting_body
    monkeypatch.setattr(toric, "limiting_body", lambda *a, **kw: scale(limit(*a, **kw), 2))
    report = check_limiting_limit(library.instance("p1p1-f1f2"))
    assert report.status == FAIL
    assert "extrapolated != closed form" in report.witness


def test_birational_pairs(library):
    assert check_birational(_pair(library, "p2-to-f1-toric"), library).status == PASS
    with pytest.raises(harness.HypothesisUnmet):
        check_birational(_pair(library, "p2-to-bl1p2-through-point"), library)


def test_zariski_suite_over_library(library):
    reports = run_suite(library, checks=["zariski"], seed=3)
    assert reports
    assert all(r.check == "zariski" for r in reports)
    assert not [r.to_json() for r in reports if r.status == FAIL]


def test_summary_table():
    reports = [CheckReport("a", "1", PASS), CheckReport("a", "2", GATED), CheckReport("b", "1", FAIL, {"x": 1})]
    table = summary_table(reports)
    assert list(table.columns) == [PASS, FAIL, GATED]
    assert table.loc["a", PASS] == 1 and table.loc["a", GATED] == 1
    assert table.loc["b", FAIL] == 1
    assert SuiteSummary.of(reports).to_json() == {"total": 3, "pass": 1, "fail": 1, "gated": 1}
