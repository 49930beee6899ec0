# Shared fixtures: the shipped models, loaded once per session
from __future__ import annotations

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent
sys.path.insert(0, str(ROOT))

from jsonio import load_json, parse_model  # noqa: E402

DATA = ROOT / "data"


def _model(name: str):
    return parse_model(load_json(DATA / "models" / f"{name}.json"))


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA


@pytest.fixture(scope="session")
def p2():
    return _model("P2")


@pytest.fixture(scope="session")
def p1p1():
    return _model("P1xP1")


@pytest.fixture(scope="session")
def f1():
    return _model("F1")


@pytest.fixture(scope="session")
def f2():
    return _model("F2")


@pytest.fixture(scope="session")
def p3():
    return _model("P3")


@pytest.fixture(scope="session")
def blp3():
    return _model("BlP3")


@pytest.fixture(scope="session")
def bl1p2():
    return _model("Bl1P2")


@pytest.fixture(scope="session")
def p1p1_surface():
    return _model("P1xP1-surface")


@pytest.fixture(scope="session")
def f2_surface():
    return _model("F2-surface")


@pytest.fixture(scope="session")
def p2_surface():
    return _model("P2-surface")
