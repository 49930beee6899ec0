from fractions import Fraction as F

import pytest

import config


@pytest.fixture
def fresh_settings():
    config.get_settings.cache_clear()
    yield config.get_settings
    config.get_settings.cache_clear()


def test_epsilon_schedule():
    assert config.epsilon_schedule(4) == (F(1, 2), F(1, 4), F(1, 8), F(1, 16))
    with pytest.raises(ValueError):
        config.epsilon_schedule(3)


def test_environment_overrides(monkeypatch, tmp_path, fresh_settings):
    monkeypatch.setenv("OKLAB_SEED", "7")
    monkeypatch.setenv("OKLAB_DATA", str(tmp_path))
    monkeypatch.setenv("OKLAB_ORACLE_THRESHOLD", "9/10")
    monkeypatch.setenv("OKLAB_WORKERS", "0")
    settings = fresh_settings()
    assert settings.seed == 7
    assert settings.data_dir == tmp_path
    assert settings.oracle_threshold == F(9, 10)
    assert settings.workers == 1


def test_bad_integer(monkeypatch, fresh_settings):
    monkeypatch.setenv("OKLAB_EPSILON_STEPS", "many")
    with pytest.raises(ValueError, match="OKLAB_EPSILON_STEPS"):
        fresh_settings()
