"""Shared fixtures for the idlab test suite."""
import json
import os

import pytest
from click.testing import CliRunner
from hypothesis import HealthCheck, settings

settings.register_profile("idlab", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.register_profile("ci", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "idlab"))


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    """Run every test against the built-in defaults, not the caller's IDLAB_* settings."""
    for name in ("IDLAB_FAPP_THRESHOLD", "IDLAB_SEED", "IDLAB_LOG_LEVEL", "IDLAB_CONFIG_DIR", "IDLAB_PARALLEL"):
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def invoke(runner):
    """Run an idlab subcommand; returns (exit_code, parsed report or None, result)."""
    from src.Services.cli.commands import cli

    def _invoke(*args):
        result = runner.invoke(cli, [str(a) for a in args])
        try:
            report = json.loads(result.stdout)
        except ValueError:
            report = None
        return result.exit_code, report, result

    return _invoke


@pytest.fixture
def level_file(tmp_path):
    """Write a level document to a temporary JSON file and return its path."""
    def _write(document):
        path = tmp_path / "levels.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)

    return _write
