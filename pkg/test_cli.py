import json

import click
import pytest

import verify_acceptance
from src.Services.cli.commands import handle_errors
from src.Services.cli.models import (
    RESULT_MODELS,
    ReportEnvelope,
    check_le,
    exact_count,
    jsonable,
    published_schema,
)
from src.Services.config.settings import Settings
from src.Services.counting import microstates
from src.Services.hilbert.hilbert_space import FormalismError

ENVELOPE_KEYS = {"command", "params", "results", "checks", "pass", "schema_version"}


def assert_envelope(report, command, passed=True):
    assert set(report) == ENVELOPE_KEYS
    assert report["command"] == command
    assert report["pass"] is passed
    assert report["pass"] == all(c["pass"] for c in report["checks"])


# -------------------------- axioms -------------------------- #

@pytest.mark.parametrize("dim", [2, 4, 6])
def test_axioms(invoke, dim):
    code, report, _ = invoke("axioms", "--dim", dim, "--trials", 10, "--seed", 7)
    assert code == 0
    assert_envelope(report, "axioms")
    results = report["results"]
    assert results["symmetric_dimension"] == dim * (dim + 1) // 2
    assert results["antisymmetric_dimension"] == dim * (dim - 1) // 2
    assert results["max_residual"] <= 1e-12


def test_axioms_rejects_dimension_one(invoke):
    code, report, _ = invoke("axioms", "--dim", 1)
    assert code == 2
    assert report is None


# -------------------------- equivalence / fapp -------------------------- #

@pytest.mark.parametrize("stats", ["bose", "fermi"])
def test_equivalence(invoke, stats):
    code, report, _ = invoke("equivalence", "--dim", 3, "--trials", 50, "--seed", 1, "--stats", stats)
    assert code == 0
    assert_envelope(report, "equivalence")
    assert report["results"]["statistics"] == stats
    assert report["results"]["max_relative_deviation"] <= 1e-10
    assert report["results"]["worst"]["lambda"] in (1, -1)


def test_equivalence_is_deterministic(invoke):
    first = invoke("equivalence", "--dim", 3, "--trials", 20, "--seed", 11)
    second = invoke("equivalence", "--dim", 3, "--trials", 20, "--seed", 11)
    assert first[1] == second[1]


def test_seed_defaults_to_environment(invoke, monkeypatch):
    monkeypatch.setenv("IDLAB_SEED", "11")
    _, from_env, _ = invoke("equivalence", "--dim", 3, "--trials", 5)
    monkeypatch.delenv("IDLAB_SEED")
    _, explicit, _ = invoke("equivalence", "--dim", 3, "--trials", 5, "--seed", 11)
    assert from_env == explicit
    assert from_env["params"]["seed"] == 11


def test_invalid_environment_is_a_usage_error(invoke, monkeypatch):
    monkeypatch.setenv("IDLAB_FAPP_THRESHOLD", "2")
    code, _, _ = invoke("axioms")
    assert code == 2


def test_fapp_slope(invoke):
    code, report, _ = invoke("fapp", "--dim", 3, "--overlaps", "1e-1,1e-2,1e-3,1e-4", "--trials", 20, "--seed", 3)
    assert code == 0
    assert_envelope(report, "fapp")
    assert 1.9 <= report["results"]["slope"] <= 2.1


def test_fapp_fails_check_at_large_overlaps(invoke):
    code, report, _ = invoke("fapp", "--dim", 3, "--overlaps", "0.5,0.45,0.4", "--trials", 20, "--seed", 3)
    assert code == 1
    assert_envelope(report, "fapp", passed=False)


def test_fapp_needs_three_overlaps(invoke):
    code, _, _ = invoke("fapp", "--overlaps", "1e-1,1e-2")
    assert code == 2


def test_fapp_rejects_overlap_above_half(invoke):
    code, _, _ = invoke("fapp", "--overlaps", "0.9,1e-1,1e-2", "--trials", 2)
    assert code == 2


# -------------------------- count / entropy -------------------------- #

def test_count_hydrogen_demo(invoke):
    code, report, _ = invoke("count", "--demo", "hydrogen")
    assert code == 0
    assert_envelope(report, "count")
    results = report["results"]
    assert (results["W_dist"], results["W_ident"]) == (4, 2)
    assert results["energy"] == "-5/4"
    assert results["gibbs_holds"] is True


def test_count_hydrogen_equal_internal_states(invoke):
    code, report, _ = invoke("count", "--demo", "hydrogen", "--n", 2, "--m", 2)
    assert code == 0
    assert (report["results"]["W_dist"], report["results"]["W_ident"]) == (2, 1)


def test_count_levels_file_from_config_dir(invoke):
    code, report, _ = invoke("count", "--levels", "three.json", "--particles", 3, "--energy", 6)
    assert code == 0
    results = report["results"]
    assert (results["W_dist"], results["W_bose"], results["W_fermi"]) == (7, 2, 1)
    assert results["W_dist_brute_force"] == 7
    assert results["gibbs_holds"] is False
    assert results["gibbs_witness"] == {"e2": 3}


def test_count_rational_levels(invoke):
    code, report, _ = invoke("count", "--levels", "rational.json", "--particles", 2, "--energy", "5/6")
    assert code == 0
    assert report["results"]["W_dist"] == 2
    assert report["results"]["energy"] == "5/6"


def test_count_input_errors(invoke, level_file):
    assert invoke("count", "--levels", "three.json", "--particles", 9, "--energy", 6)[0] == 2
    assert invoke("count", "--levels", "three.json")[0] == 2
    assert invoke("count")[0] == 2
    assert invoke("count", "--levels", level_file({"energies": [0.5]}), "--particles", 1, "--energy", 1)[0] == 2
    assert invoke("count", "--levels", "missing.json", "--particles", 1, "--energy", 1)[0] == 2


def test_count_overflow_exits_one(invoke, monkeypatch):
    monkeypatch.setattr(microstates, "INT64_MAX", 5)
    code, report, result = invoke("count", "--levels", "three.json", "--particles", 3, "--energy", 6)
    assert code == 1
    assert report is None
    assert "exceeds the signed 64-bit range" in result.stderr


def test_entropy_hydrogen(invoke):
    code, report, _ = invoke("entropy", "--demo", "hydrogen")
    assert code == 0
    results = report["results"]
    assert results["multiplicity_free"] is True
    assert results["corrected"] == pytest.approx(results["ln_W_ident"], abs=1e-12)


def test_entropy_extensivity(invoke):
    code, report, _ = invoke("entropy", "--levels", "three.json", "--particles", 3, "--energy", 6, "--extensivity")
    assert code == 0
    ext = report["results"]["extensivity"]
    assert ext["combined_W_dist"] == 980
    assert ext["identical_gap"] == pytest.approx(0.0, abs=1e-12)
    assert ext["corrected_gap"] == pytest.approx(0.0, abs=1e-12)
    assert ext["distinguishable_gap"] == pytest.approx(ext["partition_term"])


def test_entropy_extensivity_needs_levels_file(invoke):
    code, _, _ = invoke("entropy", "--demo", "hydrogen", "--extensivity")
    assert code == 2


# -------------------------- gaussian / doublewell -------------------------- #

def test_gaussian(invoke):
    code, report, _ = invoke("gaussian", "--sep", 4, "--width", 1, "--count", 3)
    assert code == 0
    results = report["results"]
    assert results["verdict"] == "NotDifferentiating"
    assert results["agreement"] <= 1e-8
    assert results["family"]["count"] == 3


def test_gaussian_threshold_from_environment(invoke, monkeypatch):
    monkeypatch.setenv("IDLAB_FAPP_THRESHOLD", "0.2")
    _, report, _ = invoke("gaussian", "--sep", 4, "--width", 1)
    assert report["results"]["verdict"] == "FAPP"
    assert report["params"]["threshold"] == 0.2


def test_gaussian_needs_geometry(invoke):
    assert invoke("gaussian", "--sep", 4)[0] == 2
    assert invoke("gaussian", "--sep", 4, "--width", 0)[0] == 2


def test_doublewell_high_barrier(invoke):
    code, report, _ = invoke("doublewell", "--preset", "high")
    assert code == 0
    assert_envelope(report, "doublewell")
    well = report["results"]["wells"][0]
    assert well["left_mass"] >= 0.99
    assert well["equivalence"]["fermi"]["deviation"] <= 1e-10
    checks = {c["name"]: c for c in report["checks"]}
    assert checks["high:left_mass"]["threshold"] == 0.99
    assert checks["high:left_mass"]["comparison"] == ">="


def test_doublewell_min_left_mass_flag_overrides_preset(invoke):
    code, report, _ = invoke("doublewell", "--preset", "high", "--min-left-mass", "1.0")
    assert code == 1
    assert_envelope(report, "doublewell", passed=False)
    checks = {c["name"]: c for c in report["checks"]}
    assert checks["high:left_mass"]["threshold"] == 1.0
    assert not checks["high:left_mass"]["pass"]


def test_doublewell_free_box(invoke):
    code, report, _ = invoke("doublewell", "--preset", "none")
    assert code == 0
    assert "none:box_splitting_error" in {c["name"] for c in report["checks"]}


def test_doublewell_localization_check_can_fail(invoke):
    code, report, _ = invoke("doublewell", "--preset", "none", "--min-left-mass", "0.99")
    assert code == 1
    assert_envelope(report, "doublewell", passed=False)


def test_doublewell_sweep(invoke):
    code, report, _ = invoke("doublewell", "--sweep")
    assert code == 0
    results = report["results"]
    assert results["strictly_decreasing"] is True
    assert len(results["splittings"]) == 3


def test_doublewell_needs_exactly_one_source(invoke):
    assert invoke("doublewell")[0] == 2
    assert invoke("doublewell", "--preset", "high", "--sweep")[0] == 2


def test_doublewell_asymmetric_config(invoke, tmp_path):
    path = tmp_path / "tilted.json"
    path.write_text(json.dumps({
        "name": "tilted", "grid_points": 401, "domain_half_width": 10.0,
        "barrier_height": 5.0, "barrier_half_width": 1.0, "barrier_offset": 0.5,
    }), encoding="utf-8")
    assert invoke("doublewell", "--config", str(path))[0] == 2
    code, report, _ = invoke("doublewell", "--config", str(path), "--no-parity")
    assert code == 0
    assert report["results"]["wells"][0]["equivalence"] is None


# -------------------------- report models -------------------------- #

def test_schema_lists_every_command(invoke):
    code, _, result = invoke("schema")
    assert code == 0
    schema = json.loads(result.stdout)
    assert set(schema["results"]) == {"axioms", "equivalence", "fapp", "count", "gaussian", "doublewell", "entropy"}
    assert schema == json.loads(json.dumps(published_schema()))


REPORT_RUNS = [
    ("axioms", ("--dim", 2, "--trials", 3, "--seed", 1)),
    ("equivalence", ("--dim", 3, "--trials", 10, "--seed", 1, "--stats", "fermi")),
    ("fapp", ("--dim", 3, "--trials", 20, "--seed", 3)),
    ("count", ("--demo", "hydrogen")),
    ("gaussian", ("--sep", 4, "--width", 1, "--count", 3)),
    ("doublewell", ("--preset", "high")),
    ("entropy", ("--levels", "three.json", "--particles", 3, "--energy", 6, "--extensivity")),
]


@pytest.mark.parametrize("command,args", REPORT_RUNS, ids=[run[0] for run in REPORT_RUNS])
def test_reports_validate_against_published_models(invoke, command, args):
    code, report, _ = invoke(command, *args)
    assert code == 0
    envelope = ReportEnvelope.parse_obj(report)
    assert envelope.command == command
    assert envelope.pass_ is report["pass"]
    results = RESULT_MODELS[command].parse_obj(report["results"])
    assert results.dict(by_alias=True).keys() == report["results"].keys()


def test_floats_render_as_shortest_round_trip():
    envelope = ReportEnvelope(command="x", params={"v": 0.1 + 0.2}, results={"w": 1 / 3, "tiny": 5e-324}, checks=[], pass_=True)
    rendered = envelope.render()
    parsed = json.loads(rendered)
    assert parsed["params"]["v"] == 0.1 + 0.2
    assert parsed["results"]["w"] == 1 / 3
    assert parsed["results"]["tiny"] == 5e-324
    assert "0.30000000000000004" in rendered
    assert "17 significant digits" in published_schema()["float_format"]


def test_error_mapping_keeps_internal_errors_out_of_usage(runner):
    @click.command()
    @click.option("--kind")
    @handle_errors
    def fails(kind):
        if kind == "formalism":
            raise FormalismError("bad input")
        raise ValueError("matmul: dimension mismatch")

    usage = runner.invoke(fails, ["--kind", "formalism"])
    assert usage.exit_code == 2
    assert "bad input" in usage.stderr

    internal = runner.invoke(fails, ["--kind", "numpy"])
    assert internal.exit_code == 1
    assert isinstance(internal.exception, ValueError)
    assert not isinstance(internal.exception, click.UsageError)


def test_envelope_pass_must_match_checks():
    checks = [check_le("a", 1.0, 0.5)]
    with pytest.raises(ValueError):
        ReportEnvelope(command="x", params={}, results={}, checks=checks, pass_=True)


def test_exact_counts_above_double_precision_become_strings():
    assert exact_count(2**53) == 2**53
    assert exact_count(2**53 + 1) == str(2**53 + 1)
    assert jsonable({"n": 2**60}) == {"n": str(2**60)}


def test_settings_paths_follow_config_dir(monkeypatch, tmp_path):
    monkeypatch.setenv("IDLAB_CONFIG_DIR", str(tmp_path))
    monkeypatch.setenv("IDLAB_PARALLEL", "yes")
    settings = Settings.from_env()
    assert settings.levels_dir == str(tmp_path / "levels")
    assert settings.parallel is True


def test_acceptance_runner_passes(capsys):
    assert verify_acceptance.main() == 0
    assert "Failed: 0" in capsys.readouterr().out
