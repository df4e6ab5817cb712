import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.Services.config.settings import Settings
from src.Services.hilbert.hilbert_space import RandomSpec, StateVector, apply, max_deviation, random_state
from src.Services.observables.differentiation import Differentiation
from src.Services.permutation.permutator import SymmetryClass, permutator
from src.Services.scenarios.double_well import (
    AsymmetricWellError,
    barrier_ladder,
    box_levels,
    double_well_equivalence,
    localized_states,
    solve_double_well,
    wavefunction,
    well_grid,
)
from src.Services.scenarios.gaussian import (
    gaussian_family_overlaps,
    gaussian_overlap,
    gaussian_overlap_quadrature,
    gaussian_report,
)
from src.Services.scenarios.models import (
    GaussianSpec,
    ScenarioSpecError,
    WellSpec,
    load_gaussian_spec,
    load_preset,
    load_well_spec,
)
from src.Services.scenarios.spin import SPIN_DOWN, SPIN_UP, singlet, spin_differentiating

PRESET_DIR = Settings().well_preset_dir


@pytest.fixture(scope="module")
def presets():
    return {name: solve_double_well(load_preset(name, PRESET_DIR)) for name in ("none", "medium", "high")}


# -------------------------- Gaussian packets -------------------------- #

@pytest.mark.parametrize("ratio", [0, 1, 2, 4, 8])
def test_gaussian_overlap_matches_quadrature(ratio):
    spec = GaussianSpec(separation=ratio * 0.5, sigma=0.5)
    assert abs(gaussian_overlap(spec) - gaussian_overlap_quadrature(spec)) <= 1e-8


def test_gaussian_overlap_closed_form():
    assert gaussian_overlap(GaussianSpec(separation=0.0, sigma=2.0)) == 1.0
    assert gaussian_overlap(GaussianSpec(separation=4.0, sigma=1.0)) == pytest.approx(math.exp(-2.0), rel=1e-15)


@pytest.mark.parametrize("separation,verdict", [
    (2.0, Differentiation.NOT_DIFFERENTIATING),
    (12.0, Differentiation.FAPP),
    (20.0, Differentiation.EXACT),
])
def test_gaussian_verdicts(separation, verdict):
    report = gaussian_report(GaussianSpec(separation=separation, sigma=1.0))
    assert report.verdict is verdict
    assert report.agreement <= 1e-8


def test_gaussian_family_worst_pair_is_nearest_neighbour():
    spec = GaussianSpec(separation=3.0, sigma=1.0)
    family = gaussian_family_overlaps(4, spec)
    assert family.worst_overlap == pytest.approx(gaussian_overlap(spec))
    assert family.overlaps[0][3] == pytest.approx(math.exp(-81.0 / 8.0))
    with pytest.raises(ValueError):
        gaussian_family_overlaps(1, spec)


def test_gaussian_spec_validation(tmp_path):
    with pytest.raises(ValidationError):
        GaussianSpec(separation=1.0, sigma=0.0)
    with pytest.raises(ValidationError):
        GaussianSpec(separation=-1.0, sigma=1.0)

    path = tmp_path / "pair.json"
    path.write_text(json.dumps({"separation": 4, "sigma": 1}), encoding="utf-8")
    assert load_gaussian_spec(str(path)).separation == 4.0
    path.write_text(json.dumps({"separation": 4}), encoding="utf-8")
    with pytest.raises(ScenarioSpecError):
        load_gaussian_spec(str(path))


# -------------------------- Double well -------------------------- #

def test_well_spec_validation():
    base = {"grid_points": 201, "domain_half_width": 5.0, "barrier_height": 1.0, "barrier_half_width": 1.0}
    assert WellSpec(**base).is_symmetric
    with pytest.raises(ValidationError):
        WellSpec(**{**base, "grid_points": 202})
    with pytest.raises(ValidationError):
        WellSpec(**{**base, "grid_points": 201.0})
    with pytest.raises(ValidationError):
        WellSpec(**{**base, "barrier_half_width": 5.0})
    with pytest.raises(ValidationError):
        WellSpec(**{**base, "barrier_offset": 4.5})
    with pytest.raises(ValidationError):
        WellSpec(**{**base, "unknown": 1})


@pytest.mark.parametrize("grid_points", [199, 20003, "201", True])
def test_well_spec_grid_points_are_bounded_strict_ints(grid_points):
    with pytest.raises(ValidationError):
        WellSpec(grid_points=grid_points, domain_half_width=5.0, barrier_height=1.0, barrier_half_width=1.0)


def test_preset_localization_threshold():
    assert load_preset("high", PRESET_DIR).min_left_mass == 0.99
    assert load_preset("none", PRESET_DIR).min_left_mass is None
    with pytest.raises(ValidationError):
        WellSpec(grid_points=201, domain_half_width=5.0, barrier_height=1.0, barrier_half_width=1.0, min_left_mass=1.5)


def test_unknown_preset():
    with pytest.raises(ScenarioSpecError):
        load_preset("extreme", PRESET_DIR)


def test_well_grid_is_mirror_symmetric():
    x = well_grid(load_preset("medium", PRESET_DIR))
    assert np.array_equal(x, -x[::-1])
    assert x[x.size // 2] == 0.0


def test_free_box_matches_continuum(presets):
    report = presets["none"]
    spec = report.spec
    first, second = box_levels(spec, 2)
    assert report.splitting == pytest.approx(second - first, rel=1e-3)
    assert report.splitting == pytest.approx(3 * math.pi**2 / 400, rel=1e-3)
    assert report.e_even == pytest.approx(first, rel=1e-3)


def test_splitting_shrinks_with_barrier(presets):
    splittings = [presets[name].splitting for name in ("none", "medium", "high")]
    assert splittings[0] > splittings[1] > splittings[2] > 0
    assert presets["high"].splitting < 1e-3


def test_high_barrier_localizes(presets):
    report = presets["high"]
    pair = localized_states(report)
    assert pair.left_mass >= 0.99
    assert pair.right_mass >= 0.99
    assert pair.lr_overlap <= 1e-12
    assert pair.mass_closure <= 1e-10
    assert report.even_odd_overlap <= 1e-12
    assert report.residual <= 1e-8
    assert report.next_gap > 100 * report.splitting


def test_parity_and_sign_convention(presets):
    report = presets["medium"]
    center = report.phi_even.size // 2
    assert np.allclose(report.phi_even, report.phi_even[::-1], atol=0.0)
    assert np.allclose(report.phi_odd, -report.phi_odd[::-1], atol=0.0)
    assert report.phi_even.sum() > 0
    assert report.phi_odd[:center].sum() > 0


def test_wavefunction_is_normalized_on_the_grid(presets):
    report = presets["medium"]
    for which in ("even", "odd"):
        psi = wavefunction(report, which)
        assert np.sum(psi**2) * report.spacing == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        wavefunction(report, "third")


def test_asymmetric_well_needs_parity_off(tmp_path):
    spec = WellSpec(grid_points=401, domain_half_width=10.0, barrier_height=5.0,
                    barrier_half_width=1.0, barrier_offset=0.5)
    with pytest.raises(AsymmetricWellError):
        solve_double_well(spec)
    report = solve_double_well(spec, identify_parity=False)
    assert not report.parity_identified
    assert report.splitting > 0

    path = tmp_path / "well.json"
    path.write_text(spec.json(), encoding="utf-8")
    assert load_well_spec(str(path)) == spec


def test_doublet_equivalence(presets):
    doublet = double_well_equivalence(presets["high"])
    assert doublet.pass_
    assert set(doublet.reports) == {"bose", "fermi"}
    assert doublet.positions["left"] < 0 < doublet.positions["right"]
    mean = 0.5 * (presets["high"].e_even + presets["high"].e_odd)
    assert doublet.energies["left"] == pytest.approx(mean, abs=1e-12)


def test_ladder_serial_and_parallel_agree():
    specs = [load_preset(name, PRESET_DIR) for name in ("none", "medium", "high")]
    serial = barrier_ladder(specs)
    threaded = barrier_ladder(specs, parallel=True)
    assert serial.strictly_decreasing
    assert serial.splittings == threaded.splittings


def test_with_barrier_renames_spec():
    spec = load_preset("none", PRESET_DIR).with_barrier(2.5)
    assert spec.barrier_height == 2.5
    assert spec.name == "none@2.5"


# -------------------------- Spin -------------------------- #

def test_orthogonal_spins_differentiate_exactly():
    for t in range(20):
        psi = random_state(3, RandomSpec(seed=8, stream_index=2 * t))
        phi = random_state(3, RandomSpec(seed=8, stream_index=2 * t + 1))
        report = spin_differentiating(psi, phi)
        assert report.magnitude <= 1e-15
        assert report.internal_overlap == 0.0
        assert report.verdict is Differentiation.EXACT


def test_parallel_spins_do_not_help():
    psi = StateVector.basis(2, 0)
    report = spin_differentiating(psi, psi, SPIN_UP, SPIN_UP)
    assert report.magnitude == pytest.approx(1.0)
    assert report.verdict is Differentiation.NOT_DIFFERENTIATING


def test_singlet():
    state = singlet()
    assert state.symmetry is SymmetryClass.FERMION
    expected = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)
    assert max_deviation(state.vector.amplitudes, expected) <= 1e-15
    swapped = apply(permutator(2), state.vector)
    assert max_deviation(swapped, state.vector.scaled(-1)) <= 1e-15
    assert state.constituents == (SPIN_UP, SPIN_DOWN)
