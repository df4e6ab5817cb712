"""idlab: command-line driver for the identical-particles lab.

Every subcommand prints one JSON report envelope on standard output and exits
with 0 when all checks pass, 1 when a check fails (or a count overflows) and 2
on usage or input errors. Diagnostics go to standard error.

Usage:
    idlab axioms --dim 3 --trials 50 --seed 7
    idlab equivalence --dim 4 --trials 1000 --seed 1 --stats fermi
    idlab fapp --dim 4 --overlaps 1e-1,1e-2,1e-3,1e-4 --trials 200 --seed 3
    idlab count --demo hydrogen
    idlab count --levels three.json --particles 3 --energy 6
    idlab gaussian --sep 4 --width 1
    idlab doublewell --preset high
    idlab entropy --levels three.json --particles 3 --energy 6 --extensivity
    idlab schema
"""
from __future__ import annotations

import dataclasses
import functools
import json
import logging
import math
import os
import sys
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional

import click
from pydantic import ValidationError

from src.Services.cli.models import (
    AxiomResults,
    Check,
    CountResults,
    DoubleWellResults,
    EntropyResults,
    EquivalenceResults,
    EquivalenceSample,
    ExtensivityResults,
    FappResults,
    GaussianFamilyResults,
    GaussianResults,
    OccupationRow,
    ReportEnvelope,
    WellResults,
    check_eq,
    check_ge,
    check_le,
    exact_count,
    published_schema,
)
from src.Services.config.settings import LOG_LEVELS, Settings
from src.Services.counting.microstates import (
    MAX_ASSIGNMENTS,
    CountOverflowError,
    enumerate_assignments,
    enumerate_microstates,
    entropy_from_counts,
    extensivity_experiment,
    gibbs_check,
    hydrogen_levels,
    hydrogen_pair_energy,
    occupation_breakdown,
    one_atom_per_location,
)
from src.Services.counting.models import LevelSpec, format_exact, load_level_spec
from src.Services.hilbert.hilbert_space import (
    EXPECTATION_TOLERANCE,
    TOLERANCE,
    FormalismError,
    RandomSpec,
    draw_hermitian,
)
from src.Services.observables.differentiation import (
    equivalence_check,
    fapp_sweep,
    random_orthogonal_pair,
)
from src.Services.permutation.permutator import (
    SPECTRUM_TOLERANCE,
    SymmetryClass,
    antisymmetrizer,
    subspace_dimension,
    symmetrizer,
    verify_axioms,
)
from src.Services.scenarios.double_well import (
    RESIDUAL_TOLERANCE,
    EigenSolverError,
    WellReport,
    barrier_ladder,
    box_levels,
    double_well_equivalence,
    localized_states,
    solve_double_well,
)
from src.Services.scenarios.gaussian import QUADRATURE_AGREEMENT, gaussian_family_overlaps, gaussian_report
from src.Services.scenarios.models import PRESET_NAMES, GaussianSpec, WellSpec, load_gaussian_spec, load_preset, load_well_spec

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
EXIT_OK = 0
EXIT_CHECK_FAILED = 1
SEED = click.IntRange(0, 2**64 - 1)
STATS = click.Choice(["bose", "fermi"], case_sensitive=False)
MASS_CLOSURE_TOLERANCE = 1e-10
BOX_RELATIVE_TOLERANCE = 0.02


# -------------------------- Helper Functions -------------------------- #

def configure_logging(level: str) -> None:
    logging.basicConfig(level=getattr(logging, level), format=LOG_FORMAT, stream=sys.stderr)
    logging.getLogger().setLevel(getattr(logging, level))


def handle_errors(func: Callable) -> Callable:
    """Map library exceptions onto the 0/1/2 exit-code contract."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (CountOverflowError, EigenSolverError) as e:
            logger.error("%s: %s", type(e).__name__, e)
            click.echo(f"Error: {e}", err=True)
            click.get_current_context().exit(EXIT_CHECK_FAILED)
        except (ValidationError, FormalismError) as e:
            raise click.UsageError(str(e))
    return wrapper


def emit(command: str, params: Dict[str, Any], results, checks: List[Check]) -> None:
    envelope = ReportEnvelope.build(command, params, results, checks)
    click.echo(envelope.render())
    if not envelope.pass_:
        logger.warning("%s: %d check(s) failed", command, sum(not c.pass_ for c in checks))
    click.get_current_context().exit(EXIT_OK if envelope.pass_ else EXIT_CHECK_FAILED)


def resolve_seed(seed: Optional[int], settings: Settings) -> int:
    return settings.default_seed if seed is None else seed


def resolve_levels_path(path: str, settings: Settings) -> str:
    """A path as given, or else relative to the configured levels directory."""
    if os.path.exists(path):
        return path
    candidate = os.path.join(settings.levels_dir, path)
    return candidate if os.path.exists(candidate) else path


def parse_overlaps(ctx, param, value: str) -> List[float]:
    try:
        overlaps = [float(item) for item in value.split(",") if item.strip()]
    except ValueError:
        raise click.BadParameter(f"'{value}' is not a comma-separated list of numbers")
    if len(set(overlaps)) < 3:
        raise click.BadParameter("at least 3 distinct overlap values are required")
    return overlaps


# -------------------------- Command group -------------------------- #

@click.group()
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help="Log level for stderr diagnostics (default: IDLAB_LOG_LEVEL or WARNING)")
@click.pass_context
def cli(ctx: click.Context, log_level: Optional[str]) -> None:
    """Identical particles: permutation symmetry, differentiating states and state counting."""
    try:
        settings = Settings.from_env()
    except ValueError as e:
        raise click.UsageError(f"Invalid IDLAB_* environment: {e}")
    if log_level:
        settings = dataclasses.replace(settings, log_level=log_level.upper())
    configure_logging(settings.log_level)
    ctx.obj = settings


@cli.command()
@click.option("--dim", type=click.IntRange(2, 8), default=3, show_default=True, help="One-particle dimension d")
@click.option("--trials", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--seed", type=SEED, default=None, help="Random seed (default: IDLAB_SEED)")
@click.pass_obj
@handle_errors
def axioms(settings: Settings, dim: int, trials: int, seed: Optional[int]) -> None:
    """Permutator and projector identities on ℂ^d ⊗ ℂ^d."""
    seed = resolve_seed(seed, settings)
    report = verify_axioms(dim, trials, RandomSpec(seed=seed))
    sym_dim = subspace_dimension(symmetrizer(dim))
    anti_dim = subspace_dimension(antisymmetrizer(dim))

    results = AxiomResults(
        dim=dim,
        trials=trials,
        residuals=report.residuals,
        max_residual=report.max_residual,
        eigenvalues=report.eigenvalues,
        spectrum_residual=report.spectrum_residual,
        symmetric_dimension=sym_dim,
        antisymmetric_dimension=anti_dim,
    )
    checks = [check_le(name, value, TOLERANCE) for name, value in report.residuals.items()]
    checks.append(check_le("spectrum", report.spectrum_residual, SPECTRUM_TOLERANCE))
    checks.append(check_eq("symmetric_dimension", sym_dim, math.comb(dim + 1, 2)))
    checks.append(check_eq("antisymmetric_dimension", anti_dim, math.comb(dim, 2)))
    emit("axioms", {"dim": dim, "trials": trials, "seed": seed}, results, checks)


@cli.command()
@click.option("--dim", type=click.IntRange(2, 12), default=4, show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--seed", type=SEED, default=None, help="Random seed (default: IDLAB_SEED)")
@click.option("--stats", type=STATS, default="bose", show_default=True)
@click.pass_obj
@handle_errors
def equivalence(settings: Settings, dim: int, trials: int, seed: Optional[int], stats: str) -> None:
    """Identical particles in orthogonal states vs different particles."""
    seed = resolve_seed(seed, settings)
    cls = SymmetryClass.from_label(stats)
    other = SymmetryClass(-int(cls))
    spec = RandomSpec(seed=seed)

    worst: Optional[EquivalenceSample] = None
    worst_relative = max_deviation = max_overlap = max_gap = 0.0
    for t in range(trials):
        rng = spec.derive(t).generator()
        psi, phi = random_orthogonal_pair(dim, rng)
        a = draw_hermitian(rng, dim)
        b = draw_hermitian(rng, dim)
        report = equivalence_check(psi, phi, a, b, cls)
        mirror = equivalence_check(psi, phi, a, b, other)

        relative = report.deviation / (1.0 + abs(report.rhs))
        max_deviation = max(max_deviation, report.deviation)
        max_overlap = max(max_overlap, report.overlap)
        max_gap = max(max_gap, abs(report.lhs - mirror.lhs))
        if worst is None or relative > worst_relative:
            worst_relative = relative
            worst = EquivalenceSample(
                trial=t, lhs=report.lhs, rhs=report.rhs, deviation=report.deviation,
                overlap=report.overlap, lambda_=report.lambda_,
            )

    results = EquivalenceResults(
        dim=dim,
        trials=trials,
        statistics=cls.label,
        max_deviation=max_deviation,
        max_relative_deviation=worst_relative,
        max_overlap=max_overlap,
        max_statistics_gap=max_gap,
        worst=worst,
    )
    checks = [
        check_le("relative_deviation", worst_relative, EXPECTATION_TOLERANCE),
        check_le("statistics_agreement", max_gap, EXPECTATION_TOLERANCE),
    ]
    emit("equivalence", {"dim": dim, "trials": trials, "seed": seed, "stats": cls.label}, results, checks)


@cli.command()
@click.option("--dim", type=click.IntRange(2, 12), default=4, show_default=True)
@click.option("--overlaps", callback=parse_overlaps, default="1e-1,1e-2,1e-3,1e-4", show_default=True,
              help="Comma-separated overlap values s in (0, 0.5]")
@click.option("--trials", type=click.IntRange(min=1), default=200, show_default=True)
@click.option("--seed", type=SEED, default=None, help="Random seed (default: IDLAB_SEED)")
@click.option("--stats", type=STATS, default="bose", show_default=True)
@click.pass_obj
@handle_errors
def fapp(settings: Settings, dim: int, overlaps: List[float], trials: int, seed: Optional[int], stats: str) -> None:
    """Second-order scaling of the equivalence error with the pair overlap."""
    seed = resolve_seed(seed, settings)
    cls = SymmetryClass.from_label(stats)
    sweep = fapp_sweep(dim, overlaps, trials, RandomSpec(seed=seed), cls)

    results = FappResults(
        dim=dim,
        trials=trials,
        statistics=cls.label,
        overlaps=sweep.overlaps,
        max_deviations=sweep.max_deviations,
        slope=sweep.slope,
        intercept=sweep.intercept,
        all_within_bound=sweep.all_within_bound,
    )
    checks = [check_ge("slope_min", sweep.slope, 1.9), check_le("slope_max", sweep.slope, 2.1)]
    params = {"dim": dim, "overlaps": overlaps, "trials": trials, "seed": seed, "stats": cls.label}
    emit("fapp", params, results, checks)


def _level_problem(settings: Settings, levels_path: Optional[str], demo: Optional[str],
                   particles: Optional[int], energy: Optional[str], n: int, m: int):
    """(levels, N, E, constraint, params) for a levels file or the hydrogen demo."""
    if demo:
        if levels_path:
            raise click.UsageError("--levels and --demo are mutually exclusive")
        levels = hydrogen_levels(n, m)
        params = {"demo": demo, "n": n, "m": m, "particles": 2, "energy": hydrogen_pair_energy(n, m)}
        return levels, 2, hydrogen_pair_energy(n, m), one_atom_per_location(levels), params
    if not levels_path:
        raise click.UsageError("either --levels or --demo is required")
    if particles is None or energy is None:
        raise click.UsageError("--levels needs --particles and --energy")
    levels = load_level_spec(resolve_levels_path(levels_path, settings))
    params = {"levels": levels_path, "particles": particles, "energy": energy}
    return levels, particles, energy, None, params


def _occupation_rows(report, levels: LevelSpec) -> List[OccupationRow]:
    return [OccupationRow(occupation=row["occupation"], multiplicity=exact_count(row["multiplicity"]))
            for row in occupation_breakdown(report, levels)]


LEVEL_OPTIONS = [
    click.option("--levels", "levels_path", type=str, default=None, help="LevelSpec JSON file"),
    click.option("--demo", type=click.Choice(["hydrogen"]), default=None, help="Built-in two-atom example"),
    click.option("--particles", type=int, default=None, help="Number of particles N"),
    click.option("--energy", type=str, default=None, help="Total energy E (integer, decimal or p/q)"),
    click.option("--n", "n", type=click.IntRange(min=1), default=1, show_default=True, help="Hydrogen demo: first internal index"),
    click.option("--m", "m", type=click.IntRange(min=1), default=2, show_default=True, help="Hydrogen demo: second internal index"),
]


def level_options(func: Callable) -> Callable:
    for option in reversed(LEVEL_OPTIONS):
        func = option(func)
    return func


@cli.command()
@level_options
@click.pass_obj
@handle_errors
def count(settings: Settings, levels_path, demo, particles, energy, n, m) -> None:
    """Exact microstate counts W_dist, W_bose, W_fermi at fixed total energy."""
    levels, particles, energy, constraint, params = _level_problem(settings, levels_path, demo, particles, energy, n, m)
    gibbs = gibbs_check(levels, particles, energy, constraint)
    report = gibbs.report

    brute = None
    if levels.size**particles <= MAX_ASSIGNMENTS:
        brute = enumerate_assignments(levels, particles, energy, constraint)

    entropy_gap = None
    if report.w_dist and report.w_bose:
        entropy_gap = math.log(Fraction(report.w_dist, report.w_bose))

    witness = None
    if gibbs.witness is not None:
        witness = {levels.label(k): c for k, c in enumerate(gibbs.witness.counts) if c}

    results = CountResults(
        particles=particles,
        energy=format_exact(report.energy),
        w_dist=exact_count(report.w_dist),
        w_bose=exact_count(report.w_bose),
        w_fermi=exact_count(report.w_fermi),
        w_ident=exact_count(report.w_ident),
        w_dist_brute_force=exact_count(brute) if brute is not None else None,
        gibbs_holds=gibbs.holds,
        gibbs_witness=witness,
        occupations=_occupation_rows(report, levels),
        entropy_gap=entropy_gap,
    )
    ordered = report.w_fermi <= report.w_bose <= report.w_dist
    checks = [check_eq("count_ordering", int(ordered), 1)]
    if brute is not None:
        checks.append(check_eq("brute_force_W_dist", brute, report.w_dist))
    if demo and report.w_bose:
        checks.append(check_eq("W_dist_over_W_ident", report.w_dist // report.w_bose, math.factorial(2)))
    emit("count", params, results, checks)


@cli.command()
@click.option("--sep", "separation", type=float, default=None, help="Separation D of the packet centers")
@click.option("--width", "sigma", type=float, default=None, help="Standard deviation σ of |ψ|²")
@click.option("--config", "config_path", type=str, default=None, help="GaussianSpec JSON file")
@click.option("--threshold", type=float, default=None, help="FAPP threshold (default: IDLAB_FAPP_THRESHOLD)")
@click.option("--count", "count_", type=click.IntRange(min=2), default=2, show_default=True,
              help="Number of equally spaced packets")
@click.pass_obj
@handle_errors
def gaussian(settings: Settings, separation, sigma, config_path, threshold, count_) -> None:
    """Overlap of displaced Gaussian packets, checked against quadrature."""
    if config_path:
        spec = load_gaussian_spec(config_path)
    elif separation is None or sigma is None:
        raise click.UsageError("give --sep and --width, or --config")
    else:
        spec = GaussianSpec(separation=separation, sigma=sigma)
    threshold = settings.fapp_threshold if threshold is None else threshold
    if not (0 < threshold < 1):
        raise click.BadParameter("threshold must be in (0, 1)", param_hint="--threshold")

    report = gaussian_report(spec, threshold)
    family = None
    if count_ > 2:
        fam = gaussian_family_overlaps(count_, spec, threshold)
        family = GaussianFamilyResults(count=fam.count, overlaps=fam.overlaps,
                                       worst_overlap=fam.worst_overlap, verdict=fam.verdict.value)

    results = GaussianResults(
        separation=spec.separation,
        sigma=spec.sigma,
        overlap=report.overlap,
        quadrature=report.quadrature,
        agreement=report.agreement,
        verdict=report.verdict.value,
        threshold=threshold,
        family=family,
    )
    checks = [check_le("quadrature_agreement", report.agreement, QUADRATURE_AGREEMENT)]
    params = {"separation": spec.separation, "sigma": spec.sigma, "threshold": threshold, "count": count_}
    emit("gaussian", params, results, checks)


def _well_results(report: WellReport, checks: List[Check], min_left_mass: Optional[float]) -> WellResults:
    spec = report.spec
    label = spec.name or "custom"
    pair = localized_states(report)

    checks.append(check_le(f"{label}:lr_overlap", pair.lr_overlap, TOLERANCE))
    checks.append(check_le(f"{label}:even_odd_overlap", report.even_odd_overlap, TOLERANCE))
    checks.append(check_le(f"{label}:mass_closure", pair.mass_closure, MASS_CLOSURE_TOLERANCE))
    checks.append(check_le(f"{label}:residual", report.residual, RESIDUAL_TOLERANCE))
    required_mass = min_left_mass if min_left_mass is not None else spec.min_left_mass
    if required_mass is not None:
        checks.append(check_ge(f"{label}:left_mass", pair.left_mass, required_mass))

    box_splitting = None
    if spec.barrier_height == 0:
        first, second = box_levels(spec, 2)
        box_splitting = second - first
        relative = abs(report.splitting - box_splitting) / box_splitting
        checks.append(check_le(f"{label}:box_splitting_error", relative, BOX_RELATIVE_TOLERANCE))

    equivalence_summary = None
    if report.parity_identified:
        doublet = double_well_equivalence(report)
        equivalence_summary = {
            "energies": doublet.energies,
            "positions": doublet.positions,
        }
        for stats, eq_report in doublet.reports.items():
            equivalence_summary[stats] = {
                "lhs": eq_report.lhs, "rhs": eq_report.rhs,
                "deviation": eq_report.deviation, "overlap": eq_report.overlap,
            }
            checks.append(check_le(f"{label}:equivalence_{stats}", eq_report.deviation, eq_report.bound))

    return WellResults(
        name=spec.name,
        barrier_height=spec.barrier_height,
        e_even=report.e_even,
        e_odd=report.e_odd,
        e_third=report.e_third,
        splitting=report.splitting,
        next_gap=report.next_gap,
        left_mass=pair.left_mass,
        right_mass=pair.right_mass,
        lr_overlap=pair.lr_overlap,
        even_odd_overlap=report.even_odd_overlap,
        residual=report.residual,
        box_splitting=box_splitting,
        equivalence=equivalence_summary,
    )


@cli.command()
@click.option("--preset", type=click.Choice(PRESET_NAMES), default=None, help="Shipped barrier preset")
@click.option("--config", "config_path", type=str, default=None, help="WellSpec JSON file")
@click.option("--sweep", is_flag=True, default=False, help="Solve all presets and check the splitting decreases")
@click.option("--parity/--no-parity", default=True, show_default=True, help="Identify even/odd states by mirror parity")
@click.option("--min-left-mass", type=click.FloatRange(0.0, 1.0), default=None,
              help="Require the left-localized state to hold at least this much probability on the left "
                   "(default: the preset's min_left_mass)")
@click.pass_obj
@handle_errors
def doublewell(settings: Settings, preset, config_path, sweep, parity, min_left_mass) -> None:
    """Symmetric double square well: doublet splitting and localized states."""
    chosen = sum(bool(x) for x in (preset, config_path, sweep))
    if chosen != 1:
        raise click.UsageError("give exactly one of --preset, --config or --sweep")

    checks: List[Check] = []
    params: Dict[str, Any] = {"parity": parity, "min_left_mass": min_left_mass}
    strictly_decreasing = None
    if sweep:
        specs = [load_preset(name, settings.well_preset_dir) for name in PRESET_NAMES]
        ladder = barrier_ladder(specs, parallel=settings.parallel)
        reports = ladder.reports
        strictly_decreasing = ladder.strictly_decreasing
        checks.append(check_eq("splitting_strictly_decreasing", int(ladder.strictly_decreasing), 1))
        params["sweep"] = list(PRESET_NAMES)
    else:
        spec: WellSpec = load_preset(preset, settings.well_preset_dir) if preset else load_well_spec(config_path)
        reports = [solve_double_well(spec, identify_parity=parity)]
        params["preset" if preset else "config"] = preset or config_path
    params["specs"] = [r.spec.dict() for r in reports]

    wells = [_well_results(report, checks, min_left_mass) for report in reports]
    results = DoubleWellResults(
        wells=wells,
        splittings=[w.splitting for w in wells],
        strictly_decreasing=strictly_decreasing,
    )
    emit("doublewell", params, results, checks)


@cli.command()
@level_options
@click.option("--stats", type=STATS, default="bose", show_default=True, help="Identical-particle statistics")
@click.option("--extensivity", is_flag=True, default=False, help="Compare k disjoint copies with k × one copy")
@click.option("--copies", type=click.IntRange(min=2), default=2, show_default=True)
@click.pass_obj
@handle_errors
def entropy(settings: Settings, levels_path, demo, particles, energy, n, m, stats, extensivity, copies) -> None:
    """ln W for distinguishable and identical counting, with the Gibbs N! correction."""
    levels, particles, energy, constraint, params = _level_problem(settings, levels_path, demo, particles, energy, n, m)
    cls = SymmetryClass.from_label(stats)
    params.update({"stats": cls.label, "extensivity": extensivity, "copies": copies})

    report = enumerate_microstates(levels, particles, energy, constraint)
    entropy_values = entropy_from_counts(report.w_dist, report.identical(cls), particles, cls)
    multiplicity_free = all(occ.is_fermionic for occ, _ in report.per_occupation)

    checks: List[Check] = []
    if multiplicity_free and entropy_values.corrected is not None and entropy_values.ln_w_ident is not None:
        checks.append(check_le("corrected_vs_identical",
                               abs(entropy_values.corrected - entropy_values.ln_w_ident), TOLERANCE))

    extensivity_results = None
    if extensivity:
        if constraint is not None:
            raise click.UsageError("--extensivity works on --levels files only")
        ext = extensivity_experiment(levels, particles, energy, copies, cls)
        extensivity_results = ExtensivityResults(
            copies=copies,
            combined_w_dist=exact_count(ext.combined.w_dist),
            combined_w_ident=exact_count(ext.combined.identical(cls)),
            identical_gap=ext.identical_gap,
            distinguishable_gap=ext.distinguishable_gap,
            partition_term=ext.partition_term,
            corrected_gap=ext.corrected_gap,
        )
        if ext.identical_gap is not None:
            checks.append(check_le("identical_gap", abs(ext.identical_gap), TOLERANCE))
        if ext.corrected_gap is not None:
            checks.append(check_le("corrected_gap", abs(ext.corrected_gap), TOLERANCE))
        checks.append(check_eq("distinguishable_gap_is_partition_term", int(ext.partition_exact), 1))

    results = EntropyResults(
        particles=particles,
        energy=format_exact(report.energy),
        statistics=cls.label,
        w_dist=exact_count(entropy_values.w_dist),
        w_ident=exact_count(entropy_values.w_ident),
        ln_w_dist=entropy_values.ln_w_dist,
        ln_w_ident=entropy_values.ln_w_ident,
        gibbs_correction=entropy_values.gibbs_correction,
        corrected=entropy_values.corrected,
        multiplicity_free=multiplicity_free,
        extensivity=extensivity_results,
    )
    emit("entropy", params, results, checks)


@cli.command()
def schema() -> None:
    """Print the JSON schema of the report envelope and every results object."""
    click.echo(json.dumps(published_schema(), indent=2))


__all__ = ["cli", "configure_logging", "handle_errors", "emit"]
