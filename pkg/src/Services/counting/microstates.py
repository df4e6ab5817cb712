"""Exact microstate counting for N particles on discrete levels.

For a fixed total energy E the admissible occupation vectors (n₁,…,n_M),
Σnᵢ = N, Σnᵢεᵢ = E, give three counts:

    W_dist  = Σ N!/Πnᵢ!            distinguishable particles
    W_bose  = #admissible occupations
    W_fermi = #admissible occupations with every nᵢ ≤ 1

All arithmetic is on Python integers with an explicit signed 64-bit ceiling;
energies are compared as exact scaled integers (see `LevelSpec`).

An optional constraint restricts the admissible occupations further (the
hydrogen-pair and extensivity models use it to pin particles to locations or
subsystems).

Example:
    from src.Services.counting.models import LevelSpec
    from src.Services.counting.microstates import enumerate_microstates

    report = enumerate_microstates(LevelSpec.from_values([1, 2, 3]), particles=3, energy=6)
    print(report.w_dist, report.w_bose, report.w_fermi)   # 6 1 1
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from src.Services.counting.models import ExactValue, LevelSpec, parse_exact
from src.Services.hilbert.hilbert_space import FormalismError
from src.Services.permutation.permutator import SymmetryClass

logger = logging.getLogger(__name__)

MAX_PARTICLES = 8
MAX_LEVELS = 12
INT64_MAX = 2**63 - 1
MAX_ASSIGNMENTS = 10**6
MAX_ORBIT_PARTICLES = 4

Constraint = Callable[[Tuple[int, ...]], bool]


class ScaleLimitError(FormalismError):
    """Custom exception for counting problems beyond the desk-scale caps"""
    pass


class CountOverflowError(FormalismError):
    """Custom exception for counts that leave the signed 64-bit range"""
    pass


# -------------------------- Domain types -------------------------- #

@dataclass(frozen=True)
class OccupationVector:
    counts: Tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def is_fermionic(self) -> bool:
        return all(n <= 1 for n in self.counts)

    def multiplicity(self) -> int:
        """N!/Πnᵢ!, the number of distinguishable assignments with these occupations."""
        value = math.factorial(self.total)
        for n in self.counts:
            value //= math.factorial(n)
        return _checked(value)

    def energy(self, scaled_levels: Sequence[int]) -> int:
        return sum(n * e for n, e in zip(self.counts, scaled_levels))


@dataclass
class CountReport:
    particles: int
    energy: Fraction
    w_dist: int
    w_bose: int
    w_fermi: int
    per_occupation: List[Tuple[OccupationVector, int]] = field(default_factory=list)

    @property
    def w_ident(self) -> int:
        """Identical-particle count with no statistics-specific exclusion (bosonic)."""
        return self.w_bose

    def identical(self, cls: SymmetryClass) -> int:
        return self.w_bose if cls is SymmetryClass.BOSON else self.w_fermi


@dataclass
class GibbsCheck:
    holds: bool
    report: CountReport
    witness: Optional[OccupationVector] = None


@dataclass
class EntropyReport:
    """Dimensionless entropies ln W (Boltzmann constant 1).

    A None entropy marks W = 0, where the logarithm is undefined.
    """
    particles: int
    w_dist: int
    w_ident: int
    ln_w_dist: Optional[float]
    ln_w_ident: Optional[float]
    gibbs_correction: float
    corrected: Optional[float]
    statistics: SymmetryClass = SymmetryClass.BOSON


@dataclass
class ExtensivityReport:
    """Combined system of `copies` disjoint subsystems vs `copies` × single subsystem.

    identical_gap     ln W_ident(combined) − copies·ln W_ident(single)
    distinguishable_gap  same for W_dist, uncorrected
    partition_term    ln((copies·N)! / (N!)^copies)
    corrected_gap     distinguishable gap after dividing each count by its particle-number factorial
    """
    copies: int
    particles: int
    energy: Fraction
    single: CountReport
    combined: CountReport
    statistics: SymmetryClass
    identical_gap: Optional[float]
    distinguishable_gap: Optional[float]
    partition_term: float
    corrected_gap: Optional[float]
    partition_exact: bool


# -------------------------- Helper Functions -------------------------- #

def _checked(value: int) -> int:
    if value > INT64_MAX:
        raise CountOverflowError(f"Count {value} exceeds the signed 64-bit range")
    return value


def _check_scale(levels: LevelSpec, particles: int) -> None:
    if particles < 1:
        raise ScaleLimitError(f"Number of particles must be >= 1, got {particles}")
    if particles > MAX_PARTICLES:
        raise ScaleLimitError(f"N = {particles} exceeds the cap of {MAX_PARTICLES} particles")
    if levels.size > MAX_LEVELS:
        raise ScaleLimitError(f"M = {levels.size} exceeds the cap of {MAX_LEVELS} levels")


def _check_assignments(levels: LevelSpec, particles: int) -> None:
    if levels.size**particles > MAX_ASSIGNMENTS:
        raise ScaleLimitError(f"M^N = {levels.size ** particles} assignments exceed {MAX_ASSIGNMENTS}")


def _log(value: Fraction) -> Optional[float]:
    return math.log(value) if value > 0 else None


def _admissible_assignments(
    levels: LevelSpec,
    particles: int,
    energy: ExactValue,
    constraint: Optional[Constraint],
):
    target = levels.scaled_total(energy)
    if target is None:
        return
    scaled = levels.scaled
    for assignment in itertools.product(range(levels.size), repeat=particles):
        if sum(scaled[k] for k in assignment) != target:
            continue
        if constraint is not None and not constraint(_occupation_of(assignment, levels.size)):
            continue
        yield assignment


def _occupation_of(assignment: Sequence[int], size: int) -> Tuple[int, ...]:
    counts = [0] * size
    for level in assignment:
        counts[level] += 1
    return tuple(counts)


# -------------------------- Counting -------------------------- #

def enumerate_microstates(
    levels: LevelSpec,
    particles: int,
    energy: ExactValue,
    constraint: Optional[Constraint] = None,
) -> CountReport:
    """Exhaustive enumeration of admissible occupation vectors.

    Raises:
        ScaleLimitError: N outside 1..8 or more than 12 levels
        CountOverflowError: If a count leaves the signed 64-bit range
    """
    _check_scale(levels, particles)
    exact_energy = parse_exact(energy)
    target = levels.scaled_total(exact_energy)
    scaled = levels.scaled

    w_dist = w_bose = w_fermi = 0
    per_occupation: List[Tuple[OccupationVector, int]] = []
    if target is not None:
        for combo in itertools.combinations_with_replacement(range(levels.size), particles):
            occupation = OccupationVector(_occupation_of(combo, levels.size))
            if occupation.energy(scaled) != target:
                continue
            if constraint is not None and not constraint(occupation.counts):
                continue
            multiplicity = occupation.multiplicity()
            per_occupation.append((occupation, multiplicity))
            w_dist = _checked(w_dist + multiplicity)
            w_bose += 1
            w_fermi += int(occupation.is_fermionic)

    logger.info("Counted N=%d E=%s over %d levels: W_dist=%d W_bose=%d W_fermi=%d",
                particles, exact_energy, levels.size, w_dist, w_bose, w_fermi)
    return CountReport(
        particles=particles,
        energy=exact_energy,
        w_dist=w_dist,
        w_bose=w_bose,
        w_fermi=w_fermi,
        per_occupation=per_occupation,
    )


def enumerate_assignments(
    levels: LevelSpec,
    particles: int,
    energy: ExactValue,
    constraint: Optional[Constraint] = None,
) -> int:
    """W_dist by brute force over all M^N particle-to-level assignments."""
    _check_scale(levels, particles)
    _check_assignments(levels, particles)
    return sum(1 for _ in _admissible_assignments(levels, particles, energy, constraint))


def count_orbits(
    levels: LevelSpec,
    particles: int,
    energy: ExactValue,
    constraint: Optional[Constraint] = None,
) -> int:
    """Number of S_N orbits on the admissible assignments, by explicit orbit construction."""
    if particles > MAX_ORBIT_PARTICLES:
        raise ScaleLimitError(f"Orbit enumeration is limited to N <= {MAX_ORBIT_PARTICLES}")
    _check_scale(levels, particles)
    _check_assignments(levels, particles)

    permutations = list(itertools.permutations(range(particles)))
    seen = set()
    orbits = 0
    for assignment in _admissible_assignments(levels, particles, energy, constraint):
        if assignment in seen:
            continue
        orbits += 1
        seen.update(tuple(assignment[p] for p in perm) for perm in permutations)
    return orbits


def gibbs_check(
    levels: LevelSpec,
    particles: int,
    energy: ExactValue,
    constraint: Optional[Constraint] = None,
) -> GibbsCheck:
    """Whether W_dist = N!·W_bose with every admissible occupation multiplicity-free."""
    report = enumerate_microstates(levels, particles, energy, constraint)
    witness = next((occ for occ, _ in report.per_occupation if not occ.is_fermionic), None)
    holds = witness is None and report.w_dist == math.factorial(particles) * report.w_bose
    return GibbsCheck(holds=holds, report=report, witness=witness)


# -------------------------- Entropy -------------------------- #

def entropy_from_counts(
    w_dist: int,
    w_ident: int,
    particles: int,
    statistics: SymmetryClass = SymmetryClass.BOSON,
) -> EntropyReport:
    n_factorial = math.factorial(particles)
    return EntropyReport(
        particles=particles,
        w_dist=w_dist,
        w_ident=w_ident,
        ln_w_dist=_log(Fraction(w_dist)),
        ln_w_ident=_log(Fraction(w_ident)),
        gibbs_correction=math.log(n_factorial),
        corrected=_log(Fraction(w_dist, n_factorial)),
        statistics=statistics,
    )


def entropy_report(
    levels: LevelSpec,
    particles: int,
    energy: ExactValue,
    statistics: SymmetryClass = SymmetryClass.BOSON,
    constraint: Optional[Constraint] = None,
) -> EntropyReport:
    """ln W_dist, ln W_ident and the Gibbs-corrected ln(W_dist/N!)."""
    report = enumerate_microstates(levels, particles, energy, constraint)
    return entropy_from_counts(report.w_dist, report.identical(statistics), particles, statistics)


def _confined_copies(levels: LevelSpec, particles: int, energy: ExactValue, copies: int) -> Tuple[LevelSpec, Constraint]:
    """Levels of `copies` disjoint subsystems, each holding N particles at energy E."""
    size = levels.size
    scaled = levels.scaled
    target = levels.scaled_total(energy)
    labels = tuple(f"copy{c}:{levels.label(k)}" for c in range(copies) for k in range(size))
    combined = LevelSpec(energies=levels.energies * copies, labels=labels)

    def confined(counts: Tuple[int, ...]) -> bool:
        for c in range(copies):
            block = counts[c * size:(c + 1) * size]
            if sum(block) != particles or sum(n * e for n, e in zip(block, scaled)) != target:
                return False
        return True

    return combined, confined


def extensivity_experiment(
    levels: LevelSpec,
    particles: int,
    energy: ExactValue,
    copies: int = 2,
    statistics: SymmetryClass = SymmetryClass.BOSON,
) -> ExtensivityReport:
    """Compare ln W of `copies` separated subsystems with `copies` × ln W of one.

    Each copy gets its own set of levels and is pinned to N particles at energy E.
    The identical-particle count of the combined system factorizes, so its gap is
    zero; the uncorrected distinguishable count picks up the partition term
    ln((kN)!/(N!)^k), which the N! correction removes.

    Raises:
        ScaleLimitError: If k·N > 8 or k·M > 12
    """
    if copies < 2:
        raise ScaleLimitError(f"copies must be >= 2, got {copies}")
    _check_scale(levels, particles)
    if copies * particles > MAX_PARTICLES or copies * levels.size > MAX_LEVELS:
        raise ScaleLimitError(
            f"Combined system ({copies * particles} particles, {copies * levels.size} levels) exceeds the caps"
        )

    exact_energy = parse_exact(energy)
    single = enumerate_microstates(levels, particles, exact_energy)
    combined_levels, confined = _confined_copies(levels, particles, exact_energy, copies)
    combined = enumerate_microstates(combined_levels, copies * particles, copies * exact_energy, confined)

    n_fact = math.factorial(particles)
    kn_fact = math.factorial(copies * particles)
    single_ident = single.identical(statistics)
    combined_ident = combined.identical(statistics)

    identical_gap = _log(Fraction(combined_ident, single_ident**copies)) if single_ident and combined_ident else None
    if single.w_dist and combined.w_dist:
        distinguishable_gap = _log(Fraction(combined.w_dist, single.w_dist**copies))
        corrected_gap = _log(Fraction(combined.w_dist * n_fact**copies, kn_fact * single.w_dist**copies))
    else:
        distinguishable_gap = corrected_gap = None

    report = ExtensivityReport(
        copies=copies,
        particles=particles,
        energy=exact_energy,
        single=single,
        combined=combined,
        statistics=statistics,
        identical_gap=identical_gap,
        distinguishable_gap=distinguishable_gap,
        partition_term=math.log(Fraction(kn_fact, n_fact**copies)),
        corrected_gap=corrected_gap,
        partition_exact=combined.w_dist * n_fact**copies == kn_fact * single.w_dist**copies,
    )
    logger.info("Extensivity k=%d N=%d: identical gap %s, distinguishable gap %s",
                copies, particles, report.identical_gap, report.distinguishable_gap)
    return report


# -------------------------- Hydrogen pair -------------------------- #

def hydrogen_levels(n: int = 1, m: int = 2) -> LevelSpec:
    """Composite one-atom states (location, internal) with energies −1/k².

    Locations ψ and φ are far apart; the internal index k carries the energy.
    With n = m the two internal indices coincide and only two levels remain.
    """
    if n < 1 or m < 1:
        raise FormalismError("Internal quantum numbers must be >= 1")
    internal = [n] if n == m else [n, m]
    # location-major: the first len(internal) levels sit at ψ
    energies = [Fraction(-1, k * k) for _ in ("psi", "phi") for k in internal]
    labels = [f"{loc},{k}" for loc in ("psi", "phi") for k in internal]
    return LevelSpec(energies=tuple(energies), labels=tuple(labels))


def hydrogen_pair_count(n_equal_m: bool = False, n: int = 1, m: int = 2) -> CountReport:
    """Two atoms, one at each location, with internal states {n, m}.

    n ≠ m gives W_dist = 4 and W_ident = 2; n = m gives 2 and 1.
    """
    if n_equal_m:
        m = n
    elif n == m:
        raise FormalismError("n_equal_m=False needs distinct internal indices")
    levels = hydrogen_levels(n, m)
    return enumerate_microstates(levels, 2, hydrogen_pair_energy(n, m), one_atom_per_location(levels))


def hydrogen_pair_energy(n: int, m: int) -> Fraction:
    return Fraction(-1, n * n) + Fraction(-1, m * m)


def one_atom_per_location(levels: LevelSpec) -> Constraint:
    """Constraint for `hydrogen_levels`: exactly one atom at ψ and one at φ."""
    per_location = levels.size // 2

    def constraint(counts: Tuple[int, ...]) -> bool:
        return sum(counts[:per_location]) == 1 and sum(counts[per_location:]) == 1

    return constraint


def occupation_breakdown(report: CountReport, levels: LevelSpec) -> List[Dict[str, object]]:
    """Per-occupation rows keyed by level label, for reports."""
    return [
        {
            "occupation": {levels.label(k): n for k, n in enumerate(occ.counts) if n},
            "multiplicity": multiplicity,
        }
        for occ, multiplicity in report.per_occupation
    ]


__all__ = [
    "MAX_PARTICLES", "MAX_LEVELS", "ScaleLimitError", "CountOverflowError",
    "OccupationVector", "CountReport", "GibbsCheck", "EntropyReport", "ExtensivityReport",
    "enumerate_microstates", "enumerate_assignments", "count_orbits", "gibbs_check",
    "entropy_from_counts", "entropy_report", "extensivity_experiment",
    "hydrogen_levels", "hydrogen_pair_count", "hydrogen_pair_energy", "one_atom_per_location",
    "occupation_breakdown",
]
