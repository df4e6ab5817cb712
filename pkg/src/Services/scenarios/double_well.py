"""One-dimensional symmetric double square well.

The Hamiltonian -d²/dx² + V(x) (ħ²/2m = 1) is discretized with the three-point
Laplacian on `grid_points` interior points of [-L, L] with hard walls,
x_i = -L + (i+1)h, h = 2L/(n+1). The lowest eigenpairs come from
`scipy.linalg.eigh_tridiagonal`.

The two lowest eigenvectors are orthogonal (differentiating) but delocalized;
their sum and difference L, R = (φ_even ± φ_odd)/√2 are localized in the left
and right well once the barrier is high. Vectors are normalized in the
Euclidean sense (Σ|φ_i|² = 1); `wavefunction` rescales to the continuum
normalization ∫|φ|²dx = 1.

Example:
    from src.Services.scenarios.double_well import solve_double_well, localized_states
    from src.Services.scenarios.models import WellSpec

    spec = WellSpec(grid_points=2001, domain_half_width=10, barrier_height=10, barrier_half_width=1)
    pair = localized_states(solve_double_well(spec))
    print(pair.left_mass)   # > 0.99
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.linalg import eigh_tridiagonal

from src.Services.hilbert.hilbert_space import (
    TOLERANCE,
    FormalismError,
    Operator,
    StateVector,
    expectation,
    inner,
)
from src.Services.observables.differentiation import (
    EquivalenceReport,
    energy_of_state,
    equivalence_check,
)
from src.Services.permutation.permutator import SymmetryClass
from src.Services.scenarios.models import WellSpec

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-8
EIGENPAIRS = 3


class EigenSolverError(FormalismError):
    """Custom exception for eigenpairs that fail to converge or cannot be identified"""
    pass


class AsymmetricWellError(FormalismError):
    """Custom exception for parity identification on a well without mirror symmetry"""
    pass


@dataclass
class WellReport:
    """Lowest levels of a double well and the localization of their ± combinations.

    `phi_even`/`phi_odd` are Euclidean-normalized grid vectors. When the well is
    not symmetric and parity was not requested they hold the ground and first
    excited states.
    """
    spec: WellSpec
    e_even: float
    e_odd: float
    e_third: float
    splitting: float
    left_mass: float
    right_mass: float
    lr_overlap: float
    even_odd_overlap: float
    residual: float
    spacing: float
    parity_identified: bool
    grid: np.ndarray = field(repr=False)
    phi_even: np.ndarray = field(repr=False)
    phi_odd: np.ndarray = field(repr=False)

    @property
    def next_gap(self) -> float:
        """Distance from the doublet to the third level."""
        return self.e_third - self.e_odd


@dataclass(eq=False)
class LocalizedPair:
    left: StateVector
    right: StateVector
    left_mass: float
    right_mass: float
    lr_overlap: float
    mass_closure: float


@dataclass
class LadderReport:
    reports: List[WellReport]
    splittings: List[float]
    strictly_decreasing: bool


@dataclass
class DoubleWellEquivalence:
    """Equivalence check for the localized pair inside the even/odd doublet.

    In the basis (φ_even, φ_odd) the localized states are (1, ±1)/√2, the projected
    Hamiltonian is diag(e_even, e_odd) and `position` is ⟨φ_i, x φ_j⟩.
    """
    hamiltonian: List[List[float]]
    position: List[List[float]]
    energies: Dict[str, float]
    positions: Dict[str, float]
    reports: Dict[str, EquivalenceReport]

    @property
    def pass_(self) -> bool:
        return all(report.pass_ for report in self.reports.values())


# -------------------------- Grid helpers -------------------------- #

def well_grid(spec: WellSpec) -> np.ndarray:
    """Interior grid points, mirror-symmetric to the last bit."""
    n = spec.grid_points
    h = 2.0 * spec.domain_half_width / (n + 1)
    x = -spec.domain_half_width + h * np.arange(1, n + 1)
    return 0.5 * (x - x[::-1])


def well_potential(x: np.ndarray, spec: WellSpec) -> np.ndarray:
    on_barrier = np.abs(x - spec.barrier_offset) <= spec.barrier_half_width
    return np.where(on_barrier, spec.barrier_height, -spec.well_depth)


def _tridiagonal_apply(diagonal: np.ndarray, off: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = diagonal * v
    out[:-1] += off * v[1:]
    out[1:] += off * v[:-1]
    return out


def _half_masses(v: np.ndarray) -> Tuple[float, float]:
    """(left, right) probability with the center point split evenly."""
    center = v.size // 2
    density = np.abs(v) ** 2
    middle = 0.5 * density[center]
    return float(density[:center].sum() + middle), float(density[center + 1:].sum() + middle)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


# -------------------------- Solver -------------------------- #

def solve_double_well(spec: WellSpec, identify_parity: bool = True) -> WellReport:
    """Lowest eigenpairs of the discretized double well.

    With `identify_parity` the two lowest eigenvectors are projected onto the
    even/odd sectors of the mirror x → -x, fixing the sign so that φ_even has
    positive sum and φ_odd is positive on the left.

    Raises:
        AsymmetricWellError: Parity requested for a well with nonzero barrier_offset
        EigenSolverError: No convergence, degenerate doublet, or residual above 1e-8
    """
    if identify_parity and not spec.is_symmetric:
        raise AsymmetricWellError(f"barrier_offset={spec.barrier_offset} breaks the mirror symmetry")

    x = well_grid(spec)
    h = 2.0 * spec.domain_half_width / (spec.grid_points + 1)
    diagonal = 2.0 / h**2 + well_potential(x, spec)
    off = np.full(spec.grid_points - 1, -1.0 / h**2)

    try:
        energies, vectors = eigh_tridiagonal(diagonal, off, select="i", select_range=(0, EIGENPAIRS - 1))
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenSolverError(f"Tridiagonal eigensolver failed: {e}") from e

    if energies[1] - energies[0] <= TOLERANCE * max(1.0, abs(energies[0])):
        raise EigenSolverError("The two lowest levels are numerically degenerate")

    first, second = vectors[:, 0], vectors[:, 1]
    if identify_parity:
        parities = [float(np.dot(v, v[::-1])) for v in (first, second)]
        if parities[0] * parities[1] >= 0:
            raise EigenSolverError(f"Could not separate even and odd states (parities {parities})")
        even_index = 0 if parities[0] > 0 else 1
        even_raw, odd_raw = vectors[:, even_index], vectors[:, 1 - even_index]
        phi_even = _unit(0.5 * (even_raw + even_raw[::-1]))
        phi_odd = _unit(0.5 * (odd_raw - odd_raw[::-1]))
        e_even, e_odd = float(energies[even_index]), float(energies[1 - even_index])
    else:
        phi_even, phi_odd = _unit(first), _unit(second)
        e_even, e_odd = float(energies[0]), float(energies[1])

    if phi_even.sum() < 0:
        phi_even = -phi_even
    center = spec.grid_points // 2
    if phi_odd[:center].sum() < 0:
        phi_odd = -phi_odd

    residual = max(
        float(np.linalg.norm(_tridiagonal_apply(diagonal, off, phi) - energy * phi))
        for phi, energy in ((phi_even, e_even), (phi_odd, e_odd))
    )
    if residual > RESIDUAL_TOLERANCE:
        raise EigenSolverError(f"Eigenpair residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE:g}")

    left = (phi_even + phi_odd) / math.sqrt(2.0)
    right = (phi_even - phi_odd) / math.sqrt(2.0)
    report = WellReport(
        spec=spec,
        e_even=e_even,
        e_odd=e_odd,
        e_third=float(energies[2]),
        splitting=e_odd - e_even,
        left_mass=_half_masses(left)[0],
        right_mass=_half_masses(right)[1],
        lr_overlap=abs(float(np.dot(left, right))),
        even_odd_overlap=abs(float(np.dot(phi_even, phi_odd))),
        residual=residual,
        spacing=h,
        parity_identified=identify_parity,
        grid=x,
        phi_even=phi_even,
        phi_odd=phi_odd,
    )
    logger.info("Double well '%s' V0=%g: splitting %.6e, left mass %.6f",
                spec.name, spec.barrier_height, report.splitting, report.left_mass)
    return report


def localized_states(report: WellReport) -> LocalizedPair:
    """L, R = (φ_even ± φ_odd)/√2 with their half-domain masses."""
    left = StateVector((report.phi_even + report.phi_odd) / math.sqrt(2.0))
    right = StateVector((report.phi_even - report.phi_odd) / math.sqrt(2.0))
    left_in_left, left_in_right = _half_masses(left.amplitudes.real)
    return LocalizedPair(
        left=left,
        right=right,
        left_mass=left_in_left,
        right_mass=_half_masses(right.amplitudes.real)[1],
        lr_overlap=abs(inner(left, right)),
        mass_closure=abs(left_in_left + left_in_right - 1.0),
    )


def wavefunction(report: WellReport, which: str = "even") -> np.ndarray:
    """Grid samples of φ with ∫|φ|²dx = 1."""
    vectors = {"even": report.phi_even, "odd": report.phi_odd}
    if which not in vectors:
        raise FormalismError("which must be 'even' or 'odd'")
    return vectors[which] / math.sqrt(report.spacing)


def box_levels(spec: WellSpec, count: int = 2) -> List[float]:
    """Continuum particle-in-a-box energies (kπ/2L)² - well_depth for k = 1..count."""
    return [(k * math.pi / (2.0 * spec.domain_half_width)) ** 2 - spec.well_depth for k in range(1, count + 1)]


# -------------------------- Sweeps -------------------------- #

def barrier_ladder(specs: Sequence[WellSpec], parallel: bool = False) -> LadderReport:
    """Solve a sequence of wells (ordered by barrier height) and test that the splitting shrinks."""
    if parallel and len(specs) > 1:
        with ThreadPoolExecutor(max_workers=len(specs)) as pool:
            reports = list(pool.map(solve_double_well, specs))
    else:
        reports = [solve_double_well(spec) for spec in specs]

    splittings = [r.splitting for r in reports]
    decreasing = all(later < earlier for earlier, later in zip(splittings, splittings[1:]))
    return LadderReport(reports=reports, splittings=splittings, strictly_decreasing=decreasing)


def double_well_equivalence(report: WellReport) -> DoubleWellEquivalence:
    """Evaluate the identical/different equivalence for L and R in the doublet.

    A is the projected Hamiltonian and B the projected position operator, so
    lhs/rhs compare ⟨H⟩_L·⟨x⟩_R computed both ways.
    """
    basis = np.stack([report.phi_even, report.phi_odd])
    position = basis @ (report.grid[:, None] * basis.T)
    position = 0.5 * (position + position.T)
    hamiltonian = np.diag([report.e_even, report.e_odd])

    h_op = Operator(hamiltonian, hermitian=True)
    x_op = Operator(position, hermitian=True)
    left = StateVector(np.array([1.0, 1.0]) / math.sqrt(2.0))
    right = StateVector(np.array([1.0, -1.0]) / math.sqrt(2.0))

    reports = {cls.label: equivalence_check(left, right, h_op, x_op, cls) for cls in SymmetryClass}
    return DoubleWellEquivalence(
        hamiltonian=hamiltonian.tolist(),
        position=position.tolist(),
        energies={"left": energy_of_state(h_op, left), "right": energy_of_state(h_op, right)},
        positions={"left": expectation(x_op, left), "right": expectation(x_op, right)},
        reports=reports,
    )


__all__ = [
    "EigenSolverError", "AsymmetricWellError",
    "WellReport", "LocalizedPair", "LadderReport", "DoubleWellEquivalence",
    "well_grid", "well_potential", "solve_double_well", "localized_states",
    "wavefunction", "box_levels", "barrier_ladder", "double_well_equivalence",
]
