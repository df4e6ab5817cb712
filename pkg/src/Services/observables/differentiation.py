"""Differentiating states, state-sensitive observables and the equivalence check.

Two one-particle states Ψ, Φ are *differentiating* when ⟨Ψ,Φ⟩ = 0 and FAPP
differentiating when |⟨Ψ,Φ⟩| is below a configurable threshold. For such a pair
the identical-particle state Ξ_ID = I(Ψ⊗Φ) (renormalized) measured with the
differentiating observable A_Ψ⊗B_Φ + B_Φ⊗A_Ψ reproduces the distinguishable
expectation ⟨Ψ⊗Φ, (A⊗B) Ψ⊗Φ⟩. This module builds every piece of that statement
and measures how far it is off for non-orthogonal pairs.

A_Ψ is realized as P_Ψ A P_Ψ for any hermitian A; whether A commutes with P_Ψ is
recorded on the result, not enforced.

Example:
    from src.Services.hilbert.hilbert_space import StateVector, Operator
    from src.Services.observables.differentiation import equivalence_check
    from src.Services.permutation.permutator import SymmetryClass

    e0, e1 = StateVector.basis(2, 0), StateVector.basis(2, 1)
    a = Operator.from_matrix([[1, 0], [0, 2]])
    report = equivalence_check(e0, e1, a, a, SymmetryClass.FERMION)
    print(report.lhs, report.rhs, report.pass_)   # 2.0 2.0 True
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.Services.hilbert.hilbert_space import (
    EXPECTATION_TOLERANCE,
    TOLERANCE,
    DimensionMismatchError,
    FormalismError,
    NonHermitianError,
    NormalizationError,
    Operator,
    RandomSpec,
    StateVector,
    apply,
    commutator,
    draw_hermitian,
    draw_state,
    expectation,
    inner,
    is_hermitian,
    normalize,
    projector_from_state,
    tensor_op,
    tensor_state,
)
from src.Services.permutation.permutator import (
    SymmetryClass,
    identical_projector,
    n_one_particle_observable,
    permutator,
)

logger = logging.getLogger(__name__)

DEFAULT_FAPP_THRESHOLD = 1e-6
MAX_SWEEP_OVERLAP = 0.5
MIN_FIT_POINTS = 3


class PauliExclusionError(FormalismError):
    """Custom exception for antisymmetrizing two parallel one-particle states"""
    pass


class NonOrthogonalError(FormalismError):
    """Custom exception for the inverse isomorphism on non-orthogonal constituents"""
    pass


class DegenerateFitError(FormalismError):
    """Custom exception for a scaling fit that cannot be determined"""
    pass


class Differentiation(str, Enum):
    EXACT = "Exact"
    FAPP = "FAPP"
    NOT_DIFFERENTIATING = "NotDifferentiating"


class TwoParticleKind(str, Enum):
    IDENTICAL = "Identical"
    DIFFERENT = "Different"


# -------------------------- Domain types -------------------------- #

@dataclass(frozen=True)
class DifferentiationVerdict:
    overlap_magnitude: float
    verdict: Differentiation
    threshold: float


@dataclass(frozen=True)
class FamilyVerdict:
    """Pairwise differentiation of N one-particle states.

    `verdict` is the weakest pairwise verdict; `worst_pair` the indices where it occurs.
    """
    overlaps: List[List[float]]
    verdict: Differentiation
    worst_pair: Tuple[int, int]
    worst_overlap: float
    threshold: float


@dataclass(frozen=True, eq=False)
class StateSensitiveObservable:
    base: Operator
    anchor: StateVector
    realized: Operator
    commutes: bool


@dataclass(frozen=True, eq=False)
class TwoParticleState:
    """Two-particle vector on ℂ^d ⊗ ℂ^d with the one-particle states it was built from.

    `symmetry` is set only for the Identical kind.
    """
    kind: TwoParticleKind
    vector: StateVector
    constituents: Tuple[StateVector, StateVector]
    symmetry: Optional[SymmetryClass] = None


@dataclass
class EquivalenceReport:
    """lhs = ⟨Ξ_ID, (A_Ψ⊗B_Φ + B_Φ⊗A_Ψ) Ξ_ID⟩, rhs = ⟨Ξ_DIF, (A⊗B) Ξ_DIF⟩.

    For overlap ≤ 1e-12 the pass rule is deviation ≤ 1e-10·(1+|rhs|); otherwise
    the allowance grows by overlap²·|rhs|, the leading-order error of the
    identification.
    """
    lhs: float
    rhs: float
    deviation: float
    overlap: float
    lambda_: int
    bound: float
    pass_: bool


@dataclass
class FappSweepReport:
    dim: int
    trials: int
    lambda_: int
    overlaps: List[float]
    max_deviations: List[float]
    slope: float
    intercept: float
    all_within_bound: bool = field(default=True)

    def slope_within(self, low: float = 1.9, high: float = 2.1) -> bool:
        return low <= self.slope <= high


# -------------------------- Helper Functions -------------------------- #

def _require_normalized(*states: StateVector) -> None:
    for state in states:
        if not state.is_normalized():
            raise NormalizationError(f"Expected a unit vector, got norm {state.norm():.15g}")


def _require_hermitian(*operators: Operator) -> None:
    for op in operators:
        if not is_hermitian(op):
            raise NonHermitianError("Observable must be hermitian")


def _hermitized(matrix: np.ndarray) -> Operator:
    return Operator(0.5 * (matrix + matrix.conj().T), hermitian=True)


# -------------------------- Classification -------------------------- #

def classify(psi: StateVector, phi: StateVector, threshold: float = DEFAULT_FAPP_THRESHOLD) -> DifferentiationVerdict:
    """Exact if |⟨Ψ,Φ⟩| ≤ 1e-12, FAPP if at most `threshold`, NotDifferentiating otherwise.

    Raises:
        DimensionMismatchError: If the states live on different spaces
        NormalizationError: If either state is not a unit vector
    """
    if threshold <= 0:
        raise FormalismError("threshold must be positive")
    if psi.dim != phi.dim:
        raise DimensionMismatchError(f"Cannot classify states of dims {psi.dim} and {phi.dim}")
    _require_normalized(psi, phi)

    return verdict_for_overlap(abs(inner(psi, phi)), threshold)


def verdict_for_overlap(overlap: float, threshold: float = DEFAULT_FAPP_THRESHOLD) -> DifferentiationVerdict:
    """Apply the Exact / FAPP / NotDifferentiating rule to an overlap magnitude."""
    if overlap <= TOLERANCE:
        verdict = Differentiation.EXACT
    elif overlap <= threshold:
        verdict = Differentiation.FAPP
    else:
        verdict = Differentiation.NOT_DIFFERENTIATING
    return DifferentiationVerdict(overlap_magnitude=float(overlap), verdict=verdict, threshold=threshold)


def classify_family(states: Sequence[StateVector], threshold: float = DEFAULT_FAPP_THRESHOLD) -> FamilyVerdict:
    """Classify every pair of a family; the family verdict is the weakest pair."""
    if len(states) < 2:
        raise FormalismError("classify_family needs at least two states")

    count = len(states)
    overlaps = [[0.0] * count for _ in range(count)]
    worst: Optional[DifferentiationVerdict] = None
    worst_pair = (0, 1)
    for i in range(count):
        overlaps[i][i] = 1.0
        for j in range(i + 1, count):
            verdict = classify(states[i], states[j], threshold)
            overlaps[i][j] = overlaps[j][i] = verdict.overlap_magnitude
            if worst is None or verdict.overlap_magnitude > worst.overlap_magnitude:
                worst, worst_pair = verdict, (i, j)

    return FamilyVerdict(
        overlaps=overlaps,
        verdict=worst.verdict,
        worst_pair=worst_pair,
        worst_overlap=worst.overlap_magnitude,
        threshold=threshold,
    )


# -------------------------- Observables -------------------------- #

def state_sensitive(a: Operator, psi: StateVector) -> StateSensitiveObservable:
    """A_Ψ = P_Ψ A P_Ψ, flagging whether [A, P_Ψ] vanishes.

    Raises:
        NonHermitianError: If A is not hermitian
        NormalizationError: If Ψ is not a unit vector
    """
    _require_hermitian(a)
    if a.dim != psi.dim:
        raise DimensionMismatchError(f"Operator dim {a.dim} does not match state dim {psi.dim}")
    _require_normalized(psi)

    projector = projector_from_state(psi)
    realized = _hermitized(projector.entries @ a.entries @ projector.entries)
    residual = float(np.max(np.abs(commutator(a, projector).entries)))
    return StateSensitiveObservable(base=a, anchor=psi, realized=realized, commutes=residual <= TOLERANCE)


def differentiating_observable(a: Operator, psi: StateVector, b: Operator, phi: StateVector) -> Operator:
    """A_Ψ⊗B_Φ + B_Φ⊗A_Ψ; commutes with Π."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"A and B act on different spaces: {a.dim} vs {b.dim}")
    a_psi = state_sensitive(a, psi).realized
    b_phi = state_sensitive(b, phi).realized
    return tensor_op(a_psi, b_phi) + tensor_op(b_phi, a_psi)


def one_particle_observable(a: Operator) -> Operator:
    """A⊗1 + 1⊗A."""
    _require_hermitian(a)
    return n_one_particle_observable(a, 2)


# -------------------------- Two-particle states -------------------------- #

def xi_id(psi: StateVector, phi: StateVector, cls: SymmetryClass) -> TwoParticleState:
    """I(Ψ⊗Φ) renormalized to unit norm; a Π-eigenvector with eigenvalue λ.

    Raises:
        PauliExclusionError: If the fermionic projection vanishes (Φ ∝ Ψ)
    """
    _require_normalized(psi, phi)
    raw = apply(identical_projector(psi.dim, cls), tensor_state(psi, phi))
    if raw.norm() <= TOLERANCE:
        raise PauliExclusionError("Antisymmetrized state vanishes: the two one-particle states are parallel")
    return TwoParticleState(
        kind=TwoParticleKind.IDENTICAL,
        vector=normalize(raw),
        constituents=(psi, phi),
        symmetry=cls,
    )


def xi_dif(psi: StateVector, phi: StateVector) -> TwoParticleState:
    _require_normalized(psi, phi)
    return TwoParticleState(kind=TwoParticleKind.DIFFERENT, vector=tensor_state(psi, phi), constituents=(psi, phi))


def map_dif_to_id(state: TwoParticleState, cls: SymmetryClass) -> TwoParticleState:
    """Ξ_DIF ↦ √2·I Ξ_DIF, renormalized like `xi_id`."""
    if state.kind is not TwoParticleKind.DIFFERENT:
        raise FormalismError("map_dif_to_id expects a Different two-particle state")
    psi, phi = state.constituents
    raw = apply(identical_projector(psi.dim, cls), state.vector)
    if raw.norm() <= TOLERANCE:
        raise PauliExclusionError("Antisymmetrized state vanishes: the two one-particle states are parallel")
    return TwoParticleState(
        kind=TwoParticleKind.IDENTICAL,
        vector=normalize(raw),
        constituents=(psi, phi),
        symmetry=cls,
    )


def map_id_to_dif(state: TwoParticleState, psi: StateVector, phi: StateVector) -> TwoParticleState:
    """Ξ_ID ↦ √2 (P_Ψ⊗P_Φ) Ξ_ID.

    Raises:
        DimensionMismatchError: If Ψ⊗Φ does not live on the space of `state`
        NonOrthogonalError: If |⟨Ψ,Φ⟩| > 1e-12
    """
    if state.kind is not TwoParticleKind.IDENTICAL:
        raise FormalismError("map_id_to_dif expects an Identical two-particle state")
    if psi.dim != phi.dim or psi.dim * phi.dim != state.vector.dim:
        raise DimensionMismatchError(
            f"Constituents of dims {psi.dim}, {phi.dim} do not match a two-particle state of dim {state.vector.dim}"
        )
    overlap = abs(inner(psi, phi))
    if overlap > TOLERANCE:
        raise NonOrthogonalError(f"Inverse map needs orthogonal states, overlap is {overlap:.3e}")
    projector = tensor_op(projector_from_state(psi), projector_from_state(phi))
    vector = StateVector(math.sqrt(2.0) * (projector.entries @ state.vector.amplitudes))
    return TwoParticleState(kind=TwoParticleKind.DIFFERENT, vector=vector, constituents=(psi, phi))


def random_orthogonal_pair(dim: int, rng: np.random.Generator) -> Tuple[StateVector, StateVector]:
    """Ψ and Φ⊥ drawn from one generator; Φ⊥ is Gram-Schmidt orthogonalized against Ψ twice."""
    if dim < 2:
        raise FormalismError("An orthogonal pair needs dim >= 2")
    psi = draw_state(rng, dim)
    phi = draw_state(rng, dim)
    for _ in range(2):
        phi = normalize(phi - psi.scaled(inner(psi, phi)))
    return psi, phi


# -------------------------- Equivalence -------------------------- #

def equivalence_check(
    psi: StateVector,
    phi: StateVector,
    a: Operator,
    b: Operator,
    cls: SymmetryClass,
) -> EquivalenceReport:
    """Compare the identical-particle and different-particle expectations.

    Non-orthogonal pairs still produce a report; `pass_` is judged against the
    second-order bound. The one input without a report is a fermion pair with
    Φ ∝ Ψ, whose antisymmetrized state is the zero vector.

    Raises:
        NonHermitianError: If A or B is not hermitian
        PauliExclusionError: For fermions in parallel states
    """
    _require_hermitian(a, b)
    _require_normalized(psi, phi)

    observable = differentiating_observable(a, psi, b, phi)
    lhs = expectation(observable, xi_id(psi, phi, cls).vector)
    rhs = expectation(tensor_op(a, b), xi_dif(psi, phi).vector)

    deviation = abs(lhs - rhs)
    overlap = abs(inner(psi, phi))
    bound = EXPECTATION_TOLERANCE * (1.0 + abs(rhs))
    if overlap > TOLERANCE:
        bound += overlap**2 * abs(rhs)

    report = EquivalenceReport(
        lhs=lhs,
        rhs=rhs,
        deviation=deviation,
        overlap=overlap,
        lambda_=int(cls),
        bound=bound,
        pass_=deviation <= bound,
    )
    logger.debug("Equivalence λ=%+d overlap=%.3e deviation=%.3e pass=%s",
                 report.lambda_, overlap, deviation, report.pass_)
    return report


def fapp_sweep(
    dim: int,
    overlaps: Sequence[float],
    trials: int,
    spec: RandomSpec,
    cls: SymmetryClass,
) -> FappSweepReport:
    """Measure the equivalence deviation as a function of the pair overlap.

    Trial t draws Ψ, Φ⊥, A, B (unit max-entry scale) from stream `spec.derive(t)`
    and reuses them for every s, with Φ_s = normalize(Φ⊥ + s·Ψ). The slope is
    the least-squares fit of log(max deviation) against log(s).

    Raises:
        DegenerateFitError: Fewer than 3 distinct s values, or a zero deviation
    """
    if trials < 1:
        raise FormalismError("trials must be >= 1")
    values = [float(s) for s in overlaps]
    for s in values:
        if not (0.0 < s <= MAX_SWEEP_OVERLAP):
            raise FormalismError(f"Sweep overlap {s!r} outside (0, {MAX_SWEEP_OVERLAP}]")
    if len(set(values)) < MIN_FIT_POINTS:
        raise DegenerateFitError(f"Need at least {MIN_FIT_POINTS} distinct overlap values, got {len(set(values))}")

    max_deviations = [0.0] * len(values)
    all_within_bound = True
    for t in range(trials):
        rng = spec.derive(t).generator()
        psi, phi_perp = random_orthogonal_pair(dim, rng)
        a = draw_hermitian(rng, dim, unit_scale=True)
        b = draw_hermitian(rng, dim, unit_scale=True)
        for k, s in enumerate(values):
            phi_s = normalize(phi_perp + psi.scaled(s))
            report = equivalence_check(psi, phi_s, a, b, cls)
            max_deviations[k] = max(max_deviations[k], report.deviation)
            all_within_bound = all_within_bound and report.pass_

    if min(max_deviations) <= 0.0:
        raise DegenerateFitError("A zero deviation cannot be placed on a log scale")

    slope, intercept = np.polyfit(np.log(values), np.log(max_deviations), 1)
    logger.info("FAPP sweep dim=%d trials=%d λ=%+d: slope %.4f", dim, trials, int(cls), slope)
    return FappSweepReport(
        dim=dim,
        trials=trials,
        lambda_=int(cls),
        overlaps=values,
        max_deviations=max_deviations,
        slope=float(slope),
        intercept=float(intercept),
        all_within_bound=all_within_bound,
    )


# -------------------------- Energies -------------------------- #

def energy_of_state(h: Operator, psi_k: StateVector) -> float:
    """ε_k = ⟨Ψ_k, H_Ψk Ψ_k⟩."""
    return expectation(state_sensitive(h, psi_k).realized, psi_k)


def state_energies(h: Operator, states: Sequence[StateVector]) -> List[float]:
    return [energy_of_state(h, psi) for psi in states]


def commutes_with_permutator(observable: Operator) -> float:
    """max |[O, Π]| for an operator on ℂ^d ⊗ ℂ^d."""
    d = int(round(math.sqrt(observable.dim)))
    if d * d != observable.dim:
        raise DimensionMismatchError(f"Operator dim {observable.dim} is not a two-particle space")
    return float(np.max(np.abs(commutator(observable, permutator(d)).entries)))


__all__ = [
    "Differentiation", "DifferentiationVerdict", "FamilyVerdict", "StateSensitiveObservable",
    "TwoParticleKind", "TwoParticleState", "EquivalenceReport", "FappSweepReport",
    "PauliExclusionError", "NonOrthogonalError", "DegenerateFitError",
    "classify", "classify_family", "verdict_for_overlap", "state_sensitive", "differentiating_observable",
    "one_particle_observable", "xi_id", "xi_dif", "map_dif_to_id", "map_id_to_dif",
    "random_orthogonal_pair", "equivalence_check", "fapp_sweep",
    "energy_of_state", "state_energies", "commutes_with_permutator",
]
