"""Internal degrees of freedom as differentiators, and the singlet."""
from __future__ import annotations

import logging
from dataclasses import dataclass

from src.Services.hilbert.hilbert_space import StateVector, inner, normalize, tensor_state
from src.Services.observables.differentiation import (
    DEFAULT_FAPP_THRESHOLD,
    Differentiation,
    TwoParticleState,
    verdict_for_overlap,
    xi_id,
)
from src.Services.permutation.permutator import SymmetryClass

logger = logging.getLogger(__name__)

SPIN_UP = StateVector.basis(2, 0)
SPIN_DOWN = StateVector.basis(2, 1)


@dataclass
class SpinOverlapReport:
    """⟨Ψ⊗χ, Φ⊗ξ⟩ = ⟨Ψ,Φ⟩·⟨χ,ξ⟩ for position factors Ψ, Φ and internal factors χ, ξ."""
    overlap: complex
    magnitude: float
    spatial_overlap: float
    internal_overlap: float
    verdict: Differentiation


def spin_differentiating(
    psi: StateVector,
    phi: StateVector,
    chi: StateVector = SPIN_UP,
    xi: StateVector = SPIN_DOWN,
    threshold: float = DEFAULT_FAPP_THRESHOLD,
) -> SpinOverlapReport:
    """Overlap of Ψ⊗χ with Φ⊗ξ.

    With orthogonal internal states (spin up/down, crossed polarizations) the
    verdict is Exact whatever the spatial overlap is.
    """
    left = tensor_state(normalize(psi), normalize(chi))
    right = tensor_state(normalize(phi), normalize(xi))
    overlap = inner(left, right)
    return SpinOverlapReport(
        overlap=overlap,
        magnitude=abs(overlap),
        spatial_overlap=abs(inner(normalize(psi), normalize(phi))),
        internal_overlap=abs(inner(normalize(chi), normalize(xi))),
        verdict=verdict_for_overlap(abs(overlap), threshold).verdict,
    )


def singlet() -> TwoParticleState:
    """(φ₊⊗φ₋ − φ₋⊗φ₊)/√2, a Π-eigenvector with eigenvalue −1."""
    return xi_id(SPIN_UP, SPIN_DOWN, SymmetryClass.FERMION)


__all__ = ["SPIN_UP", "SPIN_DOWN", "SpinOverlapReport", "spin_differentiating", "singlet"]
