"""Permutation operators and symmetry projectors.

The two-particle permutator Π, its N-particle generalization P_σ, the
symmetrizer / antisymmetrizer / identical-particle projectors and an
axiom verifier for their algebra.

Composition convention:
    A Permutation σ of n slots is stored as `mapping`, with σ(k) = mapping[k].
    P_σ places the k-th tensor factor in slot σ(k):

        P_σ (v₀ ⊗ … ⊗ v_{n-1}) has v_k in slot σ(k)

    and `sigma.compose(tau)` is σ∘τ, (σ∘τ)(k) = σ(τ(k)), i.e. τ acts first.
    With this convention P_σ P_τ = P_{σ∘τ}.

Example:
    from src.Services.permutation.permutator import permutator, symmetrizer, subspace_dimension

    pi = permutator(2)
    print(subspace_dimension(symmetrizer(2)))   # 3
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import Dict, List, Tuple

import numpy as np

from src.Services.hilbert.hilbert_space import (
    TOLERANCE,
    FormalismError,
    Operator,
    RandomSpec,
    StateVector,
    check_dimension_cap,
    check_one_particle_dim,
    draw_operator,
    expectation,
    identity,
    normalize,
    tensor_op,
    tensor_ops,
)

logger = logging.getLogger(__name__)

SPECTRUM_TOLERANCE = 1e-10
MAX_SYMMETRIZED_PARTICLES = 6
# n! · (dⁿ)² upper bound on the explicit permutation sum
SYMMETRIZER_BUDGET = 500_000_000


class InvalidPermutationError(FormalismError):
    """Custom exception for mappings that are not bijections of {0..n-1}"""
    pass


class SymmetryBudgetError(FormalismError):
    """Custom exception for n-particle projectors beyond the compute budget"""
    pass


class NonProjectorError(FormalismError):
    """Custom exception for subspace queries on operators that are not projectors"""
    pass


class SymmetryClass(IntEnum):
    """λ of the identical-particle projector: +1 bosons, −1 fermions."""
    BOSON = 1
    FERMION = -1

    @property
    def label(self) -> str:
        return "bose" if self is SymmetryClass.BOSON else "fermi"

    @classmethod
    def from_label(cls, label: str) -> "SymmetryClass":
        lookup = {"bose": cls.BOSON, "boson": cls.BOSON, "fermi": cls.FERMION, "fermion": cls.FERMION}
        try:
            return lookup[label.strip().lower()]
        except KeyError:
            raise FormalismError(f"Unknown statistics '{label}'. Supported: bose, fermi")


@dataclass(frozen=True)
class Permutation:
    """Bijection of {0..n-1}; σ(k) = mapping[k]."""
    mapping: Tuple[int, ...]

    def __post_init__(self) -> None:
        mapping = tuple(int(k) for k in self.mapping)
        if not mapping or sorted(mapping) != list(range(len(mapping))):
            raise InvalidPermutationError(f"Not a permutation of 0..n-1: {mapping}")
        object.__setattr__(self, "mapping", mapping)

    @property
    def n(self) -> int:
        return len(self.mapping)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        mapping = list(range(n))
        mapping[i], mapping[j] = mapping[j], mapping[i]
        return cls(tuple(mapping))

    def __call__(self, k: int) -> int:
        return self.mapping[k]

    def compose(self, other: "Permutation") -> "Permutation":
        """self ∘ other: `other` acts first."""
        if other.n != self.n:
            raise InvalidPermutationError(f"Cannot compose permutations of {self.n} and {other.n} slots")
        return Permutation(tuple(self.mapping[other.mapping[k]] for k in range(self.n)))

    def inverse(self) -> "Permutation":
        inverse = [0] * self.n
        for k, target in enumerate(self.mapping):
            inverse[target] = k
        return Permutation(tuple(inverse))

    def inversions(self) -> int:
        return sum(
            1
            for i in range(self.n)
            for j in range(i + 1, self.n)
            if self.mapping[i] > self.mapping[j]
        )

    def sign(self) -> int:
        """Parity (−1)^(inversions)."""
        return -1 if self.inversions() % 2 else 1


def all_permutations(n: int) -> List[Permutation]:
    return [Permutation(p) for p in itertools.permutations(range(n))]


@dataclass
class AxiomReport:
    """Residuals of the permutator/projector identities for one-particle dim `dim`.

    pass_ ⇔ every residual ≤ 1e-12 and every Π eigenvalue is within 1e-10 of ±1.
    """
    dim: int
    trials: int
    residuals: Dict[str, float]
    eigenvalues: List[float]
    spectrum_residual: float
    pass_: bool = field(default=False)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())


# -------------------------- Index helpers -------------------------- #

def _source_indices(d: int, sigma: Permutation) -> np.ndarray:
    """src such that (P_σ v)[r] = v[src[r]] on the flat dⁿ index."""
    n = sigma.n
    grid = np.arange(d**n).reshape((d,) * n)
    return np.moveaxis(grid, list(range(n)), list(sigma.mapping)).reshape(-1)


def _check_space(d: int, n: int) -> int:
    check_one_particle_dim(d)
    if n < 1:
        raise FormalismError(f"Number of particles must be >= 1, got {n}")
    total = d**n
    check_dimension_cap(total)
    return total


# -------------------------- Operators -------------------------- #

@lru_cache(maxsize=64)
def _perm_operator_cached(d: int, mapping: Tuple[int, ...]) -> Operator:
    sigma = Permutation(mapping)
    total = _check_space(d, sigma.n)
    entries = np.zeros((total, total), dtype=np.complex128)
    entries[np.arange(total), _source_indices(d, sigma)] = 1.0
    return Operator(entries, hermitian=sigma.compose(sigma) == Permutation.identity(sigma.n))


def perm_operator(d: int, sigma: Permutation) -> Operator:
    """P_σ on (ℂ^d)^{⊗n}: the k-th factor is moved to slot σ(k).

    Raises:
        DimensionCapError: If dⁿ exceeds the dense cap
    """
    return _perm_operator_cached(d, sigma.mapping)


def permutator(d: int) -> Operator:
    """Π on ℂ^d ⊗ ℂ^d, Π(Ψ⊗Φ) = Φ⊗Ψ."""
    return perm_operator(d, Permutation.transposition(2, 0, 1))


@lru_cache(maxsize=64)
def identical_projector(d: int, cls: SymmetryClass) -> Operator:
    """I = ½(1 + λΠ); the symmetrizer for bosons, antisymmetrizer for fermions."""
    pi = permutator(d).entries
    entries = 0.5 * (np.eye(d * d, dtype=np.complex128) + int(cls) * pi)
    return Operator(entries, hermitian=True, projector=True)


def symmetrizer(d: int) -> Operator:
    return identical_projector(d, SymmetryClass.BOSON)


def antisymmetrizer(d: int) -> Operator:
    return identical_projector(d, SymmetryClass.FERMION)


def _n_projector(d: int, n: int, signed: bool) -> Operator:
    if n > MAX_SYMMETRIZED_PARTICLES:
        raise SymmetryBudgetError(f"n = {n} exceeds the limit of {MAX_SYMMETRIZED_PARTICLES} particles")
    total = _check_space(d, n)
    terms = math.factorial(n)
    if terms * total * total > SYMMETRIZER_BUDGET:
        raise SymmetryBudgetError(
            f"n!·(dⁿ)² = {terms * total * total} exceeds the budget of {SYMMETRIZER_BUDGET}"
        )

    accumulator = np.zeros((total, total), dtype=np.complex128)
    rows = np.arange(total)
    for sigma in all_permutations(n):
        weight = (sigma.sign() if signed else 1) / terms
        np.add.at(accumulator, (rows, _source_indices(d, sigma)), weight)

    logger.debug("Built %s projector for d=%d n=%d from %d permutations",
                 "antisymmetric" if signed else "symmetric", d, n, terms)
    return Operator(accumulator, hermitian=True, projector=True)


def n_symmetrizer(d: int, n: int) -> Operator:
    """(1/n!) Σ_σ P_σ, summed explicitly over all n! permutations."""
    return _n_projector(d, n, signed=False)


def n_antisymmetrizer(d: int, n: int) -> Operator:
    """(1/n!) Σ_σ sgn(σ) P_σ, summed explicitly over all n! permutations."""
    return _n_projector(d, n, signed=True)


def n_one_particle_observable(a: Operator, n: int) -> Operator:
    """Σ_k 1 ⊗ … ⊗ A (slot k) ⊗ … ⊗ 1, the n-particle one-body observable."""
    _check_space(a.dim, n)
    one = identity(a.dim)
    total = None
    for slot in range(n):
        term = tensor_ops([a if k == slot else one for k in range(n)])
        total = term if total is None else total + term
    return total


def subspace_dimension(projector: Operator) -> int:
    """Dimension of the range of a projector, read off its trace.

    Raises:
        NonProjectorError: If the operator is not flagged as a projector or its trace is not an integer
    """
    if not projector.projector:
        raise NonProjectorError("subspace_dimension needs an operator flagged as projector")
    trace = projector.trace().real
    rounded = int(round(trace))
    if abs(trace - rounded) > 1e-8:
        raise NonProjectorError(f"Projector trace {trace!r} is not an integer")
    return rounded


# -------------------------- Axiom verification -------------------------- #

def verify_axioms(d: int, trials: int, spec: RandomSpec) -> AxiomReport:
    """Check Π² = 1, Π = Π†, Π†Π = 1, Π†(A⊗B)Π = B⊗A and the S/A projector algebra.

    The conjugation identity is checked on `trials` random (non-hermitian)
    operator pairs; trial t draws A then B from stream `spec.derive(t)`.
    """
    check_one_particle_dim(d)
    pi = permutator(d).entries
    pi_dag = pi.conj().T
    one = np.eye(d * d)
    sym = symmetrizer(d).entries
    anti = antisymmetrizer(d).entries

    def residual(matrix: np.ndarray) -> float:
        return float(np.max(np.abs(matrix), initial=0.0))

    conjugation = 0.0
    for t in range(trials):
        rng = spec.derive(t).generator()
        a = draw_operator(rng, d)
        b = draw_operator(rng, d)
        lhs = pi_dag @ tensor_op(a, b).entries @ pi
        conjugation = max(conjugation, residual(lhs - tensor_op(b, a).entries))

    residuals = {
        "pi_squared": residual(pi @ pi - one),
        "hermiticity": residual(pi - pi_dag),
        "unitarity": residual(pi_dag @ pi - one),
        "conjugation": conjugation,
        "projector_sum": residual(sym + anti - one),
        "projector_product": residual(sym @ anti),
        "idempotence_S": residual(sym @ sym - sym),
        "idempotence_A": residual(anti @ anti - anti),
    }

    eigenvalues = np.linalg.eigvalsh(pi)
    spectrum_residual = float(np.max(np.minimum(np.abs(eigenvalues - 1.0), np.abs(eigenvalues + 1.0))))

    passed = all(value <= TOLERANCE for value in residuals.values()) and spectrum_residual <= SPECTRUM_TOLERANCE
    report = AxiomReport(
        dim=d,
        trials=trials,
        residuals=residuals,
        eigenvalues=[float(x) for x in eigenvalues],
        spectrum_residual=spectrum_residual,
        pass_=passed,
    )
    logger.info("Axiom check d=%d trials=%d: max residual %.3e, pass=%s", d, trials, report.max_residual, passed)
    return report


def pi_eigenvalue(d: int, chi: StateVector) -> float:
    """λ with Πχ = λχ for a Π-eigenvector χ (read off ⟨χ, Πχ⟩)."""
    return expectation(permutator(d), normalize(chi))


__all__ = [
    "SymmetryClass", "Permutation", "AxiomReport",
    "InvalidPermutationError", "SymmetryBudgetError", "NonProjectorError",
    "all_permutations", "perm_operator", "permutator",
    "symmetrizer", "antisymmetrizer", "identical_projector",
    "n_symmetrizer", "n_antisymmetrizer", "n_one_particle_observable",
    "subspace_dimension", "verify_axioms", "pi_eigenvalue",
]
