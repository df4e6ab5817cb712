"""Finite-dimensional complex Hilbert space substrate.

State vectors, operators, tensor products, scalar products, rank-1 projectors and
seeded random generation for one- and many-particle spaces.

Conventions (fixed repo-wide):
    - Tensor index: component (i, j) of u ⊗ v is stored at flat index i·b + j
      (row-major), so `tensor_op` is `numpy.kron` and (A⊗B)(u⊗v) = Au ⊗ Bv.
    - The scalar product ⟨u, v⟩ is conjugate-linear in the first argument.
    - Dense complex128 arithmetic; operator identities are checked to an
      absolute tolerance of 1e-12, expectation values to 1e-10.

Example:
    from src.Services.hilbert.hilbert_space import StateVector, inner, tensor_state

    e0, e1 = StateVector.basis(2, 0), StateVector.basis(2, 1)
    print(inner(e0, e1))                       # 0j
    print(tensor_state(e1, e0).amplitudes)     # e2 of dim 4
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

TOLERANCE = 1e-12
EXPECTATION_TOLERANCE = 1e-10
MAX_ONE_PARTICLE_DIM = 12
MAX_TOTAL_DIM = 20736  # 12**4
MAX_SEED = 2**64 - 1


class FormalismError(ValueError):
    """Base exception for violated preconditions of the formalism"""
    pass


class DimensionMismatchError(FormalismError):
    """Custom exception for operands living on spaces of different dimension"""
    pass


class DimensionCapError(FormalismError):
    """Custom exception for spaces larger than the dense-matrix caps"""
    pass


class NormalizationError(FormalismError):
    """Custom exception for vectors that must be (or cannot be made) unit norm"""
    pass


class OperatorFlagError(FormalismError):
    """Custom exception for hermitian/projector flags that the matrix does not satisfy"""
    pass


class NonHermitianError(FormalismError):
    """Custom exception for observables that are not hermitian"""
    pass


class ComplexExpectationError(FormalismError):
    """Custom exception for expectation values with a non-negligible imaginary part"""
    pass


# -------------------------- Dimension guards -------------------------- #

def check_dimension_cap(total_dim: int) -> None:
    """Raise DimensionCapError when a space exceeds the dense cap."""
    if total_dim > MAX_TOTAL_DIM:
        raise DimensionCapError(
            f"Total dimension {total_dim} exceeds the dense cap of {MAX_TOTAL_DIM}"
        )


def check_one_particle_dim(dim: int) -> None:
    """Raise when a one-particle dimension is outside 1..MAX_ONE_PARTICLE_DIM."""
    if dim < 1:
        raise FormalismError(f"One-particle dimension must be >= 1, got {dim}")
    if dim > MAX_ONE_PARTICLE_DIM:
        raise DimensionCapError(
            f"One-particle dimension {dim} exceeds the cap of {MAX_ONE_PARTICLE_DIM}"
        )


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _is_hermitian(matrix: np.ndarray, tol: float = TOLERANCE) -> bool:
    return bool(np.max(np.abs(matrix - matrix.conj().T), initial=0.0) <= tol)


# -------------------------- Domain types -------------------------- #

@dataclass(frozen=True, eq=False)
class StateVector:
    """Complex amplitude vector of a one- or many-particle space.

    The amplitudes are copied to a read-only complex128 array on construction.
    Normalization is not enforced here; operations that need a unit vector
    check it themselves.
    """
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        data = np.array(self.amplitudes, dtype=np.complex128)
        if data.ndim != 1 or data.size < 1:
            raise FormalismError(f"StateVector needs a non-empty 1-D amplitude array, got shape {data.shape}")
        check_dimension_cap(data.size)
        object.__setattr__(self, "amplitudes", _readonly(data))

    @property
    def dim(self) -> int:
        return int(self.amplitudes.size)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = TOLERANCE) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def scaled(self, factor: complex) -> "StateVector":
        return StateVector(factor * self.amplitudes)

    def __add__(self, other: "StateVector") -> "StateVector":
        _require_same_dim(self.dim, other.dim, "vector addition")
        return StateVector(self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _require_same_dim(self.dim, other.dim, "vector subtraction")
        return StateVector(self.amplitudes - other.amplitudes)

    @classmethod
    def basis(cls, dim: int, index: int) -> "StateVector":
        """Unit basis vector e_index of the given dimension."""
        if not (0 <= index < dim):
            raise FormalismError(f"Basis index {index} out of range for dim {dim}")
        data = np.zeros(dim, dtype=np.complex128)
        data[index] = 1.0
        return cls(data)

    def __repr__(self) -> str:
        return f"<StateVector(dim={self.dim}, norm={self.norm():.3g})>"


@dataclass(frozen=True, eq=False)
class Operator:
    """Square complex matrix acting on a finite-dimensional space.

    Flags are verified on construction:
        hermitian  -> max |M - M†| <= 1e-12
        projector  -> hermitian and max |M² - M| <= 1e-12
    """
    entries: np.ndarray
    hermitian: bool = False
    projector: bool = False

    def __post_init__(self) -> None:
        data = np.array(self.entries, dtype=np.complex128)
        if data.ndim != 2 or data.shape[0] != data.shape[1] or data.shape[0] < 1:
            raise FormalismError(f"Operator needs a non-empty square matrix, got shape {data.shape}")
        check_dimension_cap(data.shape[0])
        if self.projector and not self.hermitian:
            raise OperatorFlagError("A projector must also be flagged hermitian")
        if self.hermitian and not _is_hermitian(data):
            raise OperatorFlagError("Matrix flagged hermitian deviates from its adjoint by more than 1e-12")
        if self.projector:
            residual = float(np.max(np.abs(data @ data - data)))
            if residual > TOLERANCE:
                raise OperatorFlagError(f"Matrix flagged projector is not idempotent (residual {residual:.3e})")
        object.__setattr__(self, "entries", _readonly(data))

    @classmethod
    def from_matrix(cls, entries: Union[np.ndarray, Sequence[Sequence[complex]]], projector: bool = False) -> "Operator":
        """Wrap a matrix, setting the hermitian flag when the matrix is hermitian."""
        data = np.array(entries, dtype=np.complex128)
        hermitian = data.ndim == 2 and data.shape[0] == data.shape[1] and _is_hermitian(data)
        return cls(data, hermitian=hermitian, projector=projector)

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def dagger(self) -> "Operator":
        return Operator(self.entries.conj().T, hermitian=self.hermitian, projector=self.projector)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def scaled(self, factor: complex) -> "Operator":
        return Operator.from_matrix(factor * self.entries)

    def __add__(self, other: "Operator") -> "Operator":
        _require_same_dim(self.dim, other.dim, "operator addition")
        return Operator.from_matrix(self.entries + other.entries)

    def __sub__(self, other: "Operator") -> "Operator":
        _require_same_dim(self.dim, other.dim, "operator subtraction")
        return Operator.from_matrix(self.entries - other.entries)

    def __matmul__(self, other: Union["Operator", StateVector]) -> Union["Operator", StateVector]:
        if isinstance(other, StateVector):
            return apply(self, other)
        _require_same_dim(self.dim, other.dim, "operator product")
        return Operator(self.entries @ other.entries)

    def __repr__(self) -> str:
        return f"<Operator(dim={self.dim}, hermitian={self.hermitian}, projector={self.projector})>"


@dataclass(frozen=True)
class RandomSpec:
    """Seed plus stream index; identical pairs reproduce identical draws.

    Generators are `numpy.random.default_rng([seed, stream_index])` (PCG64 seeded
    through a SeedSequence), so the stream is a pure function of the pair.
    """
    seed: int = 0
    stream_index: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.seed <= MAX_SEED):
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream_index < 0:
            raise ValueError("stream_index must be non-negative")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.stream_index])

    def derive(self, offset: int) -> "RandomSpec":
        """Spec for the stream `offset` positions after this one (per-trial streams)."""
        return RandomSpec(seed=self.seed, stream_index=self.stream_index + offset)


Tensorable = Union[StateVector, Operator, np.ndarray]


def _require_same_dim(a: int, b: int, context: str) -> None:
    if a != b:
        raise DimensionMismatchError(f"Dimension mismatch in {context}: {a} vs {b}")


def _as_array(value: Tensorable) -> np.ndarray:
    if isinstance(value, StateVector):
        return value.amplitudes
    if isinstance(value, Operator):
        return value.entries
    return np.asarray(value)


def max_deviation(a: Tensorable, b: Tensorable) -> float:
    """Largest absolute entry of a − b (vectors, operators or raw arrays)."""
    left, right = _as_array(a), _as_array(b)
    if left.shape != right.shape:
        raise DimensionMismatchError(f"Cannot compare shapes {left.shape} and {right.shape}")
    return float(np.max(np.abs(left - right), initial=0.0))


# -------------------------- Core operations -------------------------- #

def identity(dim: int) -> Operator:
    return Operator(np.eye(dim, dtype=np.complex128), hermitian=True, projector=True)


def inner(u: StateVector, v: StateVector) -> complex:
    """Scalar product ⟨u, v⟩, conjugate-linear in the first argument.

    Raises:
        DimensionMismatchError: If u and v have different dimensions
    """
    _require_same_dim(u.dim, v.dim, "inner product")
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def normalize(v: StateVector) -> StateVector:
    """Return v / ‖v‖.

    Raises:
        NormalizationError: If v is (numerically) the zero vector
    """
    norm = v.norm()
    if norm <= TOLERANCE:
        raise NormalizationError("Cannot normalize a zero vector")
    return StateVector(v.amplitudes / norm)


def tensor_state(u: StateVector, v: StateVector) -> StateVector:
    """u ⊗ v with component (i, j) at flat index i·v.dim + j."""
    check_dimension_cap(u.dim * v.dim)
    return StateVector(np.kron(u.amplitudes, v.amplitudes))


def tensor_states(vectors: Sequence[StateVector]) -> StateVector:
    """v₁ ⊗ v₂ ⊗ … ⊗ v_n, slot k holding vectors[k]."""
    if not vectors:
        raise FormalismError("tensor_states needs at least one vector")
    return reduce(tensor_state, vectors)


def tensor_op(a: Operator, b: Operator) -> Operator:
    """Kronecker product A ⊗ B, consistent with `tensor_state`."""
    check_dimension_cap(a.dim * b.dim)
    return Operator(
        np.kron(a.entries, b.entries),
        hermitian=a.hermitian and b.hermitian,
        projector=a.projector and b.projector,
    )


def tensor_ops(operators: Sequence[Operator]) -> Operator:
    if not operators:
        raise FormalismError("tensor_ops needs at least one operator")
    return reduce(tensor_op, operators)


def apply(a: Operator, v: StateVector) -> StateVector:
    _require_same_dim(a.dim, v.dim, "operator application")
    return StateVector(a.entries @ v.amplitudes)


def projector_from_state(psi: StateVector) -> Operator:
    """Rank-1 projector P_Ψ = Ψ⟨Ψ, ·⟩.

    Raises:
        NormalizationError: If ‖Ψ‖ differs from 1 by more than 1e-12
    """
    if not psi.is_normalized():
        raise NormalizationError(f"Projector needs a unit vector, got norm {psi.norm():.15g}")
    unit = psi.amplitudes / psi.norm()
    outer = np.outer(unit, unit.conj())
    # Exact hermiticity; the outer product is hermitian up to rounding only
    outer = 0.5 * (outer + outer.conj().T)
    return Operator(outer, hermitian=True, projector=True)


def commutator(a: Operator, b: Operator) -> Operator:
    """[A, B] = AB − BA."""
    _require_same_dim(a.dim, b.dim, "commutator")
    return Operator(a.entries @ b.entries - b.entries @ a.entries)


def is_hermitian(a: Operator) -> bool:
    return a.hermitian or _is_hermitian(a.entries)


def expectation(a: Operator, psi: StateVector) -> float:
    """Real expectation value ⟨Ψ, AΨ⟩ of a hermitian operator.

    Raises:
        NonHermitianError: If A is not hermitian
        ComplexExpectationError: If the imaginary part exceeds 1e-10
    """
    if not is_hermitian(a):
        raise NonHermitianError("Expectation values are only defined here for hermitian operators")
    _require_same_dim(a.dim, psi.dim, "expectation")
    value = complex(np.vdot(psi.amplitudes, a.entries @ psi.amplitudes))
    if abs(value.imag) > EXPECTATION_TOLERANCE:
        raise ComplexExpectationError(f"Expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


# -------------------------- Random generation -------------------------- #

def draw_state(rng: np.random.Generator, dim: int) -> StateVector:
    """Standard complex normal amplitudes, normalized."""
    amplitudes = (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) / np.sqrt(2.0)
    return normalize(StateVector(amplitudes))


def draw_operator(rng: np.random.Generator, dim: int) -> Operator:
    """General (non-hermitian) complex matrix with standard complex normal entries."""
    entries = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    return Operator(entries)


def draw_hermitian(rng: np.random.Generator, dim: int, unit_scale: bool = False) -> Operator:
    """(M + M†)/2 for a complex normal M; with unit_scale, rescaled to max |entry| = 1."""
    raw = draw_operator(rng, dim).entries
    entries = 0.5 * (raw + raw.conj().T)
    if unit_scale:
        entries = entries / np.max(np.abs(entries))
    return Operator(entries, hermitian=True)


def random_state(dim: int, spec: RandomSpec) -> StateVector:
    return draw_state(spec.generator(), dim)


def random_hermitian(dim: int, spec: RandomSpec, unit_scale: bool = False) -> Operator:
    return draw_hermitian(spec.generator(), dim, unit_scale=unit_scale)


def random_operator(dim: int, spec: RandomSpec) -> Operator:
    return draw_operator(spec.generator(), dim)


__all__ = [
    "TOLERANCE", "EXPECTATION_TOLERANCE", "MAX_ONE_PARTICLE_DIM", "MAX_TOTAL_DIM",
    "FormalismError", "DimensionMismatchError", "DimensionCapError", "NormalizationError",
    "OperatorFlagError", "NonHermitianError", "ComplexExpectationError",
    "StateVector", "Operator", "RandomSpec",
    "check_dimension_cap", "check_one_particle_dim", "max_deviation", "identity",
    "inner", "normalize", "tensor_state", "tensor_states", "tensor_op", "tensor_ops",
    "apply", "projector_from_state", "commutator", "is_hermitian", "expectation",
    "draw_state", "draw_operator", "draw_hermitian",
    "random_state", "random_hermitian", "random_operator",
]
