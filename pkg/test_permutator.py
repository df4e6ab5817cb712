import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.Services.hilbert.hilbert_space import (
    Operator,
    RandomSpec,
    StateVector,
    apply,
    max_deviation,
    random_operator,
    random_state,
    tensor_op,
    tensor_state,
    tensor_states,
)
from src.Services.permutation.permutator import (
    InvalidPermutationError,
    NonProjectorError,
    Permutation,
    SymmetryBudgetError,
    SymmetryClass,
    all_permutations,
    antisymmetrizer,
    identical_projector,
    n_antisymmetrizer,
    n_one_particle_observable,
    n_symmetrizer,
    perm_operator,
    permutator,
    pi_eigenvalue,
    subspace_dimension,
    symmetrizer,
    verify_axioms,
)

seeds = st.integers(min_value=0, max_value=2**32)


@pytest.mark.parametrize("dim", [2, 3, 4, 5, 6])
def test_axioms_hold(dim):
    report = verify_axioms(dim, trials=20, spec=RandomSpec(seed=7))
    assert report.pass_
    assert report.max_residual <= 1e-12
    assert report.spectrum_residual <= 1e-10
    plus = sum(1 for e in report.eigenvalues if e > 0)
    assert plus == dim * (dim + 1) // 2
    assert len(report.eigenvalues) - plus == dim * (dim - 1) // 2


@given(seed=seeds, dim=st.integers(min_value=1, max_value=5))
def test_permutator_swaps_factors(seed, dim):
    spec = RandomSpec(seed=seed)
    psi, phi = random_state(dim, spec.derive(0)), random_state(dim, spec.derive(1))
    swapped = apply(permutator(dim), tensor_state(psi, phi))
    assert max_deviation(swapped, tensor_state(phi, psi)) <= 1e-15


@given(seed=seeds, dim=st.integers(min_value=1, max_value=5))
def test_conjugation_swaps_operator_factors(seed, dim):
    spec = RandomSpec(seed=seed)
    a, b = random_operator(dim, spec.derive(0)), random_operator(dim, spec.derive(1))
    pi = permutator(dim).entries
    lhs = pi.conj().T @ tensor_op(a, b).entries @ pi
    assert max_deviation(lhs, tensor_op(b, a)) <= 1e-12


@pytest.mark.parametrize("dim", [1, 2, 3, 4])
def test_projector_ranks(dim):
    assert subspace_dimension(symmetrizer(dim)) == math.comb(dim + 1, 2)
    assert subspace_dimension(antisymmetrizer(dim)) == math.comb(dim, 2)
    assert max_deviation(symmetrizer(dim).entries + antisymmetrizer(dim).entries, np.eye(dim * dim)) <= 1e-12


def test_identical_projector_selects_by_class():
    assert identical_projector(3, SymmetryClass.BOSON) is symmetrizer(3)
    assert identical_projector(3, SymmetryClass.FERMION) is antisymmetrizer(3)


def test_symmetry_class_labels():
    assert SymmetryClass.from_label("Fermi") is SymmetryClass.FERMION
    assert SymmetryClass.from_label("boson") is SymmetryClass.BOSON
    assert SymmetryClass.FERMION.label == "fermi"
    with pytest.raises(ValueError):
        SymmetryClass.from_label("anyon")


def test_permutation_algebra():
    sigma = Permutation((1, 2, 0))
    tau = Permutation.transposition(3, 0, 1)
    assert sigma.compose(sigma.inverse()) == Permutation.identity(3)
    # tau acts first: 0 -> 1 -> 2
    assert sigma.compose(tau)(0) == 2
    assert sigma.sign() == 1 and tau.sign() == -1
    assert sum(p.sign() for p in all_permutations(4)) == 0
    with pytest.raises(InvalidPermutationError):
        Permutation((0, 0, 1))


def test_perm_operator_moves_factor_k_to_slot_sigma_k():
    d = 3
    vectors = [StateVector.basis(d, k) for k in (0, 1, 2)]
    sigma = Permutation((2, 0, 1))
    moved = apply(perm_operator(d, sigma), tensor_states(vectors))
    # factor k lands in slot sigma(k): slots now hold e1, e2, e0
    expected = tensor_states([vectors[1], vectors[2], vectors[0]])
    assert max_deviation(moved, expected) == 0.0


def test_perm_operator_is_a_representation():
    d = 2
    sigma, tau = Permutation((1, 2, 0)), Permutation((0, 2, 1))
    product = perm_operator(d, sigma).entries @ perm_operator(d, tau).entries
    assert max_deviation(product, perm_operator(d, sigma.compose(tau))) == 0.0


@pytest.mark.parametrize("d,n", [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4), (4, 3), (4, 4)])
def test_n_particle_projector_traces(d, n):
    assert subspace_dimension(n_symmetrizer(d, n)) == math.comb(d + n - 1, n)
    assert subspace_dimension(n_antisymmetrizer(d, n)) == math.comb(d, n)


def test_n_particle_projectors_are_orthogonal():
    s, a = n_symmetrizer(3, 3).entries, n_antisymmetrizer(3, 3).entries
    assert max_deviation(s @ a, np.zeros_like(s)) <= 1e-12


def test_two_particle_symmetrizer_matches_n_particle_build():
    assert max_deviation(n_symmetrizer(3, 2), symmetrizer(3)) <= 1e-15
    assert max_deviation(n_antisymmetrizer(3, 2), antisymmetrizer(3)) <= 1e-15


def test_symmetrizer_budget():
    with pytest.raises(SymmetryBudgetError):
        n_symmetrizer(2, 7)
    with pytest.raises(SymmetryBudgetError):
        n_symmetrizer(6, 5)


def test_n_one_particle_observable_commutes_with_permutations():
    a = np.diag([0.0, 1.0, 2.0]).astype(complex)
    total = n_one_particle_observable(Operator(a, hermitian=True), 3)
    assert total.hermitian
    for sigma in all_permutations(3):
        p = perm_operator(3, sigma).entries
        assert max_deviation(p @ total.entries, total.entries @ p) <= 1e-12


def test_pi_eigenvalue_of_symmetric_and_antisymmetric_states():
    up, down = StateVector.basis(2, 0), StateVector.basis(2, 1)
    sym = tensor_state(up, down) + tensor_state(down, up)
    anti = tensor_state(up, down) - tensor_state(down, up)
    assert pi_eigenvalue(2, sym) == pytest.approx(1.0, abs=1e-12)
    assert pi_eigenvalue(2, anti) == pytest.approx(-1.0, abs=1e-12)


def test_subspace_dimension_needs_projector():
    with pytest.raises(NonProjectorError):
        subspace_dimension(permutator(2))
