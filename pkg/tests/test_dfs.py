import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forbidtrans import dfs
from forbidtrans.dfs import (
    GeneratorSet,
    casimir,
    catalan_dimension,
    collective_generators,
    commutant_basis,
    dfs_nullspace,
    subsystem_decomposition,
)
from forbidtrans.errors import DimensionMismatchError, StructureNotFoundError
from forbidtrans.operators import PAULI, SIGMA_X, SIGMA_Z, random_hermitian

HALF_PAULI = [0.5 * PAULI[k] for k in (1, 2, 3)]


def test_generator_set_validation():
    with pytest.raises(ValueError):
        GeneratorSet(())
    with pytest.raises(DimensionMismatchError):
        GeneratorSet((np.eye(2), np.eye(3)))


def test_casimir_examples():
    assert np.allclose(casimir(HALF_PAULI), 0.75 * np.eye(2))
    w = np.linalg.eigvalsh(casimir(collective_generators(2)))
    assert np.allclose(w, [0, 2, 2, 2], atol=1e-12)
    assert np.array_equal(casimir([np.zeros((3, 3))] * 2), np.zeros((3, 3)))


@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 4))
def test_casimir_positive_semidefinite(seed, dim, count):
    rng = np.random.default_rng(seed)
    w = np.linalg.eigvalsh(casimir([random_hermitian(dim, rng) for _ in range(count)]))
    assert w.min() >= -1e-12 * max(w.max(), 1e-300)


def test_two_qubit_singlet():
    basis = dfs_nullspace(collective_generators(2))
    assert basis.dimension == 1
    singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
    assert abs(abs(singlet @ basis.vectors[:, 0]) - 1) < 1e-12


def test_single_qubit_and_odd_counts_have_no_dfs():
    assert dfs_nullspace(HALF_PAULI).dimension == 0
    assert dfs_nullspace(collective_generators(3)).dimension == 0


def test_four_qubits():
    assert dfs_nullspace(collective_generators(4)).dimension == 2


def test_nullspace_certificate():
    gens = collective_generators(6)
    basis = dfs_nullspace(gens)
    c = casimir(gens)
    tol = 1e-9 * np.max(np.abs(np.linalg.eigvalsh(c)))
    for v in basis.vectors.T:
        assert (v.conj() @ c @ v).real < tol
        assert sum(np.linalg.norm(g @ v) ** 2 for g in gens) < tol
    gram = basis.vectors.conj().T @ basis.vectors
    assert np.allclose(gram, np.eye(basis.dimension), atol=1e-10)


def test_interaction_annihilates_dfs():
    gens = collective_generators(4)
    basis = dfs_nullspace(gens)
    rng = np.random.default_rng(0)
    baths = [random_hermitian(3, rng) for _ in gens]
    assert basis.interaction_residual(gens, baths) < 1e-10
    with pytest.raises(ValueError):
        basis.interaction_residual(gens, baths[:2])


def test_nullspace_tolerance_must_be_positive():
    with pytest.raises(ValueError):
        dfs_nullspace(HALF_PAULI, tol=0.0)


def test_collective_examples():
    js = collective_generators(2)
    assert np.allclose(js.generators[2], np.diag([1, 0, 0, -1]))
    with pytest.raises(ValueError):
        collective_generators(1)


@pytest.mark.parametrize("n", range(2, 9))
def test_su2_brackets(n):
    j1, j2, j3 = collective_generators(n)
    for a, b, c in ((j1, j2, j3), (j2, j3, j1), (j3, j1, j2)):
        assert np.max(np.abs(a @ b - b @ a - 1j * c)) < 1e-12


def test_catalan():
    assert [catalan_dimension(n) for n in (1, 2, 3, 4)] == [1, 2, 5, 14]
    for n in (10, 15, 40):
        assert catalan_dimension(n) == math.factorial(2 * n) // (math.factorial(n + 1) * math.factorial(n))
    with pytest.raises(ValueError):
        catalan_dimension(0)


@pytest.mark.parametrize("n_pairs", [1, 2, 3])
def test_catalan_law(n_pairs):
    assert dfs_nullspace(collective_generators(2 * n_pairs)).dimension == catalan_dimension(n_pairs)


def _hs_orthonormal(basis):
    gram = np.array([[np.trace(a.conj().T @ b) for b in basis] for a in basis])
    return np.allclose(gram, np.eye(len(basis)), atol=1e-10)


def test_commutant_of_identity_is_everything():
    basis = commutant_basis([np.eye(3)])
    assert len(basis) == 9
    assert _hs_orthonormal(basis)


def test_commutant_of_nondegenerate_matrix():
    rng = np.random.default_rng(4)
    h = random_hermitian(5, rng)
    basis = commutant_basis([h])
    assert len(basis) == 5
    for x in basis:
        assert np.max(np.abs(x @ h - h @ x)) < 1e-10
        assert np.max(np.abs(x - x.conj().T)) < 1e-12


def test_commutant_of_first_factor_algebra():
    ops = [np.kron(SIGMA_Z, np.eye(2)), np.kron(SIGMA_X, np.eye(2))]
    basis = commutant_basis(ops)
    assert len(basis) == 4
    for x in basis:
        # every element has the form I (x) A
        blocks = x.reshape(2, 2, 2, 2)
        assert np.allclose(blocks[0, :, 1, :], 0, atol=1e-10)
        assert np.allclose(blocks[0, :, 0, :], blocks[1, :, 1, :], atol=1e-10)
    # identity direction is spanned
    coeffs = [np.trace(b.conj().T) for b in basis]
    recon = sum(c * b for c, b in zip(coeffs, basis))
    assert np.allclose(recon, np.eye(4), atol=1e-10)


def test_subsystems_identity():
    dec = subsystem_decomposition([np.eye(4)], seed=1)
    assert dec.census == [(4, 1)]
    assert dec.blocks[0].decoherence_free_subsystem


def test_subsystems_two_qubit_collective():
    gens = collective_generators(2)
    dec = subsystem_decomposition(gens, seed=3)
    assert dec.census == [(1, 3), (1, 1)]
    singlet_block = dec.blocks[1]
    assert singlet_block.decoherence_free_subspace
    dfs_vec = dfs_nullspace(gens).vectors[:, 0]
    assert abs(abs(singlet_block.isometry[:, 0].conj() @ dfs_vec) - 1) < 1e-10


def test_subsystems_single_factor():
    a = np.diag([0.3, -1.1])
    dec = subsystem_decomposition([np.kron(a, np.eye(2))], seed=5)
    assert sorted(dec.census) == [(2, 1), (2, 1)]


@pytest.mark.parametrize("n, census", [
    (2, [(1, 3), (1, 1)]),
    (4, [(1, 5), (3, 3), (2, 1)]),
    (6, [(1, 7), (5, 5), (9, 3), (5, 1)]),
])
def test_su2_multiplet_census(n, census):
    gens = collective_generators(n)
    dec = subsystem_decomposition(gens, seed=11)
    assert dec.census == census
    assert sum(m * d for m, d in dec.census) == 2 ** n
    for s in gens:
        assert np.max(np.abs(dec.reconstruct(s) - s)) < 1e-8
    q = np.hstack([b.isometry for b in dec.blocks])
    assert np.allclose(q.conj().T @ q, np.eye(2 ** n), atol=1e-10)


@given(st.integers(0, 2**32 - 1))
def test_random_block_structure_reconstructs(seed):
    rng = np.random.default_rng(seed)
    # S = A (x) I_2 (+) B on C^4 (x) C^2 (+) C^3: blocks (2, 4) and (1, 3)
    a, b = random_hermitian(4, rng), random_hermitian(3, rng)
    s = np.zeros((11, 11), dtype=complex)
    s[:8, :8] = np.kron(a, np.eye(2)).reshape(4, 2, 4, 2).transpose(1, 0, 3, 2).reshape(8, 8)
    s[8:, 8:] = b
    a2, b2 = random_hermitian(4, rng), random_hermitian(3, rng)
    s2 = np.zeros_like(s)
    s2[:8, :8] = np.kron(np.eye(2), a2)
    s2[8:, 8:] = b2
    dec = subsystem_decomposition([s, s2], seed=seed)
    assert sorted(dec.census) == [(1, 3), (2, 4)]
    for op in (s, s2):
        assert np.max(np.abs(dec.reconstruct(op) - op)) < 1e-8


def test_structure_not_found(monkeypatch):
    monkeypatch.setattr(dfs, "_attempt", lambda *args: None)
    with pytest.raises(StructureNotFoundError):
        subsystem_decomposition([np.eye(2)], seed=0)
