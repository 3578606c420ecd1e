import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from forbidtrans.errors import DimensionMismatchError, InvalidOperatorError
from forbidtrans.operators import (
    SIGMA_X,
    SIGMA_Z,
    PhysicalConstants,
    as_hermitian,
    embed,
    expm_unitary,
    fock_operators,
    is_hermitian,
    pauli_on_site,
    random_hermitian,
    spectral_decompose,
    symmetrize,
    tensor,
    unitarity_defect,
)

seeds = st.integers(0, 2**32 - 1)
dims = st.integers(1, 24)


def test_identity_spectrum():
    dec = spectral_decompose(np.eye(3))
    assert np.allclose(dec.eigenvalues, 1)
    assert np.allclose(dec.eigenvectors.conj().T @ dec.eigenvectors, np.eye(3), atol=1e-12)


def test_sigma_x_spectrum():
    dec = spectral_decompose(SIGMA_X)
    assert np.allclose(dec.eigenvalues, [-1, 1])
    minus = np.array([1, -1]) / math.sqrt(2)
    plus = np.array([1, 1]) / math.sqrt(2)
    assert abs(abs(minus @ dec.eigenvectors[:, 0]) - 1) < 1e-12
    assert abs(abs(plus @ dec.eigenvectors[:, 1]) - 1) < 1e-12


def test_non_hermitian_rejected():
    with pytest.raises(InvalidOperatorError):
        spectral_decompose(np.array([[0, 1], [0, 0]]))
    with pytest.raises(InvalidOperatorError):
        expm_unitary(np.array([[0, 1], [2, 0]]), 1.0)
    with pytest.raises(InvalidOperatorError):
        as_hermitian(np.zeros((2, 3)))


def test_expm_examples():
    assert np.allclose(expm_unitary(np.zeros((3, 3)), 2.5), np.eye(3))
    u = expm_unitary(SIGMA_Z, math.pi)
    assert np.allclose(u, np.diag([-1, -1]), atol=1e-12)
    u = expm_unitary(SIGMA_Z, math.pi / 2)
    assert np.allclose(u, np.diag([-1j, 1j]), atol=1e-12)


def test_expm_respects_hbar():
    h = np.diag([1.0, -2.0])
    u1 = expm_unitary(h, 0.3, PhysicalConstants(2.0))
    u2 = expm_unitary(h, 0.15)
    assert np.allclose(u1, u2, atol=1e-14)
    with pytest.raises(ValueError):
        PhysicalConstants(0.0)


def test_tensor_examples():
    assert np.array_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(tensor(SIGMA_Z, np.eye(2)).real, np.diag([1, 1, -1, -1]))
    ket00 = np.array([1, 0, 0, 0])
    assert np.array_equal(tensor(SIGMA_X, SIGMA_X) @ ket00, np.array([0, 0, 0, 1]))


def test_pauli_on_site_examples():
    assert np.array_equal(pauli_on_site(3, 1, 1), SIGMA_Z)
    assert np.array_equal(pauli_on_site(1, 2, 2), np.kron(np.eye(2), SIGMA_X))
    ket010 = np.zeros(8)
    ket010[0b010] = 1
    assert np.array_equal(pauli_on_site(3, 2, 3) @ ket010, -ket010)
    with pytest.raises(IndexError):
        pauli_on_site(3, 4, 3)
    with pytest.raises(IndexError):
        pauli_on_site(4, 1, 1)


def test_pauli_sites_commute_exactly():
    for k in (1, 2, 3):
        for m in (1, 2, 3):
            a = pauli_on_site(k, 1, 3)
            b = pauli_on_site(m, 3, 3)
            assert np.array_equal(a @ b, b @ a)


def test_fock_operators():
    a, adag, num = fock_operators(1)
    assert np.array_equal(a, [[0, 1], [0, 0]])
    a, adag, num = fock_operators(6)
    assert np.allclose(np.linalg.eigvalsh(num), np.arange(7))
    comm = a @ adag - adag @ a
    assert np.allclose(comm[:-1, :-1], np.eye(6), atol=1e-14)
    assert abs(comm[-1, -1] - (-6)) < 1e-12
    with pytest.raises(ValueError):
        fock_operators(0)


def test_embed_places_factor():
    a, _, _ = fock_operators(2)
    op = embed(a, 1, [2, 3])
    assert np.array_equal(op, np.kron(np.eye(2), a))


def test_symmetrize_warns_above_threshold():
    m = np.array([[1, 1e-6], [0, 2]], dtype=complex)
    with pytest.warns(UserWarning):
        h, corr = symmetrize(m)
    assert is_hermitian(h)
    assert corr == pytest.approx(5e-7)


@given(seeds, dims, st.floats(-10, 10), st.floats(-10, 10))
def test_expm_group_law(seed, dim, t, s):
    h = random_hermitian(dim, np.random.default_rng(seed), scale=3.0)
    lhs = expm_unitary(h, t) @ expm_unitary(h, s)
    assert np.max(np.abs(lhs - expm_unitary(h, t + s))) < 1e-10


@given(seeds, st.integers(1, 64))
def test_reconstruction(seed, dim):
    h = random_hermitian(dim, np.random.default_rng(seed), scale=5.0)
    dec = spectral_decompose(h)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    scale = np.max(np.abs(h))
    assert np.max(np.abs(dec.reconstruct() - h)) < 1e-10 * scale
    gram = dec.eigenvectors.conj().T @ dec.eigenvectors
    assert np.max(np.abs(gram - np.eye(dim))) < 1e-10


@given(seeds, dims, st.floats(-50, 50))
def test_unitarity(seed, dim, t):
    h = random_hermitian(dim, np.random.default_rng(seed), scale=2.0)
    assert unitarity_defect(expm_unitary(h, t)) < 1e-10


@given(seeds)
def test_tensor_associative_on_integer_matrices(seed):
    rng = np.random.default_rng(seed)
    a, b, c = (rng.integers(-5, 6, size=(n, n)) for n in (2, 3, 2))
    assert np.array_equal(tensor(tensor(a, b), c), tensor(a, tensor(b, c)))


def test_to_eigenbasis_dimension_check(rng):
    dec = spectral_decompose(random_hermitian(3, rng))
    with pytest.raises(DimensionMismatchError):
        dec.to_eigenbasis(np.eye(4))
    d = dec.to_eigenbasis(dec.reconstruct())
    assert np.allclose(d, np.diag(dec.eigenvalues), atol=1e-12)
