"""Dense complex-matrix foundation.

Hamiltonians, couplings and generators are plain ``numpy`` complex arrays.
The helpers here validate them, diagonalize them and build the standard
qubit and truncated-Fock operators used by the analysis modules.

Conventions
-----------
* ``hbar`` defaults to 1 and is carried by :class:`PhysicalConstants`.
* Qubit basis: ``|0>`` is the +1 eigenvector of sigma_z.
* Kronecker products put the first factor's index slowest.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .errors import DimensionMismatchError, InvalidOperatorError

HERMITIAN_RTOL = 1e-12
SYMMETRIZE_WARN = 1e-9

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {1: SIGMA_X, 2: SIGMA_Y, 3: SIGMA_Z}


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")


DEFAULT_CONSTANTS = PhysicalConstants()


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def to_eigenbasis(self, op) -> np.ndarray:
        """Matrix elements ``<i|op|j>`` in this eigenbasis."""
        op = np.asarray(op)
        if op.shape != (self.dim, self.dim):
            raise DimensionMismatchError(
                f"operator of shape {op.shape} does not match decomposition of dim {self.dim}")
        v = self.eigenvectors
        return v.conj().T @ op @ v


def _scale(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermiticity_defect(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    a = np.asarray(a)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and \
        hermiticity_defect(a) <= rtol * _scale(a)


def as_hermitian(a, name: str = "operator") -> np.ndarray:
    """Return ``a`` as a complex square array, raising if it is not Hermitian."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise InvalidOperatorError(f"{name}: expected a nonempty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidOperatorError(f"{name}: contains non-finite entries")
    if not is_hermitian(a):
        raise InvalidOperatorError(
            f"{name}: not Hermitian (defect {hermiticity_defect(a):.3e}, scale {_scale(a):.3e})")
    return a


def symmetrize(a, name: str = "operator") -> tuple[np.ndarray, float]:
    """Replace ``a`` by ``(a + a^dagger)/2``.

    Returns the symmetrized matrix and the largest entry correction. A
    ``UserWarning`` is issued when the correction exceeds 1e-9.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidOperatorError(f"{name}: expected a square matrix, got shape {a.shape}")
    h = (a + a.conj().T) / 2
    correction = float(np.max(np.abs(h - a))) if a.size else 0.0
    if correction > SYMMETRIZE_WARN:
        warnings.warn(f"{name}: symmetrized, largest correction {correction:.3e}", stacklevel=2)
    return h, correction


def spectral_decompose(op) -> SpectralDecomposition:
    op = as_hermitian(op)
    w, v = np.linalg.eigh(op)
    return SpectralDecomposition(w, v)


def expm_unitary(h, t: float, constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """``exp(-i h t / hbar)`` through the eigendecomposition of ``h``."""
    dec = h if isinstance(h, SpectralDecomposition) else spectral_decompose(h)
    phases = np.exp(-1j * dec.eigenvalues * (t / constants.hbar))
    v = dec.eigenvectors
    return (v * phases) @ v.conj().T


def unitarity_defect(u) -> float:
    """Largest column deviation of ``u^dagger u`` from the identity."""
    u = np.asarray(u)
    d = u.conj().T @ u - np.eye(u.shape[0])
    return float(np.max(np.linalg.norm(d, axis=0)))


def tensor(*ops) -> np.ndarray:
    if not ops:
        raise ValueError("tensor() needs at least one operator")
    return reduce(np.kron, (np.asarray(o) for o in ops))


def pauli_on_site(k: int, j: int, n_sites: int) -> np.ndarray:
    """sigma_k on qubit ``j`` (1-based) of ``n_sites`` qubits."""
    if k not in PAULI:
        raise IndexError(f"Pauli axis must be 1, 2 or 3, got {k}")
    if n_sites < 1 or not 1 <= j <= n_sites:
        raise IndexError(f"site {j} out of range for {n_sites} sites")
    left = np.eye(2 ** (j - 1), dtype=complex)
    right = np.eye(2 ** (n_sites - j), dtype=complex)
    return np.kron(np.kron(left, PAULI[k]), right)


def fock_operators(n_max: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Truncated (annihilation, creation, number) on levels 0..n_max."""
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    a = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)
    adag = a.conj().T
    return a, adag, adag @ a


def embed(op, slot: int, dims) -> np.ndarray:
    """Place ``op`` on tensor factor ``slot`` (0-based) of a product space."""
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[slot] = np.asarray(op, dtype=complex)
    return tensor(*factors)


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """GUE-like sample, entries of order ``scale / sqrt(dim)``."""
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (z + z.conj().T) / (2 * np.sqrt(2 * dim))


def operator_norm(a) -> float:
    a = np.asarray(a)
    return float(np.linalg.norm(a, 2)) if a.size else 0.0
