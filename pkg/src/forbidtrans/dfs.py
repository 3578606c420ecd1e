"""Decoherence-free subspaces and subsystems.

A subspace is decoherence-free for couplings ``X_mu`` when every ``X_mu``
annihilates it, equivalently when it is the kernel of the Casimir-like sum
``C = sum X_mu^2``. Subsystems come from the block structure of the algebra
generated by the couplings, recovered here from a random element of its
commutant.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import DimensionMismatchError, StructureError, StructureNotFoundError
from .operators import as_hermitian, operator_norm, pauli_on_site

CLUSTER_RTOL = 1e-8
VERIFY_TOL = 1e-8
MAX_REFINEMENTS = 5


@dataclass(frozen=True, eq=False)
class GeneratorSet:
    generators: tuple

    def __post_init__(self):
        gens = tuple(as_hermitian(g, f"generator {i}") for i, g in enumerate(self.generators))
        if not gens:
            raise ValueError("generator set is empty")
        dims = {g.shape[0] for g in gens}
        if len(dims) != 1:
            raise DimensionMismatchError(f"generators have mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "generators", gens)

    @property
    def dim(self) -> int:
        return self.generators[0].shape[0]

    def __len__(self):
        return len(self.generators)

    def __iter__(self):
        return iter(self.generators)


def _as_generator_set(gens) -> GeneratorSet:
    return gens if isinstance(gens, GeneratorSet) else GeneratorSet(tuple(gens))


def casimir(gens) -> np.ndarray:
    gens = _as_generator_set(gens)
    c = sum(g @ g for g in gens)
    return (c + c.conj().T) / 2


@dataclass(frozen=True, eq=False)
class DFSBasis:
    vectors: np.ndarray
    residuals: np.ndarray  # [generator, vector] -> ||X_mu v||

    @property
    def dimension(self) -> int:
        return self.vectors.shape[1]

    def interaction_residual(self, gens, bath_ops) -> float:
        """Largest ``||(sum_mu X_mu (x) R_mu)(v (x) e_b)||`` over basis vectors and bath basis states."""
        gens = _as_generator_set(gens)
        if len(bath_ops) != len(gens):
            raise ValueError("need one bath operator per generator")
        if self.dimension == 0:
            return 0.0
        worst = 0.0
        for x, r in zip(gens, bath_ops):
            # (X (x) R)(v (x) e_b) = (X v) (x) (R e_b); norms multiply
            xv = np.linalg.norm(x @ self.vectors, axis=0)
            rb = np.linalg.norm(np.asarray(r), axis=0)
            worst = max(worst, float(np.max(np.outer(xv, rb))))
        return worst


def dfs_nullspace(gens, tol: float | None = None) -> DFSBasis:
    """Orthonormal basis of the zero eigenspace of the Casimir operator."""
    gens = _as_generator_set(gens)
    c = casimir(gens)
    w, v = np.linalg.eigh(c)
    radius = float(np.max(np.abs(w)))
    if tol is None:
        tol = 1e-9 * (radius if radius > 0 else 1.0)
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    vecs = v[:, w < tol]
    residuals = np.array([np.linalg.norm(g @ vecs, axis=0) for g in gens]).reshape(len(gens), -1)
    bound = math.sqrt(tol)
    for mu, g in enumerate(gens):
        norm = operator_norm(g)
        if norm > 0 and np.any(residuals[mu] >= bound * norm):
            raise StructureError(f"generator {mu} does not annihilate the Casimir kernel")
    return DFSBasis(vecs, residuals)


def collective_generators(n_qubits: int) -> GeneratorSet:
    """Total-spin operators ``J_k = 1/2 sum_j sigma_k^(j)``."""
    if n_qubits < 2:
        raise ValueError(f"collective generators need at least 2 qubits, got {n_qubits}")
    js = [0.5 * sum(pauli_on_site(k, j, n_qubits) for j in range(1, n_qubits + 1))
          for k in (1, 2, 3)]
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        defect = np.max(np.abs(js[a] @ js[b] - js[b] @ js[a] - 1j * js[c]))
        if defect > 1e-12:
            raise StructureError(f"su(2) bracket violated by {defect:.3e}")
    return GeneratorSet(tuple(js))


def catalan_dimension(n: int) -> int:
    """Number of singlets of 2N spin-1/2 particles, (2N)! / ((N+1)! N!)."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    return math.comb(2 * n, n) // (n + 1)


def _clusters(values: np.ndarray, gap: float) -> list[np.ndarray]:
    """Split ascending ``values`` wherever consecutive entries differ by more than ``gap``."""
    breaks = np.nonzero(np.diff(values) > gap)[0] + 1
    return np.split(np.arange(len(values)), breaks)


def _commutant_raw(ops: list[np.ndarray]) -> np.ndarray:
    """Complex basis of ``{X : [X, S] = 0 for all S}``, shape (count, d, d)."""
    d = ops[0].shape[0]
    rng = np.random.default_rng(0x5EED)
    combo = sum(c * s for c, s in zip(rng.uniform(0.5, 1.5, len(ops)), ops))
    w, basis = np.linalg.eigh(combo)
    radius = float(np.max(np.abs(w))) if d else 0.0
    blocks = _clusters(w, CLUSTER_RTOL * radius if radius > 0 else 0.5)
    # unknowns: entries (p, q) of X in the eigenbasis, p and q in the same cluster
    pairs = np.array([(p, q) for blk in blocks for p in blk for q in blk])
    p_idx, q_idx = pairs[:, 0], pairs[:, 1]
    rotated = [basis.conj().T @ s @ basis for s in ops]
    rows = []
    for s in rotated:
        # column (p, q) of vec([E_pq, S]) as a d x d matrix: row p gets S[q, :], column q gets -S[:, p]
        m = np.zeros((len(pairs), d, d), dtype=complex)
        m[np.arange(len(pairs)), p_idx, :] += s[q_idx, :]
        m[np.arange(len(pairs)), :, q_idx] -= s[:, p_idx].T
        rows.append(m.reshape(len(pairs), d * d).T)
    system = np.vstack(rows)
    scale = max(max(operator_norm(s) for s in ops), 1e-300)
    if system.size:
        system = system[np.any(system != 0, axis=1)]
        if system.shape[0] > system.shape[1]:
            system = linalg.qr(system, mode="r", check_finite=False)[0][:system.shape[1]]
        _, sv, vh = linalg.svd(system)
        sv = np.concatenate([sv, np.zeros(vh.shape[0] - len(sv))])
        null = vh[sv <= CLUSTER_RTOL * scale].conj()
    else:
        null = np.eye(len(pairs), dtype=complex)
    out = np.zeros((len(null), d, d), dtype=complex)
    out[:, p_idx, q_idx] = null
    return basis @ out @ basis.conj().T


def commutant_basis(s_ops) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal Hermitian basis of the commutant of ``s_ops``."""
    gens = _as_generator_set(s_ops)
    ops = list(gens)
    raw = _commutant_raw(ops)
    d = gens.dim
    herm = np.concatenate([(raw + raw.conj().transpose(0, 2, 1)) / 2,
                           (raw - raw.conj().transpose(0, 2, 1)) / 2j])
    flat = np.concatenate([herm.real.reshape(len(herm), -1), herm.imag.reshape(len(herm), -1)], axis=1)
    _, sv, vh = np.linalg.svd(flat, full_matrices=False)
    rank = len(raw)
    if rank and sv[rank - 1] < 1e-8 * sv[0]:
        raise StructureError("commutant is not closed under adjoints; input couplings inconsistent")
    vecs = vh[:rank]
    mats = vecs[:, :d * d] + 1j * vecs[:, d * d:]
    return [(m.reshape(d, d) + m.reshape(d, d).conj().T) / 2 for m in mats]


@dataclass(frozen=True, eq=False)
class SubsystemBlock:
    multiplicity: int
    dimension: int
    isometry: np.ndarray  # columns ordered (copy, internal) with copy index slowest

    @property
    def decoherence_free_subsystem(self) -> bool:
        return self.multiplicity > 1

    @property
    def decoherence_free_subspace(self) -> bool:
        """Couplings act as scalars on the whole block."""
        return self.dimension == 1

    def factor(self, op) -> np.ndarray:
        """The ``d_J x d_J`` matrix ``S_J`` with ``op`` restricted to the block = ``I (x) S_J``."""
        v0 = self.isometry[:, :self.dimension]
        return v0.conj().T @ np.asarray(op) @ v0


@dataclass(frozen=True, eq=False)
class SubsystemDecomposition:
    blocks: tuple

    @property
    def census(self) -> list[tuple[int, int]]:
        return [(b.multiplicity, b.dimension) for b in self.blocks]

    def reconstruct(self, op) -> np.ndarray:
        out = 0
        for b in self.blocks:
            q = b.isometry
            out = out + q @ np.kron(np.eye(b.multiplicity), b.factor(op)) @ q.conj().T
        return out


def _random_element(basis, rng) -> np.ndarray:
    coeffs = rng.normal(size=len(basis))
    return sum(c * b for c, b in zip(coeffs, basis))


def _attempt(ops, basis, rng):
    z = _random_element(basis, rng)
    probe = _random_element(basis, rng)
    w, v = np.linalg.eigh(z)
    radius = float(np.max(np.abs(w)))
    spaces = [v[:, idx] for idx in _clusters(w, CLUSTER_RTOL * radius if radius > 0 else 0.5)]
    n = len(spaces)
    link = 1e-8 * max(operator_norm(probe), 1e-300)
    connected = np.zeros((n, n), dtype=bool)
    for a in range(n):
        for b in range(n):
            connected[a, b] = a == b or np.linalg.norm(spaces[a].conj().T @ probe @ spaces[b], 2) > link
    if not np.array_equal(connected, connected.T):
        return None
    seen = np.zeros(n, dtype=bool)
    blocks = []
    for a in range(n):
        if seen[a]:
            continue
        group = np.nonzero(connected[a])[0]
        # connectivity must be an equivalence relation: every member links to the same set
        if not all(np.array_equal(connected[g], connected[a]) for g in group):
            return None
        seen[group] = True
        dims = {spaces[g].shape[1] for g in group}
        if len(dims) != 1:
            return None
        ref = spaces[group[0]]
        cols = [ref]
        for g in group[1:]:
            t = spaces[g].conj().T @ probe @ ref
            u, _, vh = np.linalg.svd(t)
            cols.append(spaces[g] @ (u @ vh))
        blocks.append(SubsystemBlock(len(group), dims.pop(), np.hstack(cols)))
    blocks.sort(key=lambda b: (-b.dimension, -b.multiplicity))
    dec = SubsystemDecomposition(tuple(blocks))
    for s in ops:
        tol = VERIFY_TOL * max(1.0, operator_norm(s))
        for b in blocks:
            restricted = b.isometry.conj().T @ s @ b.isometry
            if np.max(np.abs(restricted - np.kron(np.eye(b.multiplicity), b.factor(s)))) > tol:
                return None
        if np.max(np.abs(dec.reconstruct(s) - s)) > tol:
            return None
    return dec


def subsystem_decomposition(s_ops, seed: int) -> SubsystemDecomposition:
    """Split the Hilbert space as ``sum_J C^{n_J} (x) C^{d_J}`` with couplings ``I (x) S_J``."""
    gens = _as_generator_set(s_ops)
    ops = list(gens)
    basis = commutant_basis(gens)
    rng = np.random.default_rng(seed)
    for _ in range(MAX_REFINEMENTS):
        dec = _attempt(ops, basis, rng)
        if dec is not None:
            return dec
    raise StructureNotFoundError(
        f"no consistent block structure after {MAX_REFINEMENTS} random commutant samples")
