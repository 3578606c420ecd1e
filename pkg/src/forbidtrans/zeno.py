"""Zeno-effect numerics.

Covers the frequent-projection limit ``[P U(t/n) P]^n -> P exp(-i PHP t)``,
golden-rule rates for a system strongly coupled to its environment (where
the environment is dressed differently for each pointer state), and the
laser-driven three-level atom in truncated Fock space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import AmbiguousGroundStateError, DimensionMismatchError, InvalidOperatorError
from .golden_rule import (
    ENERGY_CONSERVATION,
    FORBIDDEN_RTOL,
    MATRIX_ELEMENT_ZERO,
    DeltaRegularization,
    RateReport,
)
from .operators import (
    DEFAULT_CONSTANTS,
    PhysicalConstants,
    SpectralDecomposition,
    as_hermitian,
    embed,
    expm_unitary,
    fock_operators,
    operator_norm,
    spectral_decompose,
)

PROJECTION_TOL = 1e-10
HARD_ZERO_WIDTHS = 5.0
GROUND_GAP_RTOL = 1e-10
MAX_TRUNCATED_DIM = 4096
TRUNCATION_RTOL = 1e-6
THRESHOLD_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class ProjectionFamily:
    projections: tuple

    def __post_init__(self):
        ps = tuple(as_hermitian(p, f"projection {i}") for i, p in enumerate(self.projections))
        if not ps:
            raise InvalidOperatorError("projection family is empty")
        d = ps[0].shape[0]
        if any(p.shape != (d, d) for p in ps):
            raise DimensionMismatchError("projections have mixed dimensions")
        for i, p in enumerate(ps):
            if np.max(np.abs(p @ p - p)) > PROJECTION_TOL:
                raise InvalidOperatorError(f"projection {i} is not idempotent")
            for j in range(i):
                if np.max(np.abs(p @ ps[j])) > PROJECTION_TOL:
                    raise InvalidOperatorError(f"projections {j} and {i} are not orthogonal")
        if np.max(np.abs(sum(ps) - np.eye(d))) > PROJECTION_TOL:
            raise InvalidOperatorError("projections do not sum to the identity")
        object.__setattr__(self, "projections", ps)

    @classmethod
    def from_vectors(cls, groups):
        """Family of projectors onto spans of orthonormal column groups."""
        return cls(tuple(np.asarray(g) @ np.asarray(g).conj().T for g in groups))

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def __len__(self):
        return len(self.projections)


@dataclass(frozen=True, eq=False)
class ZenoLimit:
    product: np.ndarray
    limit: np.ndarray
    error: float


def zeno_limit_operator(h, projection, t, constants=DEFAULT_CONSTANTS) -> np.ndarray:
    """``P exp(-i P H P t / hbar)``."""
    p = projection
    return p @ expm_unitary(p @ h @ p, t, constants)


def zeno_projected_evolution(h, family: ProjectionFamily, j: int, t: float, n: int,
                             constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ZenoLimit:
    if n < 1:
        raise ValueError(f"step count must be >= 1, got {n}")
    h = as_hermitian(h, "H")
    if h.shape[0] != family.dim:
        raise DimensionMismatchError(f"H has dim {h.shape[0]}, projections have dim {family.dim}")
    p = family.projections[j]
    step = p @ expm_unitary(h, t / n, constants) @ p
    product = np.linalg.matrix_power(step, n)
    limit = zeno_limit_operator(h, p, t, constants)
    return ZenoLimit(product, limit, float(np.linalg.norm(product - limit)))


def zeno_state_evolution(rho, h, family: ProjectionFamily, t: float,
                         constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Apply ``rho -> sum_j W_j rho W_j^dagger`` with the limiting ``W_j``."""
    rho = as_hermitian(rho, "rho")
    if abs(np.trace(rho).real - 1) > 1e-10 or np.linalg.eigvalsh(rho).min() < -1e-10:
        raise InvalidOperatorError("rho must be positive semidefinite with unit trace")
    h = as_hermitian(h, "H")
    out = np.zeros_like(rho)
    for p in family.projections:
        w = zeno_limit_operator(h, p, t, constants)
        out += w @ rho @ w.conj().T
    return out


@dataclass(frozen=True, eq=False)
class StrongCouplingModel:
    """System in its pointer basis, each pointer state dressing the reservoir.

    ``dressed[j]`` diagonalizes ``H_R^(j)``; ``perturbation`` is the
    off-diagonal part of ``H_S`` in the pointer basis.
    """

    pointer_energies: np.ndarray
    dressed: tuple
    perturbation: np.ndarray
    labels: tuple = ()

    def __post_init__(self):
        eps = np.asarray(self.pointer_energies, dtype=float)
        dressed = tuple(d if isinstance(d, SpectralDecomposition) else spectral_decompose(d)
                        for d in self.dressed)
        v = as_hermitian(self.perturbation, "V")
        n = len(eps)
        if len(dressed) != n or v.shape != (n, n):
            raise DimensionMismatchError(
                f"{n} pointer energies, {len(dressed)} dressed reservoirs, V of shape {v.shape}")
        if len({d.dim for d in dressed}) != 1:
            raise DimensionMismatchError("dressed reservoirs must share one dimension")
        if np.max(np.abs(np.diag(v))) > 1e-12 * max(1.0, np.max(np.abs(v))):
            raise InvalidOperatorError("V must have zero diagonal in the pointer basis")
        labels = tuple(self.labels) or tuple(range(n))
        object.__setattr__(self, "pointer_energies", eps)
        object.__setattr__(self, "dressed", dressed)
        object.__setattr__(self, "perturbation", v)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_pointer_coupling(cls, pointer_values, pointer_energies, h_r, r, v, labels=()):
        """Dressed reservoirs ``H_R + s_j R`` for ``S = sum_j s_j P_j``."""
        h_r = as_hermitian(h_r, "H_R")
        r = as_hermitian(r, "R")
        if h_r.shape != r.shape:
            raise DimensionMismatchError(f"H_R {h_r.shape} and R {r.shape} differ")
        return cls(pointer_energies, tuple(h_r + s * r for s in pointer_values), v, labels)

    @property
    def ground_energies(self) -> np.ndarray:
        return np.array([d.eigenvalues[0] for d in self.dressed])

    @property
    def bath_dim(self) -> int:
        return self.dressed[0].dim

    def index(self, label) -> int:
        return self.labels.index(label) if label in self.labels else int(label)

    def threshold_gap(self, from_state, to_state) -> float:
        """``(E_g^(k) + eps_k) - (E_g^(l) + eps_l)``; positive means forbidden."""
        l, k = self.index(from_state), self.index(to_state)
        eg = self.ground_energies
        return float((eg[k] + self.pointer_energies[k]) - (eg[l] + self.pointer_energies[l]))


def zeno_threshold_check(model: StrongCouplingModel, from_state, to_state) -> bool:
    """True when the final ground lies strictly above the initial one (beyond rounding)."""
    return _above_threshold(model, model.threshold_gap(from_state, to_state))


def _above_threshold(model, gap) -> bool:
    scale = max(1.0, float(np.max(np.abs(model.pointer_energies))),
                float(np.max(np.abs(model.ground_energies))))
    return gap > THRESHOLD_RTOL * scale


def strong_coupling_rate(model: StrongCouplingModel, bath_operator, from_state, to_state,
                         reg: DeltaRegularization,
                         constants: PhysicalConstants = DEFAULT_CONSTANTS) -> RateReport:
    """Zero-temperature rate from ``|l> (x) |E_g^(l)>`` into the dressed continuum of ``k``.

    ``bath_operator`` is the environment factor sandwiched between dressed
    states; ``None`` means the identity, i.e. the perturbation acts on the
    system alone and the bath factor is a dressed-state overlap.
    """
    l, k = model.index(from_state), model.index(to_state)
    if l == k:
        raise ValueError("initial and final pointer states must differ")
    v = model.perturbation
    elem = v[k, l]
    if abs(elem) <= FORBIDDEN_RTOL * operator_norm(v):
        return RateReport.zero(l, k, MATRIX_ELEMENT_ZERO)
    start = model.dressed[l]
    levels = start.eigenvalues
    if len(levels) > 1:
        spread = max(1.0, float(np.max(np.abs(levels))))
        if levels[1] - levels[0] < GROUND_GAP_RTOL * spread:
            raise AmbiguousGroundStateError(
                f"dressed reservoir of state {model.labels[l]!r} has a degenerate ground state")
    ground = start.eigenvectors[:, 0]
    if bath_operator is not None:
        r = as_hermitian(bath_operator, "R")
        if r.shape != (model.bath_dim, model.bath_dim):
            raise DimensionMismatchError(f"R has shape {r.shape}, bath dim is {model.bath_dim}")
        ground = r @ ground
    final = model.dressed[k]
    amps = final.eigenvectors.conj().T @ ground
    args = (model.pointer_energies[k] + final.eigenvalues
            - model.pointer_energies[l] - levels[0])
    # threshold condition: every final level lies above the initial energy by more than 5 widths
    if np.min(args) > HARD_ZERO_WIDTHS * reg.width:
        return RateReport.zero(l, k, ENERGY_CONSERVATION)
    bath = float(np.sum(np.abs(amps) ** 2 * reg(args)))
    rate = 2 * math.pi / constants.hbar * abs(elem) ** 2 * bath
    return RateReport(l, k, rate)


@dataclass(frozen=True)
class ThreeLevelModelParams:
    omega_13: float
    rabi: float
    mode_frequencies: tuple
    couplings: tuple
    pump_amplitudes: tuple
    g13: float
    n_max: int

    def __post_init__(self):
        freqs = tuple(float(w) for w in self.mode_frequencies)
        f = tuple(complex(x) for x in self.couplings)
        pump = tuple(complex(x) for x in self.pump_amplitudes)
        if not freqs:
            raise ValueError("the three-level model needs at least one field mode")
        if not (len(freqs) == len(f) == len(pump)):
            raise ValueError("mode_frequencies, couplings and pump_amplitudes must have equal length")
        if self.omega_13 <= 0 or any(w <= 0 for w in freqs):
            raise ValueError("all frequencies must be positive")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if 3 * (self.n_max + 1) ** len(freqs) > MAX_TRUNCATED_DIM:
            raise ValueError(f"truncated space 3*{self.n_max + 1}^{len(freqs)} exceeds {MAX_TRUNCATED_DIM}")
        object.__setattr__(self, "mode_frequencies", freqs)
        object.__setattr__(self, "couplings", f)
        object.__setattr__(self, "pump_amplitudes", pump)

    @property
    def pump_shift(self) -> float:
        """``g13 * sum_k (f_k F_k + conj)``; the sign assumption asks for this to be positive."""
        return float(self.g13 * sum(2 * (f * F).real
                                    for f, F in zip(self.couplings, self.pump_amplitudes)))

    def scaled_pump(self, factor: float) -> "ThreeLevelModelParams":
        return replace(self, pump_amplitudes=tuple(factor * F for F in self.pump_amplitudes))


LABELS = ("+", "-", "2")


@dataclass(frozen=True, eq=False)
class ThreeLevelModel:
    params: ThreeLevelModelParams
    hamiltonian: np.ndarray        # direct construction, atom basis |1>,|2>,|3>, original field modes
    h0: np.ndarray                 # displaced frame, atom basis |+>,|->,|2>
    v_atomic: np.ndarray           # 3x3 perturbation in |+>,|->,|2>
    epsilon: dict
    field_hamiltonians: dict       # "+", "-", "2" -> dressed field Hamiltonian (displaced frame)
    atomic_basis: np.ndarray       # columns |+>,|->,|2> in the |1>,|2>,|3> basis
    strong_model: StrongCouplingModel
    hbar: float = 1.0

    @property
    def ground_energies(self) -> dict:
        return dict(zip(LABELS, self.strong_model.ground_energies))

    @property
    def displaced_frame_hamiltonian(self) -> np.ndarray:
        return self.h0 + np.kron(self.v_atomic, np.eye(self.h0.shape[0] // 3))

    def padding(self) -> int:
        """Extra Fock levels that hold the displaced vacuum tails of every mode."""
        amp = max(abs(F) for F in self.params.pump_amplitudes)
        return int(math.ceil(amp * amp + 10 * amp + 12))

    def reassembled(self) -> np.ndarray:
        """``H0 + V`` mapped back to the direct construction's basis.

        The displacement is applied in a padded Fock space and the result
        restricted to levels ``0..n_max``; displacing inside the bare
        truncation would corrupt the highest levels.
        """
        p = self.params
        big_n = p.n_max + self.padding()
        n_modes = len(p.mode_frequencies)
        if 3 * (big_n + 1) ** n_modes > 4 * MAX_TRUNCATED_DIM:
            raise ValueError("padded Fock space too large for the reassembly check")
        parts = _displaced_frame(p, big_n, self.hbar)
        h_big = parts["h0"] + np.kron(parts["v"], np.eye(parts["h0"].shape[0] // 3))
        a1, _, _ = fock_operators(big_n)
        dims = [big_n + 1] * n_modes
        disp = np.eye(int(np.prod(dims)), dtype=complex)
        for m, F in enumerate(p.pump_amplitudes):
            disp = disp @ embed(_displacement(F, a1), m, dims)
        w = np.kron(self.atomic_basis, disp)
        full = w @ h_big @ w.conj().T
        keep = np.indices(dims).reshape(n_modes, -1).max(axis=0) <= p.n_max
        keep = np.tile(keep, 3)
        return full[np.ix_(keep, keep)]

    def reassembly_error(self, margin: int = 2) -> float:
        """Largest element mismatch among field states with total photon number <= n_max - margin."""
        p = self.params
        dims = [p.n_max + 1] * len(p.mode_frequencies)
        photons = np.indices(dims).reshape(len(dims), -1).sum(axis=0)
        low = np.tile(photons <= p.n_max - margin, 3)
        diff = self.reassembled() - self.hamiltonian
        return float(np.max(np.abs(diff[np.ix_(low, low)])))


def analytic_dressed_ground(params: ThreeLevelModelParams, constants=DEFAULT_CONSTANTS) -> float:
    """Displaced-oscillator ground energy ``-sum g13^2 |f_k|^2 / (hbar w_k)``."""
    return -sum(params.g13 ** 2 * abs(f) ** 2 / (constants.hbar * w)
                for f, w in zip(params.couplings, params.mode_frequencies))


def _atom(i, j):
    out = np.zeros((3, 3), dtype=complex)
    out[i, j] = 1
    return out


def _displacement(alpha: complex, a: np.ndarray) -> np.ndarray:
    gen = alpha * a.conj().T - np.conj(alpha) * a
    # exp(gen) with gen anti-Hermitian equals exp(-i h) for h = i gen
    return expm_unitary(1j * gen, 1.0, PhysicalConstants(1.0))


def _mode_operators(n_max, n_modes):
    a1, _, _ = fock_operators(n_max)
    dims = [n_max + 1] * n_modes
    return [embed(a1, m, dims) for m in range(n_modes)], np.eye((n_max + 1) ** n_modes, dtype=complex)


def _displaced_frame(params: ThreeLevelModelParams, n_max: int, hbar: float) -> dict:
    """Pointer-basis pieces with ``b_k`` the plain truncated annihilation operator."""
    mode_a, eye_f = _mode_operators(n_max, len(params.mode_frequencies))
    freqs, f, g = params.mode_frequencies, params.couplings, params.g13
    h_em = sum(hbar * w * a.conj().T @ a for w, a in zip(freqs, mode_a))
    drive_b = sum(fk * a + np.conj(fk) * a.conj().T for fk, a in zip(f, mode_a))
    h_plus, h_minus = h_em + g * drive_b, h_em - g * drive_b
    shift = params.pump_shift
    eps = {"+": hbar * params.omega_13 / 2 + shift, "-": hbar * params.omega_13 / 2 - shift, "2": 0.0}
    proj = [np.diag(row).astype(complex) for row in np.eye(3)]
    h0 = (np.kron(proj[0], h_plus + eps["+"] * eye_f)
          + np.kron(proj[1], h_minus + eps["-"] * eye_f)
          + np.kron(proj[2], h_em))
    half_w = hbar * params.omega_13 / 2
    rabi = hbar * params.rabi / (2 * math.sqrt(2))
    v = np.array([[0, -half_w, rabi],
                  [-half_w, 0, rabi],
                  [rabi, rabi, 0]], dtype=complex)
    return {"h0": h0, "v": v, "eps": eps, "fields": {"+": h_plus, "-": h_minus, "2": h_em}}


def build_three_level_model(params: ThreeLevelModelParams,
                            constants: PhysicalConstants = DEFAULT_CONSTANTS) -> ThreeLevelModel:
    hbar = constants.hbar
    mode_a, eye_f = _mode_operators(params.n_max, len(params.mode_frequencies))
    freqs, f, pump, g = params.mode_frequencies, params.couplings, params.pump_amplitudes, params.g13

    # direct construction in the original field modes
    shifted = [a - F * eye_f for a, F in zip(mode_a, pump)]
    field_direct = sum(hbar * w * s.conj().T @ s for w, s in zip(freqs, shifted))
    drive_direct = sum(fk * a + np.conj(fk) * a.conj().T for fk, a in zip(f, mode_a))
    h_direct = (hbar * params.omega_13 * np.kron(_atom(2, 2), eye_f)
                + 0.5 * hbar * params.rabi * np.kron(_atom(0, 1) + _atom(1, 0), eye_f)
                + np.kron(np.eye(3), field_direct)
                + g * np.kron(_atom(0, 2) + _atom(2, 0), drive_direct))

    parts = _displaced_frame(params, params.n_max, hbar)
    s2 = 1 / math.sqrt(2)
    basis = np.array([[s2, s2, 0], [0, 0, 1], [s2, -s2, 0]], dtype=complex)
    fields, eps = parts["fields"], parts["eps"]
    strong = StrongCouplingModel([eps[x] for x in LABELS], tuple(fields[x] for x in LABELS),
                                 parts["v"], LABELS)
    return ThreeLevelModel(params, h_direct, parts["h0"], parts["v"], eps, fields, basis, strong, hbar)


@dataclass(frozen=True)
class PumpLadderRow:
    scale: float
    pump_shift: float
    epsilon_minus: float
    ground_minus: float
    threshold_gap: float
    threshold: bool
    rate: float
    forbidden: bool
    reason: str


@dataclass(frozen=True)
class ThreeLevelReport:
    epsilon_plus: float
    epsilon_minus: float
    ground_energies: dict
    analytic_ground: float
    sign_assumption: bool
    rows: tuple
    monotone: bool
    verdict_forbidden: bool
    truncation_converged: bool


def default_three_level_regularization(params, constants=DEFAULT_CONSTANTS) -> DeltaRegularization:
    return DeltaRegularization("gaussian", constants.hbar * min(params.mode_frequencies) / 4)


def _ladder_row(params, scale, reg, constants):
    model = build_three_level_model(params.scaled_pump(scale), constants)
    sm = model.strong_model
    rep = strong_coupling_rate(sm, None, "-", "2", reg, constants)
    gap = sm.threshold_gap("-", "2")
    return PumpLadderRow(scale, model.params.pump_shift, model.epsilon["-"],
                         model.ground_energies["-"], gap, _above_threshold(sm, gap), rep.rate,
                         rep.forbidden, rep.forbidden_reason)


def _close(a, b, rtol=TRUNCATION_RTOL):
    return a == b or abs(a - b) <= rtol * max(abs(a), abs(b))


def three_level_zeno_report(params: ThreeLevelModelParams,
                            constants: PhysicalConstants = DEFAULT_CONSTANTS,
                            reg: DeltaRegularization | None = None,
                            ladder=(0, 1, 2, 4, 8)) -> ThreeLevelReport:
    """Rate of ``|-> -> |2>`` across a ladder of pump strengths."""
    reg = reg or default_three_level_regularization(params, constants)
    base = build_three_level_model(params, constants)
    rows = tuple(_ladder_row(params, s, reg, constants) for s in ladder)

    finer = replace(params, n_max=params.n_max + 5)
    converged = 3 * (finer.n_max + 1) ** len(finer.mode_frequencies) <= MAX_TRUNCATED_DIM
    if converged:
        for row in rows:
            check = _ladder_row(finer, row.scale, reg, constants)
            converged &= _close(row.rate, check.rate) and _close(row.ground_minus, check.ground_minus)
            converged &= row.forbidden == check.forbidden

    rates = [r.rate for r in rows]
    monotone = all(b <= a for a, b in zip(rates, rates[1:]))
    return ThreeLevelReport(
        epsilon_plus=base.epsilon["+"], epsilon_minus=base.epsilon["-"],
        ground_energies=base.ground_energies,
        analytic_ground=analytic_dressed_ground(params, constants),
        sign_assumption=params.pump_shift > 0,
        rows=rows, monotone=monotone,
        verdict_forbidden=rows[-1].forbidden and rows[-1].reason == ENERGY_CONSERVATION,
        truncation_converged=bool(converged),
    )
