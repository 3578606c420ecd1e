"""Floquet analysis of piecewise-constant periodic drives.

The periodic factor of the driven autocorrelation function is sampled on a
uniform grid over one period. Its Fourier coefficients are the weights of a
delta comb at frequencies ``(eps_l - eps_k)/hbar + 2 pi n / tau``, and the
comb is overlapped with the reservoir absorption profile to give the
bang-bang rate.

Sign convention: ``F_kl(t) = sum_n nu_n exp(-i omega_n t)``, so a line at
positive ``omega_n`` hands energy ``hbar omega_n`` to the reservoir.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from .errors import DimensionMismatchError
from .golden_rule import (
    MATRIX_ELEMENT_ZERO,
    DeltaRegularization,
    RateReport,
    ReservoirModel,
)
from .operators import (
    DEFAULT_CONSTANTS,
    SIGMA_X,
    PhysicalConstants,
    as_hermitian,
    expm_unitary,
    spectral_decompose,
)

DEGENERACY_PHASE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PeriodicDrive:
    """``H_S(t)`` as an ordered list of ``(hamiltonian, duration)`` segments."""

    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise ValueError("a drive needs at least one segment")
        segs = []
        dim = None
        for i, (h, dt) in enumerate(self.segments):
            h = as_hermitian(h, f"segment {i} hamiltonian")
            if dim is None:
                dim = h.shape[0]
            elif h.shape[0] != dim:
                raise DimensionMismatchError(
                    f"segment {i} has dim {h.shape[0]}, previous segments have {dim}")
            dt = float(dt)
            if not dt > 0:
                raise ValueError(f"segment {i} duration must be positive, got {dt}")
            segs.append((h, dt))
        object.__setattr__(self, "segments", tuple(segs))

    @classmethod
    def constant(cls, h, period: float) -> "PeriodicDrive":
        return cls(((h, period),))

    @property
    def dim(self) -> int:
        return self.segments[0][0].shape[0]

    @property
    def period(self) -> float:
        return float(sum(dt for _, dt in self.segments))

    @cached_property
    def boundaries(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum([dt for _, dt in self.segments])])

    @cached_property
    def _spectra(self):
        return [spectral_decompose(h) for h, _ in self.segments]


def propagator(drive: PeriodicDrive, from_time: float, to_time: float,
               constants: PhysicalConstants = DEFAULT_CONSTANTS) -> np.ndarray:
    """Time-ordered ``U(t, s)``, split exactly at segment boundaries."""
    if to_time < from_time:
        raise ValueError(f"propagator needs to_time >= from_time, got {from_time} > {to_time}")
    tau = drive.period
    bounds = drive.boundaries
    eps = 1e-14 * tau
    u = np.eye(drive.dim, dtype=complex)
    cycle = math.floor(from_time / tau)
    pos = from_time - cycle * tau
    remaining = to_time - from_time
    while remaining > eps:
        seg = int(np.searchsorted(bounds, pos, side="right")) - 1
        if seg >= len(drive.segments):
            pos, seg = 0.0, 0
        step = min(bounds[seg + 1] - pos, remaining)
        if step > eps:
            u = expm_unitary(drive._spectra[seg], step, constants) @ u
        remaining -= step
        pos += step
        if pos >= bounds[seg + 1] - eps:
            pos = bounds[seg + 1]
            if seg + 1 == len(drive.segments):
                pos = 0.0
    return u


@dataclass(frozen=True, eq=False)
class FloquetDecomposition:
    quasi_energies: np.ndarray
    floquet_states: np.ndarray
    sample_grid: np.ndarray
    periodic_states: np.ndarray  # [grid index, component, state index]
    period: float
    one_period: np.ndarray
    degenerate: bool = False
    hbar: float = 1.0

    @property
    def dim(self) -> int:
        return len(self.quasi_energies)


def reduce_quasi_energy(energy, period, hbar=1.0):
    """Fold energies into the window ``(-pi hbar / tau, pi hbar / tau]``."""
    w = 2 * math.pi * hbar / period
    e = np.asarray(energy, dtype=float)
    return e - w * np.ceil((e - w / 2) / w)


def floquet_decompose(drive: PeriodicDrive, grid_points: int,
                      constants: PhysicalConstants = DEFAULT_CONSTANTS) -> FloquetDecomposition:
    n_seg = len(drive.segments)
    if grid_points < 2 * n_seg:
        raise ValueError(f"need at least 2 grid points per segment ({2 * n_seg}), got {grid_points}")
    hbar = constants.hbar
    tau = drive.period
    u_tau = propagator(drive, 0.0, tau, constants)
    # Schur form of a normal matrix is diagonal with a unitary basis,
    # which stays orthonormal inside degenerate clusters.
    t_form, basis = linalg.schur(u_tau, output="complex")
    phases = np.angle(np.diag(t_form))
    energies = reduce_quasi_energy(-hbar * phases / tau, tau, hbar)
    order = np.argsort(energies, kind="stable")
    energies, basis, phases = energies[order], basis[:, order], phases[order]

    circ = np.abs(np.angle(np.exp(1j * (phases[:, None] - phases[None, :]))))
    np.fill_diagonal(circ, np.inf)
    degenerate = bool(len(phases) > 1 and circ.min() < DEGENERACY_PHASE_TOL)

    grid = np.arange(grid_points) * (tau / grid_points)
    states = np.empty((grid_points, drive.dim, drive.dim), dtype=complex)
    u = np.eye(drive.dim, dtype=complex)
    for m, t in enumerate(grid):
        if m:
            u = propagator(drive, grid[m - 1], t, constants) @ u
        states[m] = (u @ basis) * np.exp(1j * energies * t / hbar)
    return FloquetDecomposition(energies, basis, grid, states, tau, u_tau, degenerate, hbar)


@dataclass(frozen=True, eq=False)
class AutocorrelationTrace:
    times: np.ndarray
    values: np.ndarray


def _periodic_matrix_element(decomp: FloquetDecomposition, s_op, k: int, l: int) -> np.ndarray:
    s_op = as_hermitian(s_op, "S")
    if s_op.shape != (decomp.dim, decomp.dim):
        raise DimensionMismatchError(f"S has shape {s_op.shape}, Floquet dim is {decomp.dim}")
    for idx in (k, l):
        if not 0 <= idx < decomp.dim:
            raise IndexError(f"Floquet index {idx} out of range for dim {decomp.dim}")
    phi = decomp.periodic_states
    return np.einsum("ti,ij,tj->t", phi[:, :, k].conj(), s_op, phi[:, :, l])


def _periodic_factor(a: np.ndarray) -> np.ndarray:
    """Period average of ``a(t+s) conj(a(s))`` on the uniform grid (circular correlation)."""
    spec = np.fft.fft(a)
    return np.fft.ifft(spec * spec.conj()) / len(a)


def floquet_autocorrelation(decomp: FloquetDecomposition, s_op, k: int, l: int,
                            constants: PhysicalConstants = DEFAULT_CONSTANTS) -> AutocorrelationTrace:
    a = _periodic_matrix_element(decomp, s_op, k, l)
    omega0 = (decomp.quasi_energies[l] - decomp.quasi_energies[k]) / constants.hbar
    t = decomp.sample_grid
    return AutocorrelationTrace(t, np.exp(-1j * omega0 * t) * _periodic_factor(a))


@dataclass(frozen=True, eq=False)
class PowerSpectrum:
    base_frequency: float
    indices: np.ndarray
    frequencies: np.ndarray
    weights: np.ndarray
    from_state: int = 0
    to_state: int = 0
    correlation_at_zero: float = 0.0

    @property
    def missing_weight(self) -> float:
        """``F_kl(0)`` minus the comb total: weight carried by lines beyond ``|n| > n_max``."""
        return self.correlation_at_zero - float(np.sum(self.weights))

    @property
    def comb(self):
        return list(zip(self.indices.tolist(), self.frequencies.tolist(), self.weights.tolist()))

    @classmethod
    def single_line(cls, frequency, weight, from_state=0, to_state=0):
        return cls(float(frequency), np.array([0]), np.array([float(frequency)]),
                   np.array([float(weight)]), from_state, to_state, float(weight))


def power_spectrum(decomp: FloquetDecomposition, s_op, k: int, l: int, n_max: int,
                   constants: PhysicalConstants = DEFAULT_CONSTANTS) -> PowerSpectrum:
    """Delta-comb weights for the transition ``l -> k``."""
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    n_grid = len(decomp.sample_grid)
    if n_grid < 8 * (n_max + 1):
        raise ValueError(f"grid of {n_grid} points is too coarse for n_max={n_max}; "
                         f"need at least {8 * (n_max + 1)}")
    a = _periodic_matrix_element(decomp, s_op, k, l)
    periodic = _periodic_factor(a)
    n = np.arange(-n_max, n_max + 1)
    m = np.arange(n_grid)
    kernel = np.exp(2j * np.pi * np.outer(n, m) / n_grid)
    weights = (kernel @ periodic).real / n_grid
    weights = np.where(weights < 0, 0.0, weights)
    base = (decomp.quasi_energies[l] - decomp.quasi_energies[k]) / constants.hbar
    freqs = base + 2 * np.pi * n / decomp.period
    return PowerSpectrum(float(base), n, freqs, weights, l, k, float(periodic[0].real))


def bangbang_rate(spectrum: PowerSpectrum, reservoir: ReservoirModel,
                  reg: DeltaRegularization | None = None,
                  constants: PhysicalConstants = DEFAULT_CONSTANTS) -> RateReport:
    """Overlap of the drive comb with the reservoir absorption profile."""
    l, k = spectrum.from_state, spectrum.to_state
    weights = np.asarray(spectrum.weights, dtype=float)
    if not np.any(weights > 0):
        return RateReport.zero(l, k, MATRIX_ELEMENT_ZERO)
    reg = reg or reservoir.default_regularization()
    hbar = constants.hbar
    live = weights > 0
    bath = reservoir.absorption(hbar * spectrum.frequencies[live], reg)
    rate = 2 * math.pi / hbar * float(np.dot(weights[live], bath))
    return RateReport(l, k, rate)


def spin_echo_drive(splitting: float, period: float, pulse_fraction: float = 0.02,
                    constants: PhysicalConstants = DEFAULT_CONSTANTS) -> PeriodicDrive:
    """Qubit with static ``(splitting/2) sigma_x`` refocused by two x pi pulses per period.

    Layout over one period: free tau/4, pulse, free tau/2, pulse, free tau/4
    (free times shortened so the pulse centres sit at tau/4 and 3 tau/4).
    Coupling through ``sigma_z`` is then sign-flipped by each pulse.
    """
    w = pulse_fraction * period
    h0 = 0.5 * splitting * SIGMA_X
    pulse = h0 + 0.5 * (math.pi * constants.hbar / w) * SIGMA_X
    quarter = period / 4 - w / 2
    half = period / 2 - w
    return PeriodicDrive(((h0, quarter), (pulse, w), (h0, half), (pulse, w), (h0, quarter)))
