"""Dispatch a validated :class:`AnalysisConfig` to the analysis modules.

Every task returns a :class:`ResultTable`. Rate cells hold a nonnegative
float or the exact string ``"forbidden"`` when the transition is excluded by
a vanishing matrix element or by energy conservation.
"""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, dfs, floquet, golden_rule, zeno
from ._kernels import BACKEND
from .config import AnalysisConfig, collective_size
from .errors import ConfigError, ForbidTransError, TruncationUnconvergedError

FORBIDDEN = "forbidden"

COLUMN_DOCS = {
    "golden-rule": "from_state,to_state,energy_gap,rate_direct,rate_autocorrelation,reason",
    "weak-coupling": "from_state,to_state,released_energy,rate,reason",
    "minimal-scan": "splitting,rate,rate_over_splitting_pow_r",
    "floquet": "index,quasi_energy",
    "bangbang": "from_state,to_state,period,rate,weight_sum,correlation_at_zero",
    "dfs": "n_qubits,N,dimension,expected_dimension,max_residual",
    "subsystems": "block,multiplicity,dimension,kind",
    "zeno-limit": "projection,steps,error",
    "zeno-threshold": "from_state,to_state,threshold_gap,above_threshold,rate,reason",
    "three-level": "scale,pump_shift,epsilon_minus,ground_minus,threshold_gap,above_threshold,rate,reason",
}


@dataclass
class ResultTable:
    columns: tuple
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = tuple(self.columns)
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} cells, table has {len(self.columns)} columns")

    def column(self, name) -> list:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]


def _rate_cell(report: golden_rule.RateReport):
    return FORBIDDEN if report.forbidden else report.rate


def _regularization(cfg: AnalysisConfig, auto_width: float) -> golden_rule.DeltaRegularization:
    width = cfg.regularization["width"]
    return golden_rule.DeltaRegularization(
        cfg.regularization["kind"], auto_width if width == "auto" else width)


def _spacing_width(levels) -> float:
    """Four mean level spacings of a spectrum, the default delta width."""
    levels = np.sort(np.asarray(levels, dtype=float))
    if len(levels) < 2 or levels[-1] == levels[0]:
        return 1.0
    return 4 * float(levels[-1] - levels[0]) / (len(levels) - 1)


def build_reservoir(cfg: AnalysisConfig) -> golden_rule.ReservoirModel:
    spec = cfg.reservoir
    extra = {k: spec[k] for k in ("cutoff_energy", "density_exponent") if k in spec}
    try:
        if "mode_energies" in spec:
            return golden_rule.ReservoirModel(
                spec["mode_energies"], cfg.matrix(spec["coupling_elements"]),
                spec["initial_distribution"], **extra)
        exc = spec["excited_energies"]
        if isinstance(exc, dict):
            exc = np.linspace(exc["start"], exc["stop"], exc["count"])
        c = spec["couplings"]
        if isinstance(c, list):
            c = np.array([complex(re, im) for re, im in c])
            if len(c) != len(exc):
                raise ConfigError(f"reservoir.couplings: has {len(c)} entries, "
                                  f"excited_energies has {len(exc)}", "reservoir.couplings")
        return golden_rule.single_excitation_reservoir(exc, c, spec["ground_energy"], **extra)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"reservoir: {exc}", "reservoir") from exc


def build_drive(cfg: AnalysisConfig) -> floquet.PeriodicDrive:
    return floquet.PeriodicDrive(tuple((cfg.matrix(s["hamiltonian"]), s["duration"]) for s in cfg.drive))


def _pairs(dim, opts):
    f, t = opts.get("from_state"), opts.get("to_state")
    for idx, key in ((f, "from_state"), (t, "to_state")):
        if idx is not None and idx >= dim:
            raise ConfigError(f"options.{key}: index {idx} out of range for dimension {dim}",
                              f"options.{key}")
    froms = [f] if f is not None else range(dim)
    tos = [t] if t is not None else range(dim)
    return [(i, j) for i in froms for j in tos if i != j]


def _task_golden_rule(cfg):
    h0, v = cfg.matrix("H0"), cfg.matrix("V")
    dec = golden_rule.spectral_decompose(h0)
    reg = _regularization(cfg, _spacing_width(dec.eigenvalues))
    rows = []
    for l, k in _pairs(dec.dim, cfg.options):
        direct = golden_rule.golden_rule_rate(dec, v, l, k, reg, cfg.constants)
        corr = golden_rule.autocorrelation_rate(dec, v, l, k, reg, cfg.constants)
        gap = float(dec.eigenvalues[k] - dec.eigenvalues[l])
        rows.append((l, k, gap, _rate_cell(direct), _rate_cell(corr), direct.forbidden_reason))
    return rows, {"regularization_width": reg.width}


def _task_weak_coupling(cfg):
    dec = golden_rule.spectral_decompose(cfg.matrix("H_S"))
    s_op = cfg.matrix("S")
    reservoir = build_reservoir(cfg)
    reg = _regularization(cfg, reservoir.default_regularization().width)
    rows = []
    for l, k in _pairs(dec.dim, cfg.options):
        rep = golden_rule.weak_coupling_rate(dec, s_op, reservoir, l, k, reg, cfg.constants)
        released = float(dec.eigenvalues[l] - dec.eigenvalues[k])
        rows.append((l, k, released, _rate_cell(rep), rep.forbidden_reason))
    return rows, {"regularization_width": reg.width, "reservoir_levels": reservoir.n_modes}


def _task_minimal_scan(cfg):
    o = cfg.options
    rows = []
    for gap, rate in golden_rule.minimal_decoherence_scan(o["splittings"], o["coupling"], o["r"],
                                                          cfg.constants):
        ratio = rate / gap ** o["r"] if gap > 0 else float("nan")
        rows.append((gap, rate, ratio))
    return rows, {"r": o["r"]}


def _task_floquet(cfg):
    drive = build_drive(cfg)
    dec = floquet.floquet_decompose(drive, cfg.options["grid_points"], cfg.constants)
    rows = [(i, float(e)) for i, e in enumerate(dec.quasi_energies)]
    return rows, {"period": drive.period, "degenerate": dec.degenerate}


def _task_bangbang(cfg):
    o = cfg.options
    drive = build_drive(cfg)
    s_op = cfg.matrix("S")
    n_max = o["n_max"]
    grid = o["grid_points"] or max(256, 8 * (n_max + 1), 2 * len(drive.segments))
    for key in ("from_state", "to_state"):
        if o[key] >= drive.dim:
            raise ConfigError(f"options.{key}: index {o[key]} out of range for dimension {drive.dim}",
                              f"options.{key}")
    reservoir = build_reservoir(cfg)
    reg = _regularization(cfg, reservoir.default_regularization().width)
    dec = floquet.floquet_decompose(drive, grid, cfg.constants)
    l, k = o["from_state"], o["to_state"]
    spec = floquet.power_spectrum(dec, s_op, k, l, n_max, cfg.constants)
    rep = floquet.bangbang_rate(spec, reservoir, reg, cfg.constants)
    row = (l, k, drive.period, _rate_cell(rep), float(np.sum(spec.weights)),
           spec.correlation_at_zero)
    meta = {"regularization_width": reg.width, "grid_points": grid, "n_max": n_max,
            "degenerate": dec.degenerate}
    return [row], meta


def _generators(cfg):
    spec = cfg.options["generators"]
    n = collective_size(spec)
    if n is not None:
        return n, dfs.collective_generators(n)
    return None, dfs.GeneratorSet(tuple(cfg.matrix(name) for name in spec))


def _task_dfs(cfg):
    n, gens = _generators(cfg)
    basis = dfs.dfs_nullspace(gens, cfg.tolerances.get("nullspace"))
    worst = float(np.max(basis.residuals)) if basis.residuals.size else 0.0
    if n is not None:
        big_n = n // 2 if n % 2 == 0 else ""
        expected = dfs.catalan_dimension(n // 2) if n % 2 == 0 else 0
        row = (n, big_n, basis.dimension, expected, worst)
    else:
        row = ("", "", basis.dimension, "", worst)
    return [row], {"hilbert_dim": gens.dim}


def _task_subsystems(cfg):
    _, gens = _generators(cfg)
    dec = dfs.subsystem_decomposition(gens, cfg.seed)
    rows = []
    for i, b in enumerate(dec.blocks):
        if b.decoherence_free_subspace:
            kind = "subspace"
        elif b.decoherence_free_subsystem:
            kind = "subsystem"
        else:
            kind = "none"
        rows.append((i, b.multiplicity, b.dimension, kind))
    return rows, {"hilbert_dim": gens.dim}


def _task_zeno_limit(cfg):
    o = cfg.options
    h = cfg.matrix("H")
    family = zeno.ProjectionFamily(tuple(cfg.matrix(p) for p in o["projections"]))
    rows = []
    for j, name in enumerate(o["projections"]):
        for n in o["steps"]:
            res = zeno.zeno_projected_evolution(h, family, j, o["t"], n, cfg.constants)
            rows.append((name, n, res.error))
    return rows, {"t": o["t"]}


def _task_zeno_threshold(cfg):
    o = cfg.options
    h_r = cfg.matrix("H_R")
    model = zeno.StrongCouplingModel.from_pointer_coupling(
        o["pointer_values"], o["pointer_energies"], h_r, cfg.matrix("R"), cfg.matrix("V"))
    n = len(o["pointer_values"])
    for key in ("from_state", "to_state"):
        if o[key] >= n:
            raise ConfigError(f"options.{key}: index {o[key]} out of range for {n} pointer states",
                              f"options.{key}")
    reg = _regularization(cfg, _spacing_width(np.linalg.eigvalsh(h_r)))
    bath = cfg.matrix(o["bath_operator"]) if o["bath_operator"] else None
    l, k = o["from_state"], o["to_state"]
    rep = zeno.strong_coupling_rate(model, bath, l, k, reg, cfg.constants)
    gap = model.threshold_gap(l, k)
    row = (l, k, gap, zeno.zeno_threshold_check(model, l, k), _rate_cell(rep), rep.forbidden_reason)
    return [row], {"regularization_width": reg.width}


def model_params_from_config(cfg: AnalysisConfig) -> zeno.ThreeLevelModelParams:
    p = cfg.model_params
    try:
        return zeno.ThreeLevelModelParams(
            p["omega_13"], p["rabi"], tuple(p["mode_frequencies"]),
            tuple(complex(*z) for z in p["couplings"]),
            tuple(complex(*z) for z in p["pump_amplitudes"]), p["g13"], p["n_max"])
    except ValueError as exc:
        raise ConfigError(f"model_params: {exc}", "model_params") from exc


def _task_three_level(cfg):
    params = model_params_from_config(cfg)
    reg = None
    if cfg.regularization["width"] != "auto":
        reg = golden_rule.DeltaRegularization(cfg.regularization["kind"], cfg.regularization["width"])
    report = zeno.three_level_zeno_report(params, cfg.constants, reg, tuple(cfg.options["ladder"]))
    if not report.truncation_converged:
        raise TruncationUnconvergedError(
            f"model_params.n_max: ladder rates or dressed ground energies moved by more than "
            f"{zeno.TRUNCATION_RTOL:g} when n_max was raised from {params.n_max}")
    rows = [(r.scale, r.pump_shift, r.epsilon_minus, r.ground_minus, r.threshold_gap, r.threshold,
             FORBIDDEN if r.forbidden else r.rate, r.reason) for r in report.rows]
    meta = {"epsilon_plus": report.epsilon_plus, "epsilon_minus": report.epsilon_minus,
            "ground_minus": float(report.ground_energies["-"]),
            "analytic_ground": report.analytic_ground,
            "sign_assumption": report.sign_assumption, "monotone": report.monotone,
            "verdict_forbidden": report.verdict_forbidden}
    return rows, meta


TASK_RUNNERS = {
    "golden-rule": _task_golden_rule,
    "weak-coupling": _task_weak_coupling,
    "minimal-scan": _task_minimal_scan,
    "floquet": _task_floquet,
    "bangbang": _task_bangbang,
    "dfs": _task_dfs,
    "subsystems": _task_subsystems,
    "zeno-limit": _task_zeno_limit,
    "zeno-threshold": _task_zeno_threshold,
    "three-level": _task_three_level,
}


def run(cfg: AnalysisConfig) -> ResultTable:
    """Execute the configured task. Deterministic for a given config and seed."""
    start = time.perf_counter()
    try:
        rows, meta = TASK_RUNNERS[cfg.task](cfg)
    except ForbidTransError as exc:
        exc.args = (f"task {cfg.task}: {exc}",) + exc.args[1:]
        raise
    metadata = {"task": cfg.task, "config_sha256": cfg.digest(), "version": __version__,
                "kernel_backend": BACKEND, "seed": cfg.seed}
    metadata.update(meta)
    if cfg.warnings:
        metadata["warnings"] = list(cfg.warnings)
    metadata["elapsed_seconds"] = time.perf_counter() - start
    return ResultTable(COLUMN_DOCS[cfg.task].split(","), rows, metadata)


def _cell(value, spec) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if math.isnan(v):
            return "nan"
        return format(v, spec)
    return str(value)


def emit(table: ResultTable, fmt: str = "csv") -> str:
    """Render a table. CSV carries 17 significant digits and no metadata, so it is byte-stable."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.columns)
        for row in table.rows:
            writer.writerow([_cell(v, ".17g") for v in row])
        return buf.getvalue()
    if fmt == "text":
        cells = [list(table.columns)] + [[_cell(v, ".6g") for v in row] for row in table.rows]
        widths = [max(len(r[j]) for r in cells) for j in range(len(table.columns))]
        lines = [f"# {k}: {_cell(v, '.6g')}" for k, v in table.metadata.items()]
        for r in cells:
            lines.append("  ".join(c.rjust(w) for c, w in zip(r, widths)).rstrip())
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown output format {fmt!r}; expected csv or text")
