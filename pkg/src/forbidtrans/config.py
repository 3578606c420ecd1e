"""Declarative analysis files.

A config is a YAML document::

    task: weak-coupling
    constants: {hbar: 1.0}
    matrices:
      H_S: [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]     # entries are [re, im] pairs
      S:   [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]
    reservoir:
      ground_energy: 0.0
      excited_energies: {start: 1.0, stop: 3.0, count: 200}
      couplings: 0.01
    regularization: {kind: gaussian, width: auto}
    seed: 0
    options: {from_state: 1, to_state: 0}

Matrices are symmetrized on ingestion; corrections above 1e-9 are kept in
``AnalysisConfig.warnings`` and surface in the result metadata.
"""
from __future__ import annotations

import hashlib
import json
import re
import warnings
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import ConfigError, DimensionMismatchError
from .operators import SYMMETRIZE_WARN, PhysicalConstants

TASKS = ("golden-rule", "weak-coupling", "minimal-scan", "floquet", "bangbang",
         "dfs", "subsystems", "zeno-limit", "zeno-threshold", "three-level")

TOP_LEVEL_KEYS = ("task", "constants", "matrices", "reservoir", "drive", "model_params",
                  "regularization", "seed", "tolerances", "options")

TOLERANCE_KEYS = ("nullspace",)

_COLLECTIVE = re.compile(r"^\s*collective\(\s*(\d+)\s*\)\s*$")

# task -> (required blocks, required matrices, option defaults; REQUIRED marks mandatory options)
REQUIRED = object()
TASK_SPECS = {
    "golden-rule": (("matrices",), ("H0", "V"), {"from_state": None, "to_state": None}),
    "weak-coupling": (("matrices", "reservoir"), ("H_S", "S"), {"from_state": None, "to_state": None}),
    "minimal-scan": ((), (), {"splittings": REQUIRED, "coupling": 1.0, "r": 1.0}),
    "floquet": (("drive",), (), {"grid_points": 64}),
    "bangbang": (("drive", "matrices", "reservoir"), ("S",),
                 {"from_state": 0, "to_state": 1, "n_max": 16, "grid_points": None}),
    "dfs": ((), (), {"generators": REQUIRED}),
    "subsystems": ((), (), {"generators": REQUIRED}),
    "zeno-limit": (("matrices",), ("H",),
                   {"projections": REQUIRED, "t": 1.0, "steps": [1, 2, 4, 8, 16, 32, 64, 128, 256]}),
    "zeno-threshold": (("matrices",), ("H_R", "R", "V"),
                       {"pointer_values": REQUIRED, "pointer_energies": REQUIRED,
                        "from_state": 0, "to_state": 1, "bath_operator": None}),
    "three-level": (("model_params",), (), {"ladder": [0, 1, 2, 4, 8]}),
}

MODEL_PARAM_KEYS = ("omega_13", "rabi", "mode_frequencies", "couplings", "pump_amplitudes", "g13", "n_max")


def _fail(key, message):
    raise ConfigError(f"{key}: {message}", key)


def _number(value, key) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(key, f"expected a number, got {value!r}")
    return float(value)


def _integer(value, key) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(key, f"expected an integer, got {value!r}")
    return int(value)


def _complex(value, key) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            _fail(key, f"complex entries are [re, im] pairs, got {value!r}")
        return complex(_number(value[0], key), _number(value[1], key))
    return complex(_number(value, key), 0.0)


def _pair(z: complex) -> list:
    return [float(z.real), float(z.imag)]


def parse_matrix(value, key) -> np.ndarray:
    """Nested rows of ``[re, im]`` pairs (bare reals are accepted) to a square complex array."""
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        _fail(key, "matrix must be a nonempty list of rows")
    n = len(value)
    if any(len(r) != n for r in value):
        _fail(key, f"matrix must be square, got row lengths {[len(r) for r in value]}")
    return np.array([[_complex(x, f"{key}[{i}][{j}]") for j, x in enumerate(r)]
                     for i, r in enumerate(value)], dtype=complex)


def matrix_to_data(m: np.ndarray) -> list:
    return [[_pair(x) for x in row] for row in np.asarray(m)]


def _float_list(value, key, allow_empty=False) -> list:
    if not isinstance(value, list) or (not value and not allow_empty):
        _fail(key, "expected a nonempty list of numbers")
    return [_number(x, f"{key}[{i}]") for i, x in enumerate(value)]


def _complex_list(value, key) -> list:
    if not isinstance(value, list) or not value:
        _fail(key, "expected a nonempty list")
    return [_complex(x, f"{key}[{i}]") for i, x in enumerate(value)]


def _check_keys(block, allowed, key):
    if not isinstance(block, dict):
        _fail(key, f"expected a mapping, got {type(block).__name__}")
    for k in block:
        if k not in allowed:
            _fail(f"{key}.{k}" if key else str(k), f"unknown key; allowed: {', '.join(allowed)}")


@dataclass(eq=False)
class AnalysisConfig:
    task: str
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)
    matrices: dict = field(default_factory=dict)
    reservoir: dict | None = None
    drive: list | None = None
    model_params: dict | None = None
    regularization: dict = field(default_factory=lambda: {"kind": "gaussian", "width": "auto"})
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        """Canonical plain-data form; symmetrization warnings are not part of it."""
        out = {"task": self.task, "constants": {"hbar": self.constants.hbar}}
        if self.matrices:
            out["matrices"] = {k: matrix_to_data(v) for k, v in self.matrices.items()}
        if self.reservoir is not None:
            out["reservoir"] = self.reservoir
        if self.drive is not None:
            out["drive"] = self.drive
        if self.model_params is not None:
            out["model_params"] = self.model_params
        out["regularization"] = self.regularization
        out["seed"] = self.seed
        if self.tolerances:
            out["tolerances"] = self.tolerances
        out["options"] = self.options
        return out

    def __eq__(self, other):
        if not isinstance(other, AnalysisConfig):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def matrix(self, name) -> np.ndarray:
        if name not in self.matrices:
            raise ConfigError(f"matrices.{name}: not defined", f"matrices.{name}")
        return self.matrices[name]


def _ingest_matrix(raw, key, notes) -> np.ndarray:
    m = parse_matrix(raw, key)
    h = (m + m.conj().T) / 2
    correction = float(np.max(np.abs(h - m)))
    if correction > SYMMETRIZE_WARN:
        msg = f"{key}: symmetrized, largest correction {correction:.3e}"
        notes.append(msg)
        warnings.warn(msg, stacklevel=3)
    return h


def _matrix_ref(value, key, matrices, notes, inline_name):
    """A matrix given by name or inline; inline matrices are registered under ``inline_name``."""
    if isinstance(value, str):
        if value not in matrices:
            _fail(key, f"refers to undefined matrix {value!r}")
        return value
    matrices[inline_name] = _ingest_matrix(value, key, notes)
    return inline_name


def _parse_reservoir(raw, matrices, notes) -> dict:
    key = "reservoir"
    common = ("cutoff_energy", "density_exponent")
    explicit = ("mode_energies", "coupling_elements", "initial_distribution")
    single = ("ground_energy", "excited_energies", "couplings")
    _check_keys(raw, explicit + single + common, key)
    out = {}
    if "mode_energies" in raw:
        for k in explicit:
            if k not in raw:
                _fail(f"{key}.{k}", "required with reservoir.mode_energies")
        out["mode_energies"] = _float_list(raw["mode_energies"], f"{key}.mode_energies")
        out["coupling_elements"] = _matrix_ref(raw["coupling_elements"], f"{key}.coupling_elements",
                                               matrices, notes, "reservoir_coupling")
        out["initial_distribution"] = _float_list(raw["initial_distribution"],
                                                  f"{key}.initial_distribution")
        n = len(out["mode_energies"])
        r = matrices[out["coupling_elements"]]
        if r.shape[0] != n or len(out["initial_distribution"]) != n:
            raise DimensionMismatchError(
                f"reservoir: matrix {out['coupling_elements']!r} is {r.shape[0]}x{r.shape[0]}, "
                f"mode_energies has {n} entries, initial_distribution has "
                f"{len(out['initial_distribution'])}")
    elif "excited_energies" in raw:
        exc = raw["excited_energies"]
        if isinstance(exc, dict):
            _check_keys(exc, ("start", "stop", "count"), f"{key}.excited_energies")
            for k in ("start", "stop", "count"):
                if k not in exc:
                    _fail(f"{key}.excited_energies.{k}", "required")
            out["excited_energies"] = {"start": _number(exc["start"], f"{key}.excited_energies.start"),
                                       "stop": _number(exc["stop"], f"{key}.excited_energies.stop"),
                                       "count": _integer(exc["count"], f"{key}.excited_energies.count")}
            if out["excited_energies"]["count"] < 1:
                _fail(f"{key}.excited_energies.count", "must be >= 1")
        else:
            out["excited_energies"] = _float_list(exc, f"{key}.excited_energies")
        out["ground_energy"] = _number(raw.get("ground_energy", 0.0), f"{key}.ground_energy")
        if "couplings" not in raw:
            _fail(f"{key}.couplings", "required with reservoir.excited_energies")
        c = raw["couplings"]
        if isinstance(c, list):
            out["couplings"] = [_pair(z) for z in _complex_list(c, f"{key}.couplings")]
        else:
            out["couplings"] = _number(c, f"{key}.couplings")
    else:
        _fail(key, "needs either mode_energies (explicit form) or excited_energies (single-excitation form)")
    if "cutoff_energy" in raw:
        out["cutoff_energy"] = _number(raw["cutoff_energy"], f"{key}.cutoff_energy")
        if not out["cutoff_energy"] > 0:
            _fail(f"{key}.cutoff_energy", "must be positive")
    if "density_exponent" in raw:
        out["density_exponent"] = _number(raw["density_exponent"], f"{key}.density_exponent")
    return out


def _parse_drive(raw, matrices, notes) -> list:
    if not isinstance(raw, list) or not raw:
        _fail("drive", "expected a nonempty list of {hamiltonian, duration} segments")
    out = []
    for i, seg in enumerate(raw):
        key = f"drive[{i}]"
        _check_keys(seg, ("hamiltonian", "duration"), key)
        for k in ("hamiltonian", "duration"):
            if k not in seg:
                _fail(f"{key}.{k}", "required")
        name = _matrix_ref(seg["hamiltonian"], f"{key}.hamiltonian", matrices, notes, f"drive_{i}")
        dt = _number(seg["duration"], f"{key}.duration")
        if not dt > 0:
            _fail(f"{key}.duration", "must be positive")
        out.append({"hamiltonian": name, "duration": dt})
    dims = {matrices[s["hamiltonian"]].shape[0] for s in out}
    if len(dims) != 1:
        names = [s["hamiltonian"] for s in out]
        raise DimensionMismatchError(f"drive: segment matrices {names} have different dimensions")
    return out


def _parse_model_params(raw) -> dict:
    key = "model_params"
    _check_keys(raw, MODEL_PARAM_KEYS, key)
    for k in MODEL_PARAM_KEYS:
        if k not in raw:
            _fail(f"{key}.{k}", "required")
    out = {
        "omega_13": _number(raw["omega_13"], f"{key}.omega_13"),
        "rabi": _number(raw["rabi"], f"{key}.rabi"),
        "mode_frequencies": _float_list(raw["mode_frequencies"], f"{key}.mode_frequencies"),
        "couplings": [_pair(z) for z in _complex_list(raw["couplings"], f"{key}.couplings")],
        "pump_amplitudes": [_pair(z) for z in _complex_list(raw["pump_amplitudes"],
                                                            f"{key}.pump_amplitudes")],
        "g13": _number(raw["g13"], f"{key}.g13"),
        "n_max": _integer(raw["n_max"], f"{key}.n_max"),
    }
    n = len(out["mode_frequencies"])
    for k in ("couplings", "pump_amplitudes"):
        if len(out[k]) != n:
            _fail(f"{key}.{k}", f"has {len(out[k])} entries, mode_frequencies has {n}")
    return out


def _parse_generators(value, matrices, key):
    if isinstance(value, str):
        m = _COLLECTIVE.match(value)
        if not m:
            _fail(key, f"expected 'collective(n_qubits)' or a list of matrix names, got {value!r}")
        if int(m.group(1)) < 2:
            _fail(key, "collective generators need at least 2 qubits")
        return f"collective({int(m.group(1))})"
    if not isinstance(value, list) or not value:
        _fail(key, "expected 'collective(n_qubits)' or a nonempty list of matrix names")
    for i, name in enumerate(value):
        if not isinstance(name, str) or name not in matrices:
            _fail(f"{key}[{i}]", f"refers to undefined matrix {name!r}")
    _same_dims(matrices, value)
    return list(value)


def _same_dims(matrices, names):
    dims = {n: matrices[n].shape[0] for n in names}
    if len(set(dims.values())) > 1:
        first = names[0]
        other = next(n for n in names if dims[n] != dims[first])
        raise DimensionMismatchError(
            f"matrices {first!r} ({dims[first]}x{dims[first]}) and {other!r} "
            f"({dims[other]}x{dims[other]}) have different dimensions")


def _state_option(value, key):
    if value is None:
        return None
    v = _integer(value, key)
    if v < 0:
        _fail(key, "state indices are nonnegative")
    return v


def _parse_options(task, raw, matrices) -> dict:
    defaults = TASK_SPECS[task][2]
    raw = {} if raw is None else raw
    _check_keys(raw, tuple(defaults), "options")
    out = {}
    for k, default in defaults.items():
        key = f"options.{k}"
        if k not in raw:
            if default is REQUIRED:
                _fail(key, f"required for task {task}")
            out[k] = default
            continue
        v = raw[k]
        if k in ("from_state", "to_state"):
            out[k] = _state_option(v, key)
        elif k in ("grid_points", "n_max"):
            out[k] = None if v is None else _integer(v, key)
        elif k in ("coupling", "r", "t"):
            out[k] = _number(v, key)
        elif k in ("splittings", "pointer_values", "pointer_energies", "ladder"):
            out[k] = _float_list(v, key)
        elif k == "steps":
            if not isinstance(v, list) or not v:
                _fail(key, "expected a nonempty list of step counts")
            out[k] = [_integer(x, f"{key}[{i}]") for i, x in enumerate(v)]
            if min(out[k]) < 1:
                _fail(key, "step counts must be >= 1")
        elif k == "generators":
            out[k] = _parse_generators(v, matrices, key)
        elif k == "projections":
            if not isinstance(v, list) or not v:
                _fail(key, "expected a nonempty list of projection matrix names")
            for i, name in enumerate(v):
                if not isinstance(name, str) or name not in matrices:
                    _fail(f"{key}[{i}]", f"refers to undefined matrix {name!r}")
            out[k] = list(v)
        elif k == "bath_operator":
            if v is not None and (not isinstance(v, str) or v not in matrices):
                _fail(key, f"refers to undefined matrix {v!r}")
            out[k] = v
        else:  # pragma: no cover - every option key is handled above
            out[k] = v
    return out


def _validate_task_dims(cfg: AnalysisConfig):
    t, m, o = cfg.task, cfg.matrices, cfg.options
    if t in ("golden-rule", "weak-coupling"):
        names = ("H0", "V") if t == "golden-rule" else ("H_S", "S")
        _same_dims(m, list(names))
    elif t == "bangbang":
        seg = cfg.drive[0]["hamiltonian"]
        _same_dims(m, [seg, "S"])
    elif t == "zeno-limit":
        _same_dims(m, ["H"] + o["projections"])
    elif t == "zeno-threshold":
        _same_dims(m, ["H_R", "R"] + ([o["bath_operator"]] if o["bath_operator"] else []))
        n = len(o["pointer_values"])
        if len(o["pointer_energies"]) != n:
            _fail("options.pointer_energies",
                  f"has {len(o['pointer_energies'])} entries, pointer_values has {n}")
        if m["V"].shape[0] != n:
            raise DimensionMismatchError(
                f"matrix 'V' is {m['V'].shape[0]}x{m['V'].shape[0]} but options.pointer_values "
                f"has {n} entries")


def config_from_data(data, source: str = "config") -> AnalysisConfig:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping", None)
    _check_keys(data, TOP_LEVEL_KEYS, "")
    if "task" not in data:
        _fail("task", "required")
    task = data["task"]
    if task not in TASKS:
        _fail("task", f"unknown task {task!r}; expected one of {', '.join(TASKS)}")

    consts = data.get("constants") or {}
    _check_keys(consts, ("hbar",), "constants")
    hbar = _number(consts.get("hbar", 1.0), "constants.hbar")
    if not hbar > 0:
        _fail("constants.hbar", "must be positive")

    notes: list = []
    matrices = {}
    raw_m = data.get("matrices") or {}
    if not isinstance(raw_m, dict):
        _fail("matrices", "expected a mapping of name -> matrix")
    for name, raw in raw_m.items():
        matrices[str(name)] = _ingest_matrix(raw, f"matrices.{name}", notes)

    blocks, needed, _ = TASK_SPECS[task]
    for b in blocks:
        if b != "matrices" and data.get(b) is None:
            _fail(b, f"block required for task {task}")
    for name in needed:
        if name not in matrices:
            _fail(f"matrices.{name}", f"required for task {task}")

    reservoir = _parse_reservoir(data["reservoir"], matrices, notes) \
        if data.get("reservoir") is not None else None
    drive = _parse_drive(data["drive"], matrices, notes) if data.get("drive") is not None else None
    model_params = _parse_model_params(data["model_params"]) \
        if data.get("model_params") is not None else None

    reg_raw = data.get("regularization") or {}
    _check_keys(reg_raw, ("kind", "width"), "regularization")
    kind = reg_raw.get("kind", "gaussian")
    if kind not in ("gaussian", "lorentzian"):
        _fail("regularization.kind", f"expected gaussian or lorentzian, got {kind!r}")
    width = reg_raw.get("width", "auto")
    if width != "auto":
        width = _number(width, "regularization.width")
        if not width > 0:
            _fail("regularization.width", "must be positive or 'auto'")

    seed = _integer(data.get("seed", 0), "seed")
    tol_raw = data.get("tolerances") or {}
    _check_keys(tol_raw, TOLERANCE_KEYS, "tolerances")
    tolerances = {k: _number(v, f"tolerances.{k}") for k, v in tol_raw.items()}

    options = _parse_options(task, data.get("options"), matrices)
    cfg = AnalysisConfig(task, PhysicalConstants(hbar), matrices, reservoir, drive, model_params,
                         {"kind": kind, "width": width}, seed, tolerances, options, notes)
    _validate_task_dims(cfg)
    return cfg


def parse_config(text: str) -> AnalysisConfig:
    """Parse and validate a YAML analysis document."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigError(f"parse error at {where}: {getattr(exc, 'problem', exc)}", None) from exc
    return config_from_data(data)


def load_config(path) -> AnalysisConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(cfg: AnalysisConfig) -> str:
    """YAML text that parses back to an equal config."""
    return yaml.safe_dump(cfg.to_dict(), sort_keys=False, default_flow_style=None)


def collective_size(spec) -> int | None:
    if isinstance(spec, str):
        m = _COLLECTIVE.match(spec)
        return int(m.group(1)) if m else None
    return None
