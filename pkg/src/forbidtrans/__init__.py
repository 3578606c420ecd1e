"""forbidtrans: numerics for forbidden and suppressed quantum transitions.

Modules
-------
operators    dense Hermitian/unitary helpers, qubit and Fock operators
golden_rule  golden-rule and reservoir-averaged transition rates
floquet      periodic drives, Floquet states, comb spectra, bang-bang rates
dfs          decoherence-free subspaces and subsystems
zeno         projected evolution, strong-coupling rates, three-level atom
config, runner, cli
             declarative analysis files and the command-line front end
"""
from ._kernels import BACKEND
from .errors import (
    AmbiguousGroundStateError,
    ConfigError,
    DimensionMismatchError,
    ForbidTransError,
    InvalidOperatorError,
    StructureError,
    StructureNotFoundError,
    TruncationUnconvergedError,
)
from .operators import DEFAULT_CONSTANTS, PhysicalConstants

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DEFAULT_CONSTANTS",
    "PhysicalConstants",
    "ForbidTransError",
    "InvalidOperatorError",
    "DimensionMismatchError",
    "StructureError",
    "AmbiguousGroundStateError",
    "StructureNotFoundError",
    "TruncationUnconvergedError",
    "ConfigError",
    "__version__",
]
