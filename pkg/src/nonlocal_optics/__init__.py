"""Energy-time entangled photon pairs, nonlocal interferometry and light-cone amplitudes."""

from .errors import (
    ConvergenceError,
    DomainError,
    FarFieldWarning,
    GridError,
    NonlocalOpticsError,
    ParameterError,
    RegimeWarning,
)
from .kernels import BACKEND
from .scan import ScanResult

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConvergenceError",
    "DomainError",
    "FarFieldWarning",
    "GridError",
    "NonlocalOpticsError",
    "ParameterError",
    "RegimeWarning",
    "ScanResult",
    "__version__",
]
