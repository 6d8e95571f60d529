"""Jacobi heat and Poisson kernels: certified series, independent routes, fitted bounds and checks."""
from .envelopes import EnvelopeConstants, GridSpec, ReportRow, fit_constants
from .kernels import HeatPoint, KernelValue, PrecisionFloorError, heat_series
from .specfun import JacobiParams
from .verify import CheckResult, run_all

__all__ = [
    "JacobiParams",
    "HeatPoint",
    "KernelValue",
    "PrecisionFloorError",
    "heat_series",
    "GridSpec",
    "ReportRow",
    "EnvelopeConstants",
    "fit_constants",
    "CheckResult",
    "run_all",
]
__version__ = "0.1.0"
