"""Pre-averaging (modulated realized covariance) estimators for noisy,
non-synchronous high-frequency data, with simulators and a Monte Carlo harness."""
from ._backend import BACKEND
from .errors import ConfigError, InvalidInput, InvalidModel, NumericFailure
from .estimators import (EstimateReport, JumpDecomposition, mrc, mrc_fast_exponential, oracle_avar,
                         realized_kernel, studentize, threshold_estimators, tricity, v_C_v_J)
from .timegrid import SyncGrid, TickSchedule, refresh_times, synchronize
from .weights import WeightSpec, from_name, make_double_exponential, make_piecewise_linear, make_tent

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "EstimateReport", "InvalidInput", "InvalidModel", "JumpDecomposition",
    "NumericFailure", "SyncGrid", "TickSchedule", "WeightSpec", "from_name", "make_double_exponential",
    "make_piecewise_linear", "make_tent", "mrc", "mrc_fast_exponential", "oracle_avar", "realized_kernel",
    "refresh_times", "studentize", "synchronize", "threshold_estimators", "tricity", "v_C_v_J",
]
