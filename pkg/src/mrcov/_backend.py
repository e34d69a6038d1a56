"""Pick the compiled kernels when available, the NumPy versions otherwise.

Set ``MRCOV_BACKEND=python`` to force the fallback (used by the
equivalence tests and the benchmark).
"""
import logging
import os

from . import _pure

logger = logging.getLogger(__name__)

if os.environ.get("MRCOV_BACKEND", "").lower() == "python":
    _impl = _pure
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        logger.info("compiled kernels unavailable; using NumPy fallback")
        _impl = _pure
        BACKEND = "python"

refresh_scan = _impl.refresh_scan
hitting_scan = _impl.hitting_scan
exp_two_sided = _impl.exp_two_sided
window_sum = _impl.window_sum
tridiagonal_solve = _impl.tridiagonal_solve


def implementations():
    """Both kernel sets, keyed by backend name (``cython`` only if built)."""
    out = {"python": _pure}
    try:
        from . import _kernels
    except ImportError:
        return out
    out["cython"] = _kernels
    return out
