"""Backend selection for the amplification-factor kernels.

The compiled extension is used when it imports; set ``IMEXFLOW_PURE_PYTHON=1``
to force the pure-Python fallback.
"""
import os

from . import _kernels_py

if os.environ.get("IMEXFLOW_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

rk_amplification = _impl.rk_amplification
sdc_amplification = _impl.sdc_amplification

__all__ = ["BACKEND", "rk_amplification", "sdc_amplification"]
