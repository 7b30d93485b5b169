"""Hot kernels with a compiled fast path.

The Cython extension is used when importable; otherwise the pure-Python
module is loaded and a warning is emitted. Set ``SPEECHKIT_PURE_PYTHON=1`` to
force the fallback (used by the benchmark and the fallback tests).
"""

import os
import warnings

from . import _align_py

if os.environ.get("SPEECHKIT_PURE_PYTHON", "") in ("", "0"):
    try:
        from . import _align_ext as _impl
    except ImportError:
        warnings.warn(
            "speechkit: compiled alignment kernel not available, falling back "
            "to pure Python (rebuild with `pip install -e .`)",
            RuntimeWarning,
        )
        _impl = _align_py
else:
    _impl = _align_py

BACKEND = "cython" if _impl is not _align_py else "python"

align_codes = _impl.align_codes
align_error_counts = _impl.align_error_counts

EQ, SUB, DEL, INS = _align_py.EQ, _align_py.SUB, _align_py.DEL, _align_py.INS

__all__ = ["BACKEND", "align_codes", "align_error_counts", "EQ", "SUB", "DEL", "INS"]
