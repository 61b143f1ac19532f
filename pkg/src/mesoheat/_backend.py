"""Select the stencil kernels at import time.

The compiled module is used when it was built; setting ``MESOHEAT_PURE_PYTHON=1``
forces the numpy fallback.
"""
import os

from . import _kernels_py

if os.environ.get("MESOHEAT_PURE_PYTHON", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

if _compiled is not None:
    ring_evolve = _compiled.ring_evolve
    line_evolve = _compiled.line_evolve
    BACKEND = "cython"
else:
    ring_evolve = _kernels_py.ring_evolve
    line_evolve = _kernels_py.line_evolve
    BACKEND = "python"
