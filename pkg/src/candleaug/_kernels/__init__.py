"""Kernel backend selection.

Prefers the compiled extension; falls back to NumPy when it is missing or
when CANDLEAUG_PURE_PYTHON is set to a non-empty value. `BACKEND` names the
active implementation so callers (and the benchmark) can report it.
"""

import os

from . import pykernels

if os.environ.get("CANDLEAUG_PURE_PYTHON"):
    _impl = pykernels
    BACKEND = "numpy"
else:
    try:
        from . import _ckern as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = pykernels
        BACKEND = "numpy"

gaf_outer = _impl.gaf_outer
conv2d_forward = _impl.conv2d_forward
conv2d_param_grads = _impl.conv2d_param_grads

__all__ = ["BACKEND", "gaf_outer", "conv2d_forward", "conv2d_param_grads", "pykernels"]
