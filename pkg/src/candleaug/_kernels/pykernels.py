"""Pure-NumPy implementations of the hot kernels.

Selected at import time when the compiled extension is unavailable (or when
CANDLEAUG_PURE_PYTHON is set). Must stay numerically interchangeable with
the compiled versions.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def gaf_outer(x: np.ndarray) -> np.ndarray:
    """Angular-sum Gramian of a normalized series: x_i x_j - s_i s_j with
    s = sqrt(1 - x^2), clipped to the cosine range [-1, 1]."""
    x = np.ascontiguousarray(x, dtype=float)
    s = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    m = np.outer(x, x) - np.outer(s, s)
    return np.clip(m, -1.0, 1.0)


def conv2d_forward(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Valid cross-correlation, stride 1.

    x: (N, C, H, W); kernels: (F, C, KH, KW); bias: (F,) -> (N, F, OH, OW).
    """
    win = sliding_window_view(x, kernels.shape[2:], axis=(2, 3))  # (N,C,OH,OW,KH,KW)
    out = np.einsum("ncijuv,fcuv->nfij", win, kernels, optimize=True)
    return out + bias[None, :, None, None]


def conv2d_param_grads(x: np.ndarray, dout: np.ndarray, kh: int, kw: int) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of a valid conv's kernels and bias given upstream dout.

    x: (N, C, H, W); dout: (N, F, OH, OW) -> (F, C, KH, KW), (F,).
    """
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))
    dk = np.einsum("ncijuv,nfij->fcuv", win, dout, optimize=True)
    db = dout.sum(axis=(0, 2, 3))
    return dk, db
