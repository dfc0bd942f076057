"""Angular-field encoding of price series and its exact inverse.

A series is min-max normalized to [0, 1], mapped to polar angles
phi = arccos(x), and spread into the symmetric matrix cos(phi_i + phi_j).
Because the normalized values are nonnegative, the diagonal determines the
series exactly: x_i = sqrt((m[i,i] + 1) / 2). A four-channel tensor encodes
one OHLC window, keeping the per-channel min/max so prices can be restored.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .ohlc import CandleWindow, repair

CHANNELS = ("open", "high", "low", "close")


class GafError(ValueError):
    pass


class ConstantSeries(GafError):
    pass


class DiagonalOutOfRange(GafError):
    pass


class ChannelScale(NamedTuple):
    min: float
    max: float


@dataclass(frozen=True)
class NormalizedSeries:
    """Values in [0, 1] plus the source min/max needed for inversion."""

    values: np.ndarray
    scale: ChannelScale


@dataclass(frozen=True)
class GafTensor:
    """Four per-price-channel T x T matrices plus their normalization scales."""

    channels: np.ndarray           # (4, T, T)
    scales: tuple[ChannelScale, ...]

    @property
    def size(self) -> int:
        return int(self.channels.shape[-1])

    def copy(self) -> "GafTensor":
        return GafTensor(self.channels.copy(), self.scales)

    def to_record(self) -> dict:
        """Flat record for the line-delimited dataset format."""
        return {
            "T": self.size,
            "channels": [m.ravel().tolist() for m in self.channels],
            "scales": [[s.min, s.max] for s in self.scales],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "GafTensor":
        t = int(rec["T"])
        channels = np.array(rec["channels"], dtype=float).reshape(4, t, t)
        scales = tuple(ChannelScale(float(lo), float(hi)) for lo, hi in rec["scales"])
        return cls(channels, scales)


def normalize(series: Sequence[float]) -> NormalizedSeries:
    """Min-max normalize to [0, 1], recording the scale for inversion."""
    arr = np.asarray(series, dtype=float)
    if arr.size < 2:
        raise GafError("need at least two points to normalize")
    lo = float(arr.min())
    hi = float(arr.max())
    if hi == lo:
        raise ConstantSeries(f"constant series (value {lo}) cannot be normalized")
    return NormalizedSeries((arr - lo) / (hi - lo), ChannelScale(lo, hi))


def denormalize(n: NormalizedSeries) -> np.ndarray:
    """Inverse of normalize: x = v * (max - min) + min."""
    lo, hi = n.scale
    return n.values * (hi - lo) + lo


def gaf_encode(n: NormalizedSeries) -> np.ndarray:
    """Encode a normalized series as the matrix cos(phi_i + phi_j)."""
    return _kernels.gaf_outer(n.values)


def gaf_decode(m: np.ndarray) -> np.ndarray:
    """Recover normalized values from a matrix diagonal: sqrt((d + 1) / 2)."""
    diag = np.diagonal(np.asarray(m, dtype=float))
    if np.any(diag < -1.0) or np.any(diag > 1.0):
        raise DiagonalOutOfRange(f"diagonal outside [-1, 1]: {diag}")
    return np.sqrt((diag + 1.0) / 2.0)


def encode_window(w: CandleWindow) -> GafTensor:
    """Independently normalize and encode each of the four price channels."""
    prices = w.to_array()  # (T, 4)
    matrices = []
    scales = []
    for idx, name in enumerate(CHANNELS):
        try:
            n = normalize(prices[:, idx])
        except ConstantSeries as exc:
            raise ConstantSeries(f"channel '{name}' is constant") from exc
        matrices.append(gaf_encode(n))
        scales.append(n.scale)
    return GafTensor(np.stack(matrices), tuple(scales))


def decode_tensor(t: GafTensor) -> CandleWindow:
    """Invert a tensor back to a candle window.

    Each channel is decoded from its diagonal and denormalized; bars are then
    passed through repair so high/low always bound open/close (perturbed
    diagonals can break the ordering).
    """
    cols = []
    for idx in range(4):
        values = gaf_decode(t.channels[idx])
        cols.append(denormalize(NormalizedSeries(values, t.scales[idx])))
    prices = np.stack(cols, axis=1)  # (T, 4)
    return CandleWindow(tuple(repair(row) for row in prices))
