"""OHLC bar anatomy, validity repair, trend detection, and rule-based
candlestick pattern matching.

Every function here is pure; a window either matches exactly one pattern
label (the first hit in a fixed precedence order) or none. All predicates
are built from ratios and orderings, so labels are invariant under uniform
positive scaling of the prices in a window.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np


class OhlcError(ValueError):
    """Base class for OHLC domain errors."""


class NonPositivePrice(OhlcError):
    pass


class InvalidCandle(OhlcError):
    pass


class EmptySequence(OhlcError):
    pass


class WindowTooShort(OhlcError):
    pass


class Direction(enum.Enum):
    WHITE = "white"  # close above open
    BLACK = "black"  # close below open
    DOJI = "doji"    # close equals open


class Trend(enum.Enum):
    UP = "up"
    DOWN = "down"
    NONE = "none"


class PatternLabel(enum.IntEnum):
    """The eight pattern classes (codes 1-8) plus NONE (0)."""

    NONE = 0
    MORNING_STAR = 1
    EVENING_STAR = 2
    BULLISH_ENGULFING = 3
    BEARISH_ENGULFING = 4
    SHOOTING_STAR = 5
    INVERTED_HAMMER = 6
    BULLISH_HARAMI = 7
    BEARISH_HARAMI = 8


@dataclass(frozen=True)
class Candle:
    """One OHLC bar. High/low must bound open/close and all prices are > 0."""

    open: float
    high: float
    low: float
    close: float

    def __post_init__(self) -> None:
        if min(self.open, self.high, self.low, self.close) <= 0:
            raise NonPositivePrice(f"prices must be positive: {self!r}")
        if self.high < max(self.open, self.close) or self.low > min(self.open, self.close):
            raise InvalidCandle(f"high/low do not bound open/close: {self!r}")


@dataclass(frozen=True)
class CandleAnatomy:
    """Body/shadow decomposition of a bar: body + upper + lower = high - low."""

    body: float
    upper_shadow: float
    lower_shadow: float
    direction: Direction


@dataclass(frozen=True)
class CandleWindow:
    """A fixed-length, ordered run of candles."""

    candles: tuple[Candle, ...]

    def __post_init__(self) -> None:
        if not self.candles:
            raise EmptySequence("window must contain at least one candle")

    def __len__(self) -> int:
        return len(self.candles)

    def __iter__(self) -> Iterator[Candle]:
        return iter(self.candles)

    def __getitem__(self, i: int) -> Candle:
        return self.candles[i]

    @property
    def closes(self) -> list[float]:
        return [c.close for c in self.candles]

    def to_array(self) -> np.ndarray:
        """(T, 4) float array in open/high/low/close column order."""
        return np.array([[c.open, c.high, c.low, c.close] for c in self.candles], dtype=float)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "CandleWindow":
        a = np.asarray(arr, dtype=float)
        if a.ndim != 2 or a.shape[1] != 4:
            raise InvalidCandle(f"expected (T, 4) array, got shape {a.shape}")
        return cls(tuple(Candle(*row) for row in a.tolist()))

    def scaled(self, factor: float) -> "CandleWindow":
        """Same window with every price multiplied by a positive factor."""
        if factor <= 0:
            raise NonPositivePrice("scale factor must be positive")
        return CandleWindow(
            tuple(
                Candle(c.open * factor, c.high * factor, c.low * factor, c.close * factor)
                for c in self.candles
            )
        )


@dataclass(frozen=True)
class RuleParams:
    """Thresholds for the pattern predicates.

    Bodies are judged long/short against the mean body of the trend prefix;
    shadows against the bar's own body (with a doji floor proportional to
    price so degenerate bars never qualify).
    """

    trend_prefix_len: int = 7
    trend_slope_min: float = 0.0005  # fraction of mean close, per bar
    long_body_ratio: float = 1.5
    short_body_ratio: float = 0.5
    shadow_body_ratio: float = 2.0
    doji_epsilon: float = 1e-6

    def __post_init__(self) -> None:
        if self.trend_prefix_len < 1:
            raise ValueError("trend_prefix_len must be >= 1")
        for name in ("trend_slope_min", "long_body_ratio", "short_body_ratio",
                     "shadow_body_ratio", "doji_epsilon"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


def anatomy(c: Candle) -> CandleAnatomy:
    """Decompose a bar into real body, shadows, and direction."""
    body = abs(c.close - c.open)
    upper = c.high - max(c.open, c.close)
    lower = min(c.open, c.close) - c.low
    if c.close > c.open:
        direction = Direction.WHITE
    elif c.close < c.open:
        direction = Direction.BLACK
    else:
        direction = Direction.DOJI
    return CandleAnatomy(body, upper, lower, direction)


def repair(prices: Sequence[float]) -> Candle:
    """Build a valid candle from a raw (open, high, low, close) tuple.

    High is raised and low lowered just enough to bound open and close;
    open and close are kept as given. Idempotent.
    """
    o, h, lo, c = (float(v) for v in prices)
    if min(o, h, lo, c) <= 0:
        raise NonPositivePrice(f"prices must be positive: {(o, h, lo, c)}")
    return Candle(o, max(h, o, c), min(lo, o, c), c)


def detect_trend(closes: Sequence[float], params: RuleParams) -> Trend:
    """Classify a close-price run as Up/Down/None by least-squares slope.

    The slope threshold is trend_slope_min times the mean close, so the
    verdict is invariant under uniform price scaling.
    """
    y = np.asarray(closes, dtype=float)
    if y.size == 0:
        raise EmptySequence("cannot detect a trend on an empty sequence")
    if y.size < 2:
        return Trend.NONE
    x = np.arange(y.size, dtype=float)
    x -= x.mean()
    slope = float(np.dot(x, y - y.mean()) / np.dot(x, x))
    threshold = params.trend_slope_min * float(y.mean())
    if slope > threshold:
        return Trend.UP
    if slope < -threshold:
        return Trend.DOWN
    return Trend.NONE


def _body_range(c: Candle) -> tuple[float, float]:
    return min(c.open, c.close), max(c.open, c.close)


class _Context:
    """Trend and mean prefix body for a pattern occupying the last k bars."""

    def __init__(self, w: CandleWindow, k: int, params: RuleParams) -> None:
        T = len(w)
        prefix = w.candles[T - k - params.trend_prefix_len : T - k]
        self.trend = detect_trend([c.close for c in prefix], params)
        self.mean_body = sum(anatomy(c).body for c in prefix) / len(prefix)
        self._params = params

    def is_long(self, body: float) -> bool:
        return body > 0 and body >= self._params.long_body_ratio * self.mean_body

    def is_short(self, body: float) -> bool:
        return body <= self._params.short_body_ratio * self.mean_body


def _is_morning_star(a: Candle, b: Candle, c: Candle, ctx: _Context) -> bool:
    an, bn, cn = anatomy(a), anatomy(b), anatomy(c)
    return (
        ctx.trend is Trend.DOWN
        and an.direction is Direction.BLACK
        and ctx.is_long(an.body)
        and ctx.is_short(bn.body)
        and max(b.open, b.close) <= min(a.open, a.close)  # star body below the first body
        and cn.direction is Direction.WHITE
        and ctx.is_long(cn.body)
        and c.close > (a.open + a.close) / 2.0
    )


def _is_evening_star(a: Candle, b: Candle, c: Candle, ctx: _Context) -> bool:
    an, bn, cn = anatomy(a), anatomy(b), anatomy(c)
    return (
        ctx.trend is Trend.UP
        and an.direction is Direction.WHITE
        and ctx.is_long(an.body)
        and ctx.is_short(bn.body)
        and min(b.open, b.close) >= max(a.open, a.close)  # star body above the first body
        and cn.direction is Direction.BLACK
        and c.close < (a.open + a.close) / 2.0
    )


def _is_bullish_engulfing(x: Candle, y: Candle, ctx: _Context) -> bool:
    xn, yn = anatomy(x), anatomy(y)
    return (
        ctx.trend is Trend.DOWN
        and xn.direction is Direction.BLACK
        and yn.direction is Direction.WHITE
        and ctx.is_long(yn.body)
        and y.open < x.close
        and y.close > x.open
    )


def _is_bearish_engulfing(x: Candle, y: Candle, ctx: _Context) -> bool:
    xn, yn = anatomy(x), anatomy(y)
    return (
        ctx.trend is Trend.UP
        and xn.direction is Direction.WHITE
        and yn.direction is Direction.BLACK
        and ctx.is_long(yn.body)
        and y.open > x.close
        and y.close < x.open
    )


def _is_bullish_harami(x: Candle, y: Candle, ctx: _Context) -> bool:
    xn, yn = anatomy(x), anatomy(y)
    x_lo, x_hi = _body_range(x)
    y_lo, y_hi = _body_range(y)
    return (
        ctx.trend is Trend.DOWN
        and xn.direction is Direction.BLACK
        and ctx.is_long(xn.body)
        and yn.direction is Direction.WHITE
        and x_lo < y_lo
        and y_hi < x_hi
    )


def _is_bearish_harami(x: Candle, y: Candle, ctx: _Context) -> bool:
    xn, yn = anatomy(x), anatomy(y)
    x_lo, x_hi = _body_range(x)
    y_lo, y_hi = _body_range(y)
    return (
        ctx.trend is Trend.UP
        and xn.direction is Direction.WHITE
        and ctx.is_long(xn.body)
        and yn.direction is Direction.BLACK
        and x_lo < y_lo
        and y_hi < x_hi
    )


def _top_heavy(z: Candle, ctx: _Context, params: RuleParams) -> bool:
    # Small body, long upper shadow, little or no lower shadow. The doji
    # floor keeps flat/degenerate bars from qualifying.
    zn = anatomy(z)
    floor = params.doji_epsilon * z.close
    ref = max(zn.body, floor)
    return (
        ctx.is_short(zn.body)
        and zn.upper_shadow >= params.shadow_body_ratio * ref
        and zn.lower_shadow <= ref
    )


def _is_shooting_star(z: Candle, ctx: _Context, params: RuleParams) -> bool:
    return (
        ctx.trend is Trend.UP
        and anatomy(z).direction is Direction.BLACK
        and _top_heavy(z, ctx, params)
    )


def _is_inverted_hammer(z: Candle, ctx: _Context, params: RuleParams) -> bool:
    return ctx.trend is Trend.DOWN and _top_heavy(z, ctx, params)


def match_pattern(w: CandleWindow, params: RuleParams = RuleParams()) -> PatternLabel:
    """Label a window with the first matching pattern, or NONE.

    Three-bar patterns are checked before two-bar before one-bar; the trend
    context for a pattern occupying the last k bars is computed on the
    trend_prefix_len closes immediately preceding those bars.
    """
    T = len(w)
    if T < params.trend_prefix_len + 3:
        raise WindowTooShort(
            f"need at least {params.trend_prefix_len + 3} bars, got {T}"
        )

    a, b, c = w[T - 3], w[T - 2], w[T - 1]
    ctx3 = _Context(w, 3, params)
    if _is_morning_star(a, b, c, ctx3):
        return PatternLabel.MORNING_STAR
    if _is_evening_star(a, b, c, ctx3):
        return PatternLabel.EVENING_STAR

    x, y = w[T - 2], w[T - 1]
    ctx2 = _Context(w, 2, params)
    if _is_bullish_engulfing(x, y, ctx2):
        return PatternLabel.BULLISH_ENGULFING
    if _is_bearish_engulfing(x, y, ctx2):
        return PatternLabel.BEARISH_ENGULFING
    if _is_bullish_harami(x, y, ctx2):
        return PatternLabel.BULLISH_HARAMI
    if _is_bearish_harami(x, y, ctx2):
        return PatternLabel.BEARISH_HARAMI

    z = w[T - 1]
    ctx1 = _Context(w, 1, params)
    if _is_shooting_star(z, ctx1, params):
        return PatternLabel.SHOOTING_STAR
    if _is_inverted_hammer(z, ctx1, params):
        return PatternLabel.INVERTED_HAMMER

    return PatternLabel.NONE
