"""Constructed candle windows for each pattern class.

Used as the golden suite for the rule engine, as training data for the
convolutional classifier, and as seed windows for the perturbation sampler.
Every geometry parameter is chosen with a comfortable margin over the rule
thresholds so small perturbations cannot flip the label; the builders verify
their own output against match_pattern and fail loudly on a miss.
"""

from __future__ import annotations

import numpy as np

from .ohlc import CandleWindow, PatternLabel, RuleParams, match_pattern

PATTERNS = tuple(label for label in PatternLabel if label is not PatternLabel.NONE)


class _Geometry:
    """Per-window geometry: price base, trend step, body unit, wick size.

    With rng=None everything is fixed (the canonical window); with an rng the
    proportions jitter inside the rule margins.
    """

    def __init__(self, base: float, rng: np.random.Generator | None) -> None:
        self.rng = rng
        self.base = base
        if rng is None:
            self.step = 0.010 * base   # trend move per bar
            self.body = 0.006 * base   # mean trend-bar body
            self.wick = 0.0015 * base
        else:
            self.step = float(rng.uniform(0.007, 0.016)) * base
            self.body = float(rng.uniform(0.004, 0.009)) * base
            self.wick = float(rng.uniform(0.0005, 0.0025)) * base

    def jitter(self, lo: float = 0.85, hi: float = 1.15) -> float:
        if self.rng is None:
            return 1.0
        return float(self.rng.uniform(lo, hi))


def _bar(open_: float, close: float, upper: float, lower: float) -> list[float]:
    hi = max(open_, close) + upper
    lo = min(open_, close) - lower
    return [open_, hi, lo, close]


def _trend_bars(g: _Geometry, n: int, down: bool) -> tuple[list[list[float]], float]:
    """n black (down) or white (up) bars marching step-per-bar; returns the
    bars and the close of the last one."""
    bars = []
    close = g.base
    for i in range(n):
        close = g.base - g.step * i if down else g.base + g.step * i
        close *= 1.0 + (0.0 if g.rng is None else float(g.rng.uniform(-0.08, 0.08)) * g.step / g.base)
        body = g.body * g.jitter(0.8, 1.2)
        open_ = close + body if down else close - body
        bars.append(_bar(open_, close, g.wick * g.jitter(), g.wick * g.jitter()))
    return bars, close


def _star_bars(g: _Geometry, last_close: float, bullish: bool) -> list[list[float]]:
    """Long bar with the trend, short star gapping past it, long reversal bar."""
    m = g.body
    sign = -1.0 if bullish else 1.0  # bullish star forms after a downtrend
    long_body = 3.0 * m * g.jitter(0.95, 1.15)
    a_open = last_close
    a_close = a_open + sign * long_body
    star_mid = a_close + sign * 0.5 * m * g.jitter()
    star_half = 0.1 * m * g.jitter()
    b_open = star_mid + sign * star_half
    b_close = star_mid - sign * star_half
    c_open = star_mid
    c_close = a_close - sign * 3.0 * m * g.jitter(0.95, 1.15)
    w = g.wick * 0.5
    return [
        _bar(a_open, a_close, w, w),
        _bar(b_open, b_close, w, w),
        _bar(c_open, c_close, w, w),
    ]


def _engulfing_bars(g: _Geometry, last_close: float, bullish: bool) -> list[list[float]]:
    m = g.body
    sign = -1.0 if bullish else 1.0
    x_open = last_close
    x_close = x_open + sign * 0.8 * m * g.jitter()
    y_open = x_close + sign * m * g.jitter()
    y_close = x_open - sign * m * g.jitter()
    w = g.wick * 0.5
    return [_bar(x_open, x_close, w, w), _bar(y_open, y_close, w, w)]


def _harami_bars(g: _Geometry, last_close: float, bullish: bool) -> list[list[float]]:
    m = g.body
    sign = -1.0 if bullish else 1.0
    x_open = last_close
    x_close = x_open + sign * 3.0 * m * g.jitter(0.95, 1.15)
    y_open = x_close - sign * 0.8 * m * g.jitter()
    y_close = x_close - sign * 2.0 * m * g.jitter(0.9, 1.1)
    w = g.wick * 0.5
    return [_bar(x_open, x_close, w, w), _bar(y_open, y_close, w, w)]


def _top_heavy_bar(g: _Geometry, last_close: float, black: bool) -> list[list[float]]:
    m = g.body
    body = 0.2 * m * g.jitter(0.8, 1.2)
    open_ = last_close
    close = open_ - body if black else open_ + body
    upper = m * g.jitter(0.9, 1.3)
    lower = 0.02 * m * g.jitter()
    return [_bar(open_, close, upper, lower)]


def build_window(
    label: PatternLabel,
    T: int = 10,
    params: RuleParams = RuleParams(),
    base: float = 100.0,
    rng: np.random.Generator | None = None,
) -> CandleWindow:
    """Construct a window carrying the given pattern on its final bars."""
    if label is PatternLabel.NONE:
        raise ValueError("cannot construct a window for NONE; see no_pattern_window")
    g = _Geometry(base, rng)

    if label in (PatternLabel.MORNING_STAR, PatternLabel.EVENING_STAR):
        k, down = 3, label is PatternLabel.MORNING_STAR
        bars, last = _trend_bars(g, T - k, down)
        bars += _star_bars(g, last, bullish=down)
    elif label in (PatternLabel.BULLISH_ENGULFING, PatternLabel.BEARISH_ENGULFING):
        k, down = 2, label is PatternLabel.BULLISH_ENGULFING
        bars, last = _trend_bars(g, T - k, down)
        bars += _engulfing_bars(g, last, bullish=down)
    elif label in (PatternLabel.BULLISH_HARAMI, PatternLabel.BEARISH_HARAMI):
        k, down = 2, label is PatternLabel.BULLISH_HARAMI
        bars, last = _trend_bars(g, T - k, down)
        bars += _harami_bars(g, last, bullish=down)
    else:  # SHOOTING_STAR (uptrend, black bar) / INVERTED_HAMMER (downtrend)
        down = label is PatternLabel.INVERTED_HAMMER
        bars, last = _trend_bars(g, T - 1, down)
        bars += _top_heavy_bar(g, last, black=label is PatternLabel.SHOOTING_STAR)

    window = CandleWindow.from_array(np.array(bars))
    got = match_pattern(window, params)
    if got is not label:
        raise AssertionError(f"constructed window for {label.name} matched {got.name}")
    return window


def canonical_window(label: PatternLabel, T: int = 10, base: float = 100.0) -> CandleWindow:
    """The fixed, unjittered exemplar of a pattern."""
    return build_window(label, T=T, base=base)


def no_pattern_window(T: int = 10, base: float = 100.0,
                      rng: np.random.Generator | None = None) -> CandleWindow:
    """A sideways window that matches no rule (trendless noise)."""
    magnitudes = (1.0, 0.8, 1.2, 0.9, 1.1)  # varies every channel bar to bar
    bars = []
    for i in range(T):
        wobble = 0.002 * base * magnitudes[i % len(magnitudes)] * (1 if i % 2 == 0 else -1)
        if rng is not None:
            wobble *= float(rng.uniform(0.6, 1.4))
        close = base + wobble
        open_ = base - wobble
        wick = 0.001 * base * magnitudes[(i + 2) % len(magnitudes)]
        bars.append(_bar(open_, close, wick, wick))
    window = CandleWindow.from_array(np.array(bars))
    if match_pattern(window) is not PatternLabel.NONE:
        raise AssertionError("no-pattern window unexpectedly matched a rule")
    return window


def pattern_corpus(
    per_class: int,
    seed: int = 0,
    T: int = 10,
    params: RuleParams = RuleParams(),
) -> list[tuple[CandleWindow, PatternLabel]]:
    """per_class jittered windows for each of the eight patterns.

    Price bases are drawn log-uniformly so no class is tied to a level.
    """
    rng = np.random.default_rng(seed)
    corpus: list[tuple[CandleWindow, PatternLabel]] = []
    for label in PATTERNS:
        for _ in range(per_class):
            base = float(np.exp(rng.uniform(np.log(10.0), np.log(1000.0))))
            corpus.append((build_window(label, T=T, params=params, base=base, rng=rng), label))
    return corpus
