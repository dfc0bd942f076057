import numpy as np
import pytest

from candleaug.ohlc import (
    Candle,
    CandleWindow,
    Direction,
    EmptySequence,
    NonPositivePrice,
    PatternLabel,
    RuleParams,
    Trend,
    WindowTooShort,
    anatomy,
    detect_trend,
    match_pattern,
    repair,
)
from candleaug.synthetic import PATTERNS, canonical_window, no_pattern_window


def test_anatomy_white_bar():
    a = anatomy(Candle(1, 3, 0.5, 2))
    assert a.body == 1 and a.upper_shadow == 1 and a.lower_shadow == 0.5
    assert a.direction is Direction.WHITE


def test_anatomy_doji():
    a = anatomy(Candle(2, 2, 2, 2))
    assert a.body == 0 and a.upper_shadow == 0 and a.lower_shadow == 0
    assert a.direction is Direction.DOJI


def test_anatomy_black_bar():
    a = anatomy(Candle(2, 2.5, 0.9, 1))
    assert a.body == 1
    assert a.upper_shadow == pytest.approx(0.5)
    assert a.lower_shadow == pytest.approx(0.1)
    assert a.direction is Direction.BLACK


def test_anatomy_parts_sum_to_range():
    rng = np.random.default_rng(0)
    for _ in range(500):
        o, c = rng.uniform(1, 10, size=2)
        hi = max(o, c) + rng.uniform(0, 5)
        lo = min(o, c) - rng.uniform(0, min(o, c) - 0.01)
        a = anatomy(Candle(o, hi, lo, c))
        assert a.body >= 0 and a.upper_shadow >= 0 and a.lower_shadow >= 0
        assert a.body + a.upper_shadow + a.lower_shadow == pytest.approx(hi - lo, rel=1e-12)


def test_repair_raises_high():
    c = repair((2, 1.9, 1, 2.1))
    assert (c.open, c.high, c.low, c.close) == (2, 2.1, 1, 2.1)


def test_repair_leaves_valid_unchanged():
    c = repair((2, 3, 1, 2.5))
    assert (c.open, c.high, c.low, c.close) == (2, 3, 1, 2.5)


def test_repair_fixes_both_bounds():
    c = repair((1, 0.5, 2, 1.5))
    assert (c.open, c.high, c.low, c.close) == (1, 1.5, 1, 1.5)


def test_repair_rejects_nonpositive():
    with pytest.raises(NonPositivePrice):
        repair((1, 2, -1, 1.5))
    with pytest.raises(NonPositivePrice):
        repair((0, 2, 1, 1.5))


def test_repair_idempotent():
    rng = np.random.default_rng(1)
    for _ in range(300):
        raw = tuple(rng.uniform(0.1, 10, size=4))
        once = repair(raw)
        twice = repair((once.open, once.high, once.low, once.close))
        assert once == twice


def test_trend_down_on_steady_decline():
    closes = [100 * (1 - 0.01) ** i for i in range(7)]
    assert detect_trend(closes, RuleParams()) is Trend.DOWN


def test_trend_none_on_constant():
    assert detect_trend([5.0] * 7, RuleParams()) is Trend.NONE


def test_trend_least_squares_example():
    closes = [10, 9.9, 10.05, 9.8, 9.7, 9.75, 9.5]
    # independent oracle: polyfit slope vs the relative threshold
    slope = np.polyfit(np.arange(7), closes, 1)[0]
    assert slope == pytest.approx(-2.15 / 28, abs=1e-12)  # sum((x-3)(y-ybar)) / 28
    assert slope < -RuleParams().trend_slope_min * np.mean(closes)
    assert detect_trend(closes, RuleParams()) is Trend.DOWN


def test_trend_empty_rejected():
    with pytest.raises(EmptySequence):
        detect_trend([], RuleParams())


def _window(rows):
    return CandleWindow(tuple(Candle(*r) for r in rows))


def test_bullish_engulfing_predicates_and_label():
    # 8 descending bars, then a small black bar engulfed by a large white bar.
    rows = []
    for i in range(8):
        close = 100 - i
        rows.append([close + 0.5, close + 0.6, close - 0.1, close])
    small_black = [92.0, 92.05, 91.55, 91.6]
    big_white = [91.0, 93.6, 90.95, 93.5]
    rows += [small_black, big_white]
    w = _window(rows)

    # independent predicate-by-predicate check
    prefix = np.array([r[3] for r in rows[1:8]])
    assert np.polyfit(np.arange(7), prefix, 1)[0] < 0
    assert small_black[3] < small_black[0]                 # black
    assert big_white[3] > big_white[0]                     # white
    assert big_white[0] < small_black[3]                   # opens below prior close
    assert big_white[3] > small_black[0]                   # closes above prior open
    mean_body = np.mean([abs(r[3] - r[0]) for r in rows[1:8]])
    assert abs(big_white[3] - big_white[0]) >= 1.5 * mean_body

    assert match_pattern(w) is PatternLabel.BULLISH_ENGULFING


def test_flat_window_matches_nothing():
    rows = [[5, 5, 5, 5]] * 10
    assert match_pattern(_window(rows)) is PatternLabel.NONE


def test_morning_star_predicates_and_label():
    w = canonical_window(PatternLabel.MORNING_STAR)
    a, b, c = w[7], w[8], w[9]
    prefix_closes = [bar.close for bar in w.candles[:7]]
    assert np.polyfit(np.arange(7), prefix_closes, 1)[0] < 0   # downtrend
    mean_body = np.mean([abs(bar.close - bar.open) for bar in w.candles[:7]])
    assert a.close < a.open and abs(a.close - a.open) >= 1.5 * mean_body
    assert abs(b.close - b.open) <= 0.5 * mean_body
    assert max(b.open, b.close) <= min(a.open, a.close)        # star gaps below
    assert c.close > c.open and abs(c.close - c.open) >= 1.5 * mean_body
    assert c.close > (a.open + a.close) / 2
    assert match_pattern(w) is PatternLabel.MORNING_STAR


def test_golden_suite_all_patterns():
    for label in PATTERNS:
        assert match_pattern(canonical_window(label)) is label
    assert match_pattern(no_pattern_window()) is PatternLabel.NONE


def test_labels_invariant_under_uniform_scaling():
    for label in PATTERNS:
        w = canonical_window(label)
        for factor in (1e-3, 0.37, 7.3, 1e3):
            assert match_pattern(w.scaled(factor)) is label


def test_window_too_short():
    rows = [[5, 6, 4, 5.5]] * 9
    with pytest.raises(WindowTooShort):
        match_pattern(_window(rows))


def test_pattern_codes():
    assert PatternLabel.NONE == 0
    assert [int(p) for p in PATTERNS] == [1, 2, 3, 4, 5, 6, 7, 8]


def test_candle_invariants_enforced():
    with pytest.raises(NonPositivePrice):
        Candle(1, 2, 0, 1.5)
    with pytest.raises(Exception):
        Candle(2, 1.5, 1, 1.8)  # high below open
