import numpy as np
import pytest

from candleaug.gaf import (
    ChannelScale,
    ConstantSeries,
    DiagonalOutOfRange,
    GafTensor,
    NormalizedSeries,
    decode_tensor,
    denormalize,
    encode_window,
    gaf_decode,
    gaf_encode,
    normalize,
)
from candleaug.ohlc import Candle, CandleWindow, PatternLabel
from candleaug.synthetic import canonical_window


def _random_window(rng, T=10):
    rows = []
    for _ in range(T):
        o, c = rng.uniform(1, 10, size=2)
        hi = max(o, c) + rng.uniform(0.01, 2)
        lo = max(0.01, min(o, c) - rng.uniform(0.01, 0.5))
        rows.append(Candle(o, hi, lo, c))
    return CandleWindow(tuple(rows))


def test_normalize_endpoints():
    n = normalize([2, 4, 6])
    assert np.allclose(n.values, [0, 0.5, 1])
    assert n.scale == ChannelScale(2, 6)


def test_normalize_identity_after_shift():
    n = normalize([0, 1])
    assert np.allclose(n.values, [0, 1])


def test_normalize_constant_rejected():
    with pytest.raises(ConstantSeries):
        normalize([5, 5, 5])


def test_encode_two_points():
    m = gaf_encode(NormalizedSeries(np.array([0.0, 1.0]), ChannelScale(0, 1)))
    assert np.allclose(m, [[-1, 0], [0, 1]], atol=1e-15)


def test_encode_three_points_both_forms():
    values = np.array([0.0, 0.5, 1.0])
    m = gaf_encode(NormalizedSeries(values, ChannelScale(0, 1)))
    assert np.allclose(np.diagonal(m), [-1, -0.5, 1], atol=1e-15)
    # angle-sum oracle: cos(arccos(x_i) + arccos(x_j))
    angles = np.arccos(values)
    oracle = np.cos(angles[:, None] + angles[None, :])
    assert np.allclose(m, oracle, atol=1e-15)
    assert m[0, 1] == pytest.approx(-np.sqrt(3) / 2, abs=1e-12)


def test_dual_forms_agree_on_random_series():
    rng = np.random.default_rng(7)
    for _ in range(200):
        values = np.sort(rng.uniform(0, 1, size=10))
        values[0], values[-1] = 0.0, 1.0
        m = gaf_encode(NormalizedSeries(values, ChannelScale(0, 1)))
        angles = np.arccos(values)
        oracle = np.cos(angles[:, None] + angles[None, :])
        assert np.max(np.abs(m - oracle)) < 1e-12


def test_matrix_is_symmetric_and_bounded():
    rng = np.random.default_rng(8)
    for _ in range(100):
        n = normalize(rng.uniform(1, 5, size=10))
        m = gaf_encode(n)
        assert np.array_equal(m, m.T)
        assert np.all(m >= -1.0) and np.all(m <= 1.0)


def test_decode_endpoints():
    assert np.allclose(gaf_decode(np.diag([-1.0, 1.0])), [0, 1])


def test_decode_inverse_formula():
    m = gaf_encode(NormalizedSeries(np.array([0.0, 0.5, 1.0]), ChannelScale(0, 1)))
    assert np.allclose(gaf_decode(m), [0, 0.5, 1], atol=1e-12)


def test_roundtrip_thousand_series():
    rng = np.random.default_rng(9)
    worst = 0.0
    for _ in range(1000):
        n = normalize(rng.uniform(0.5, 3.0, size=10))
        back = gaf_decode(gaf_encode(n))
        worst = max(worst, float(np.max(np.abs(back - n.values))))
    assert worst < 1e-9


def test_decode_rejects_out_of_range_diagonal():
    bad = np.diag([0.5, 1.5])
    with pytest.raises(DiagonalOutOfRange):
        gaf_decode(bad)


def test_denormalize_examples():
    assert np.allclose(
        denormalize(NormalizedSeries(np.array([0.0, 0.5, 1.0]), ChannelScale(2, 6))), [2, 4, 6]
    )
    assert np.allclose(denormalize(NormalizedSeries(np.array([0.25]), ChannelScale(0, 4))), [1])


def test_denormalize_roundtrip():
    rng = np.random.default_rng(10)
    for _ in range(200):
        x = rng.uniform(1, 100, size=10)
        n = normalize(x)
        assert np.max(np.abs(denormalize(n) - x)) < 1e-9


def test_encode_window_open_channel():
    rows = [
        Candle(2, 3, 1, 2.5),
        Candle(4, 5, 3, 4.5),
        Candle(6, 7, 5, 6.5),
    ]
    t = encode_window(CandleWindow(tuple(rows)))
    assert np.allclose(np.diagonal(t.channels[0]), [-1, -0.5, 1], atol=1e-12)
    assert t.scales[0] == ChannelScale(2, 6)


def test_encode_constant_window_rejected():
    rows = [Candle(5, 5, 5, 5)] * 10
    with pytest.raises(ConstantSeries, match="open"):
        encode_window(CandleWindow(tuple(rows)))


def test_window_roundtrip_exact_shape():
    rng = np.random.default_rng(11)
    for _ in range(50):
        w = _random_window(rng)
        back = decode_tensor(encode_window(w))
        a, b = w.to_array(), back.to_array()
        assert np.max(np.abs(a - b) / np.abs(a)) < 1e-6


def test_identity_roundtrip_no_repair():
    w = canonical_window(PatternLabel.EVENING_STAR)
    back = decode_tensor(encode_window(w))
    assert np.allclose(w.to_array(), back.to_array(), rtol=1e-12, atol=1e-12)


def test_decode_repairs_broken_high():
    w = canonical_window(PatternLabel.MORNING_STAR)
    t = encode_window(w)
    # find the bar holding the high channel's max and crush its diagonal so
    # the decoded high falls below open/close
    hi_col = w.to_array()[:, 1]
    bar = int(np.argmax(hi_col))
    channels = t.channels.copy()
    channels[1][bar, bar] = -1.0  # decoded high becomes the channel minimum
    broken = GafTensor(channels, t.scales)
    repaired = decode_tensor(broken)
    c = repaired[bar]
    assert c.high == max(c.open, c.close)


def test_single_diagonal_perturbation_moves_one_price():
    w = canonical_window(PatternLabel.BULLISH_HARAMI)
    t = encode_window(w)
    bar = 4  # a mid-trend bar whose close sits strictly inside its range
    g = t.channels[3][bar, bar]
    channels = t.channels.copy()
    channels[3][bar, bar] = 1.01 * g
    perturbed = decode_tensor(GafTensor(channels, t.scales))

    lo, hi = t.scales[3]
    expected = np.sqrt((1.01 * g + 1.0) / 2.0) * (hi - lo) + lo
    assert perturbed[bar].close == pytest.approx(expected, rel=1e-12)
    base = w.to_array()
    new = perturbed.to_array()
    rel = np.abs(new - base) / np.abs(base)
    assert rel[bar, 3] > 1e-6          # the perturbed price moved
    rel[bar, 3] = 0.0
    assert np.max(rel) < 1e-9          # everything else only roundtrip noise
    # the move respects the single-episode bound on squared normalized values
    x2_old = ((g + 1.0) / 2.0)
    x2_new = ((1.01 * g + 1.0) / 2.0)
    assert abs(x2_new - x2_old) <= 0.005 + 1e-12


def test_tensor_record_roundtrip():
    w = canonical_window(PatternLabel.SHOOTING_STAR)
    t = encode_window(w)
    back = GafTensor.from_record(t.to_record())
    assert np.array_equal(back.channels, t.channels)
    assert back.scales == t.scales
