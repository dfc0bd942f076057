import json
import math

import mpmath
import numpy as np
import pytest

from candleaug.stats import (
    DegenerateVariance,
    ResponseRecord,
    ScoreOutOfRange,
    SessionRecord,
    UnpairedInput,
    correct_ratio_per_capita,
    filter_sessions,
    paired_t_test,
    parse_response_log,
    regularized_incomplete_beta,
    score_histogram,
    student_t_two_sided_p,
    write_histogram_csv,
)

mpmath.mp.dps = 50


def _session(sid, duration, completed=True):
    return SessionRecord(sid, started=0.0, total_duration=duration, completed=completed)


def _responses(sid, model, hits):
    return [
        ResponseRecord(sid, i, model, bool(h))
        for i, h in enumerate(hits)
    ]


def test_filter_drops_fast_and_incomplete():
    sessions = [
        _session("fast", 4.2, completed=True),
        _session("quit", 60.0, completed=False),
        _session("good", 60.0, completed=True),
    ]
    responses = (
        _responses("fast", "adversarial", [1] * 20)
        + _responses("quit", "adversarial", [1] * 19)
        + _responses("good", "adversarial", [1] * 20)
    )
    report = filter_sessions(sessions, responses)
    assert [s.session_id for s in report.sessions] == ["good"]
    assert report.dropped_fast == 1 and report.dropped_incomplete == 1
    assert all(r.session_id == "good" for r in report.responses)


def test_filter_keeps_exactly_five_seconds():
    report = filter_sessions([_session("edge", 5.0)], [])
    assert len(report.sessions) == 1


def test_pooled_ratios_match_reported_table():
    # 2419 answers / 1370 correct and 2364 / 1229 split across sessions
    responses = []
    for sid in range(245):
        base = sid * 100
        n_a = 2419 // 245 + (1 if sid < 2419 % 245 else 0)
        k_a = 1370 // 245 + (1 if sid < 1370 % 245 else 0)
        responses += _responses(f"s{base}", "cvae", [1] * k_a + [0] * (n_a - k_a))
        n_b = 2364 // 245 + (1 if sid < 2364 % 245 else 0)
        k_b = 1229 // 245 + (1 if sid < 1229 % 245 else 0)
        responses += _responses(f"s{base}", "adversarial", [1] * k_b + [0] * (n_b - k_b))
    _, pooled_a = correct_ratio_per_capita(responses, "cvae")
    assert (pooled_a.correct, pooled_a.total) == (1370, 2419)
    assert abs(100 * pooled_a.ratio - 56.63) < 0.01
    _, pooled_b = correct_ratio_per_capita(responses, "adversarial")
    assert (pooled_b.correct, pooled_b.total) == (1229, 2364)
    assert abs(100 * pooled_b.ratio - 51.99) < 0.01


def test_per_session_ratio_all_correct():
    responses = _responses("s1", "cvae", [1] * 10)
    ratios, pooled = correct_ratio_per_capita(responses, "cvae")
    assert ratios == {"s1": 1.0}
    assert pooled.correct == 10 and pooled.total == 10


def test_paired_t_matches_reported_summary():
    n = 245
    base = np.arange(n, dtype=float)
    base = (base - base.mean()) / base.std(ddof=1)
    diffs = -0.0575 + 0.2386 * base
    r = paired_t_test(diffs.tolist(), [0.0] * n)
    assert r.n == 245 and r.df == 244
    assert abs(r.t_value - (-3.77)) <= 0.01
    assert abs(r.p_value - 0.0002) <= 0.0001


def test_paired_t_identical_pairs_degenerate():
    xs = [0.5, 0.6, 0.7]
    with pytest.raises(DegenerateVariance):
        paired_t_test(xs, xs)


def test_paired_t_unpaired_rejected():
    with pytest.raises(UnpairedInput):
        paired_t_test([1, 2, 3], [1, 2])
    with pytest.raises(UnpairedInput):
        paired_t_test([1], [2])


def test_paired_t_antisymmetry_exact():
    rng = np.random.default_rng(16)
    xs = rng.uniform(0, 1, size=50).tolist()
    ys = rng.uniform(0, 1, size=50).tolist()
    fwd = paired_t_test(xs, ys)
    rev = paired_t_test(ys, xs)
    assert rev.t_value == -fwd.t_value
    assert rev.p_value == fwd.p_value


def test_paired_t_shift_invariance():
    rng = np.random.default_rng(17)
    xs = rng.uniform(0, 1, size=40)
    ys = rng.uniform(0, 1, size=40)
    r1 = paired_t_test(xs.tolist(), ys.tolist())
    r2 = paired_t_test((xs + 0.123).tolist(), (ys + 0.123).tolist())
    assert abs(r1.t_value - r2.t_value) < 1e-12 * max(1, abs(r1.t_value))
    assert abs(r1.p_value - r2.p_value) < 1e-12


def test_p_monotone_in_t_magnitude():
    previous = 1.0
    for t in (0.0, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0):
        p = student_t_two_sided_p(t, 30)
        assert 0.0 < p <= 1.0
        assert p <= previous
        previous = p


def test_incomplete_beta_against_oracle():
    cases = [
        (0.5, 0.5, 0.3), (2.0, 5.0, 0.2), (5.0, 2.0, 0.8),
        (122.0, 0.5, 0.9447), (10.0, 10.0, 0.5), (0.5, 122.0, 0.001),
    ]
    for a, b, x in cases:
        mine = regularized_incomplete_beta(a, b, x)
        oracle = float(mpmath.betainc(a, b, 0, x, regularized=True))
        assert abs(mine - oracle) < 1e-9


def test_p_values_against_oracle():
    def oracle_p(t, df):
        x = df / (df + t * t)
        return float(mpmath.betainc(df / 2, 0.5, 0, x, regularized=True))

    for t, df in [(1.97, 244), (3.7736, 244), (0.5, 9), (2.5, 3), (4.0, 100)]:
        assert abs(student_t_two_sided_p(t, df) - oracle_p(t, df)) < 1e-6
    assert student_t_two_sided_p(1.97, 244) == pytest.approx(0.05, abs=5e-4)


def test_histogram_basic():
    counts, mean = score_histogram([0.5, 0.5, 1.0], bins=2)
    assert counts == [2, 1]
    assert mean == pytest.approx(2 / 3)


def test_histogram_empty_and_errors():
    counts, mean = score_histogram([], bins=4)
    assert counts == [0, 0, 0, 0] and mean is None
    with pytest.raises(ScoreOutOfRange):
        score_histogram([1.2], bins=2)


def test_histogram_counts_and_mean_consistency():
    rng = np.random.default_rng(18)
    scores = rng.uniform(0, 1, size=500).tolist()
    counts, mean = score_histogram(scores, bins=7)
    assert sum(counts) == 500
    assert abs(mean - sum(scores) / 500) < 1e-12


def test_parse_response_log(tmp_path):
    events = [
        {"type": "session", "session_id": "a", "created": 100.0},
        {"type": "answer", "session_id": "a", "question_id": "q0", "question_index": 0,
         "source_model": "cvae", "chose_real": True, "ts": 103.0},
        {"type": "answer", "session_id": "a", "question_id": "q1", "question_index": 1,
         "source_model": "adversarial", "chose_real": False, "ts": 108.0},
        {"type": "complete", "session_id": "a", "duration_s": 8.0, "score": 0.5},
        {"type": "session", "session_id": "b", "created": 200.0},
        {"type": "answer", "session_id": "b", "question_id": "q0", "question_index": 0,
         "source_model": "cvae", "chose_real": True, "ts": 201.0},
    ]
    path = tmp_path / "responses.log"
    path.write_text("\n".join(json.dumps(e) for e in events) + "\n", encoding="utf-8")
    sessions, responses = parse_response_log(path)
    assert len(sessions) == 2 and len(responses) == 3
    done = {s.session_id: s for s in sessions}
    assert done["a"].completed and done["a"].total_duration == 8.0
    assert not done["b"].completed and done["b"].total_duration == 1.0


def test_write_histogram_csv(tmp_path):
    path = tmp_path / "hist.csv"
    write_histogram_csv(path, [3, 1], 0.4)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "bin_low,bin_high,count"
    assert lines[1] == "0.0,0.5,3"
    assert lines[-1].startswith("# mean,")
