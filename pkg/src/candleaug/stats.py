"""Questionnaire response filtering, per-respondent correct ratios, score
histogram, and the dependent paired t-test.

The two-sided p-value comes from the Student-t survival function computed
with a continued-fraction regularized incomplete beta, so the module has no
statistics dependency; tests cross-check it against a high-precision oracle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence


class StatsError(ValueError):
    pass


class UnpairedInput(StatsError):
    pass


class DegenerateVariance(StatsError):
    pass


class ScoreOutOfRange(StatsError):
    pass


@dataclass(frozen=True)
class ResponseRecord:
    session_id: str
    question_index: int
    source_model: str      # which generator produced the fake in this question
    chose_real: bool


@dataclass(frozen=True)
class SessionRecord:
    session_id: str
    started: float
    total_duration: float
    completed: bool


@dataclass(frozen=True)
class TTestResult:
    n: int
    mean_diff: float
    std_diff: float        # sample std, n-1 denominator
    t_value: float
    p_value: float
    df: int


@dataclass(frozen=True)
class FilterReport:
    sessions: list[SessionRecord]
    responses: list[ResponseRecord]
    dropped_incomplete: int
    dropped_fast: int


MIN_DURATION_S = 5.0


def filter_sessions(
    sessions: Sequence[SessionRecord],
    responses: Sequence[ResponseRecord],
) -> FilterReport:
    """Keep completed sessions that took at least five seconds; drop the rest
    (and their responses), reporting counts per drop reason."""
    dropped_incomplete = 0
    dropped_fast = 0
    kept: list[SessionRecord] = []
    for s in sessions:
        if not s.completed:
            dropped_incomplete += 1
        elif s.total_duration < MIN_DURATION_S:
            dropped_fast += 1
        else:
            kept.append(s)
    kept_ids = {s.session_id for s in kept}
    kept_responses = [r for r in responses if r.session_id in kept_ids]
    return FilterReport(kept, kept_responses, dropped_incomplete, dropped_fast)


@dataclass(frozen=True)
class PooledCounts:
    correct: int
    total: int

    @property
    def ratio(self) -> float:
        return self.correct / self.total if self.total else 0.0


def correct_ratio_per_capita(
    responses: Sequence[ResponseRecord],
    model: str,
) -> tuple[dict[str, float], PooledCounts]:
    """Per-session fraction of the model's questions answered correctly,
    keyed by session id, plus the pooled counts across all sessions.

    Sessions with no questions backed by the model are omitted from the
    per-session map (a ratio cannot be formed for them).
    """
    per_session: dict[str, list[bool]] = {}
    for r in responses:
        if r.source_model == model:
            per_session.setdefault(r.session_id, []).append(r.chose_real)
    ratios = {sid: sum(hits) / len(hits) for sid, hits in sorted(per_session.items())}
    total = sum(len(hits) for hits in per_session.values())
    correct = sum(sum(hits) for hits in per_session.values())
    return ratios, PooledCounts(correct, total)


def _betacf(a: float, b: float, x: float, tol: float = 1e-8, max_iter: int = 500) -> float:
    """Continued fraction for the regularized incomplete beta (Lentz)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < tol:
            return h
    raise StatsError(f"incomplete beta did not converge for a={a}, b={b}, x={x}")


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise StatsError("beta parameters must be positive")
    if x < 0.0 or x > 1.0:
        raise StatsError("x must be in [0, 1]")
    if x == 0.0 or x == 1.0:
        return x
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t: float, df: int) -> float:
    """Two-sided p-value: I_{df/(df+t^2)}(df/2, 1/2)."""
    if df < 1:
        raise StatsError("degrees of freedom must be >= 1")
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return regularized_incomplete_beta(df / 2.0, 0.5, x)


def paired_t_test(xs: Sequence[float], ys: Sequence[float]) -> TTestResult:
    """Dependent paired t-test on per-session ratios, two-sided.

    d = x - y per pair; t = mean(d) / (sd(d) / sqrt(n)) with the sample
    standard deviation (n-1 denominator).
    """
    if len(xs) != len(ys):
        raise UnpairedInput(f"{len(xs)} vs {len(ys)} observations")
    n = len(xs)
    if n < 2:
        raise UnpairedInput("need at least two pairs")
    d = [float(x) - float(y) for x, y in zip(xs, ys)]
    mean = sum(d) / n
    var = sum((v - mean) ** 2 for v in d) / (n - 1)
    sd = math.sqrt(var)
    if sd == 0.0:
        raise DegenerateVariance("all paired differences are identical")
    t = mean / (sd / math.sqrt(n))
    return TTestResult(
        n=n,
        mean_diff=mean,
        std_diff=sd,
        t_value=t,
        p_value=student_t_two_sided_p(t, n - 1),
        df=n - 1,
    )


def score_histogram(
    session_scores: Sequence[float],
    bins: int,
) -> tuple[list[int], float | None]:
    """Equal-width right-closed bins over [0, 1] (boundary values fall to the
    lower bin; the first bin also includes 0); also the mean score (None when
    there are no inputs)."""
    if bins < 1:
        raise StatsError("bins must be >= 1")
    counts = [0] * bins
    for s in session_scores:
        if s < 0.0 or s > 1.0:
            raise ScoreOutOfRange(f"score {s} outside [0, 1]")
        counts[min(max(math.ceil(s * bins) - 1, 0), bins - 1)] += 1
    if not session_scores:
        return counts, None
    return counts, sum(session_scores) / len(session_scores)


def parse_response_log(path) -> tuple[list[SessionRecord], list[ResponseRecord]]:
    """Rebuild session and response records from the service's append-only
    log (one JSON event per line: session / answer / complete)."""
    created: dict[str, float] = {}
    answers: dict[str, list[ResponseRecord]] = {}
    last_answer: dict[str, float] = {}
    completed: dict[str, float] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                ev = json.loads(line)
                kind = ev["type"]
                sid = ev["session_id"]
            except (json.JSONDecodeError, KeyError) as exc:
                raise StatsError(f"line {line_no}: {exc}") from None
            if kind == "session":
                created[sid] = float(ev["created"])
                order.append(sid)
            elif kind == "answer":
                answers.setdefault(sid, []).append(
                    ResponseRecord(
                        session_id=sid,
                        question_index=int(ev["question_index"]),
                        source_model=str(ev["source_model"]),
                        chose_real=bool(ev["chose_real"]),
                    )
                )
                last_answer[sid] = float(ev["ts"])
            elif kind == "complete":
                completed[sid] = float(ev["duration_s"])
            else:
                raise StatsError(f"line {line_no}: unknown event type {kind!r}")
    sessions = []
    responses: list[ResponseRecord] = []
    for sid in order:
        start = created[sid]
        if sid in completed:
            duration = completed[sid]
            done = True
        else:
            duration = max(0.0, last_answer.get(sid, start) - start)
            done = False
        sessions.append(SessionRecord(sid, start, duration, done))
        responses.extend(answers.get(sid, []))
    return sessions, responses


def write_histogram_csv(path, counts: Sequence[int], mean: float | None) -> None:
    bins = len(counts)
    lines = ["bin_low,bin_high,count"]
    for i, c in enumerate(counts):
        lines.append(f"{i / bins},{(i + 1) / bins},{c}")
    if mean is not None:
        lines.append(f"# mean,{mean}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def format_t_test(r: TTestResult) -> str:
    return (
        f"n={r.n} df={r.df} mean_diff={r.mean_diff:.6f} "
        f"std_diff={r.std_diff:.6f} t={r.t_value:.4f} p={r.p_value:.6f}"
    )
