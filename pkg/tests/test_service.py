import json

import pytest
from fastapi.testclient import TestClient

from candleaug.service import CorpusTooSmall, QuestionnaireService, create_app
from candleaug.stats import correct_ratio_per_capita, filter_sessions, parse_response_log
from candleaug.synthetic import pattern_corpus


class FakeClock:
    def __init__(self, t=1000.0):
        self.t = t

    def __call__(self):
        return self.t

    def advance(self, dt):
        self.t += dt


@pytest.fixture()
def corpora():
    real = [w for w, _ in pattern_corpus(4, seed=41)]       # 32 windows
    gen_a = [w for w, _ in pattern_corpus(4, seed=42)]
    gen_b = [w for w, _ in pattern_corpus(4, seed=43)]
    return real, {"adversarial": gen_a, "cvae": gen_b}


def _client(tmp_path, corpora, clock, seed=7):
    real, generated = corpora
    app = create_app(real, generated, tmp_path / "responses.log", seed=seed, clock=clock)
    return TestClient(app)


def _play(client, session, right_then_left=False, answer_delay=None, clock=None):
    """Answer every question; returns the list of ack payloads."""
    acks = []
    for i, q in enumerate(session["questions"]):
        side = "right" if (right_then_left and i % 2 == 0) else "left"
        if clock is not None and answer_delay:
            clock.advance(answer_delay)
        r = client.post(
            f"/api/sessions/{session['session_id']}/answers",
            json={"question_id": q["question_id"], "chosen_side": side},
        )
        acks.append(r)
    return acks


def test_session_payload_shape_and_secrecy(tmp_path, corpora):
    client = _client(tmp_path, corpora, FakeClock())
    r = client.post("/api/sessions")
    assert r.status_code == 200
    body = r.json()
    assert len(body["questions"]) == 20
    for q in body["questions"]:
        assert len(q["left"]) == 10 and len(q["right"]) == 10
        assert all(len(bar) == 4 for bar in q["left"])
    # the real side and the fake's generator must not leak pre-completion
    text = json.dumps(body)
    assert "real_side" not in text
    assert "source_model" not in text


def test_full_session_flow_and_result(tmp_path, corpora):
    clock = FakeClock()
    client = _client(tmp_path, corpora, clock)
    session = client.post("/api/sessions").json()
    acks = _play(client, session, answer_delay=1.0, clock=clock)
    assert all(a.status_code == 200 and a.json() == {"accepted": True} for a in acks)
    result = client.get(f"/api/sessions/{session['session_id']}/result").json()
    assert result["duration_s"] == pytest.approx(20.0)
    per_q = result["per_question"]
    assert len(per_q) == 20
    assert result["score"] == pytest.approx(sum(q["correct"] for q in per_q) / 20)
    assert {q["source_model"] for q in per_q} <= {"adversarial", "cvae"}


def test_result_before_completion_conflicts(tmp_path, corpora):
    client = _client(tmp_path, corpora, FakeClock())
    session = client.post("/api/sessions").json()
    sid = session["session_id"]
    q0 = session["questions"][0]["question_id"]
    client.post(f"/api/sessions/{sid}/answers", json={"question_id": q0, "chosen_side": "left"})
    assert client.get(f"/api/sessions/{sid}/result").status_code == 409


def test_duplicate_answer_rejected(tmp_path, corpora):
    client = _client(tmp_path, corpora, FakeClock())
    session = client.post("/api/sessions").json()
    sid = session["session_id"]
    q0 = session["questions"][0]["question_id"]
    body = {"question_id": q0, "chosen_side": "left"}
    assert client.post(f"/api/sessions/{sid}/answers", json=body).status_code == 200
    assert client.post(f"/api/sessions/{sid}/answers", json=body).status_code == 409


def test_unknown_session_and_question(tmp_path, corpora):
    client = _client(tmp_path, corpora, FakeClock())
    session = client.post("/api/sessions").json()
    sid = session["session_id"]
    missing = client.post(
        "/api/sessions/nosuchtoken/answers",
        json={"question_id": "q0", "chosen_side": "left"},
    )
    assert missing.status_code == 404
    bad_q = client.post(
        f"/api/sessions/{sid}/answers",
        json={"question_id": "q99", "chosen_side": "left"},
    )
    assert bad_q.status_code == 404
    assert client.get("/api/sessions/nosuchtoken/result").status_code == 404


def test_malformed_body_rejected(tmp_path, corpora):
    client = _client(tmp_path, corpora, FakeClock())
    session = client.post("/api/sessions").json()
    sid = session["session_id"]
    r = client.post(f"/api/sessions/{sid}/answers", json={"question_id": "q0", "chosen_side": "up"})
    assert r.status_code == 422
    r = client.post(f"/api/sessions/{sid}/answers", json={"nonsense": 1})
    assert r.status_code == 422


def test_corpus_too_small_raises():
    real = [w for w, _ in pattern_corpus(1, seed=44)][:3]  # below 20
    generated = {"adversarial": [w for w, _ in pattern_corpus(4, seed=45)]}
    with pytest.raises(CorpusTooSmall):
        QuestionnaireService(real, {}, "unused.log")
    svc = QuestionnaireService(real, generated, "unused.log", seed=1)
    with pytest.raises(CorpusTooSmall):
        svc.create_session()


def test_log_replay_reproduces_score(tmp_path, corpora):
    clock = FakeClock()
    client = _client(tmp_path, corpora, clock)
    session = client.post("/api/sessions").json()
    _play(client, session, right_then_left=True, answer_delay=0.5, clock=clock)
    reported = client.get(f"/api/sessions/{session['session_id']}/result").json()

    sessions, responses = parse_response_log(tmp_path / "responses.log")
    report = filter_sessions(sessions, responses)
    assert len(report.sessions) == 1
    replay_score = sum(r.chose_real for r in report.responses) / 20
    assert replay_score == pytest.approx(reported["score"])


def test_stats_endpoint_applies_filter(tmp_path, corpora):
    clock = FakeClock()
    client = _client(tmp_path, corpora, clock)

    fast = client.post("/api/sessions").json()          # finishes in 2 s: dropped
    _play(client, fast, answer_delay=0.1, clock=clock)
    slow = client.post("/api/sessions").json()          # finishes in 20 s: kept
    _play(client, slow, answer_delay=1.0, clock=clock)
    client.post("/api/sessions")                        # never answered: dropped

    stats = client.get("/api/stats").json()
    assert stats["sessions"] == 1
    total = sum(m["answers"] for m in stats["models"].values())
    assert total == 20
    for m in stats["models"].values():
        if m["answers"]:
            assert m["correct_ratio"] == pytest.approx(m["correct"] / m["answers"])

    # the endpoint agrees with the stats module over the same log
    sessions, responses = parse_response_log(tmp_path / "responses.log")
    report = filter_sessions(sessions, responses)
    for name, m in stats["models"].items():
        _, pooled = correct_ratio_per_capita(report.responses, name)
        assert (pooled.correct, pooled.total) == (m["correct"], m["answers"])


def test_both_generators_appear_over_sessions(tmp_path, corpora):
    clock = FakeClock()
    client = _client(tmp_path, corpora, clock, seed=3)
    seen = set()
    for _ in range(3):
        session = client.post("/api/sessions").json()
        _play(client, session, answer_delay=1.0, clock=clock)
        result = client.get(f"/api/sessions/{session['session_id']}/result").json()
        seen |= {q["source_model"] for q in result["per_question"]}
    assert seen == {"adversarial", "cvae"}
