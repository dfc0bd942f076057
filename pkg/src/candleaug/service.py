"""HTTP questionnaire service for the real-vs-generated A/B game.

Builds 20-question sessions (one real window and one generated window per
question, sides randomized), records answers with timing to an append-only
JSON-lines log, and reports per-session scores plus pooled post-filter
statistics. Which side held the real window is never present in any payload
served before the session is complete.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal, Sequence

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import stats as stats_mod
from .ohlc import CandleWindow

QUESTIONS_PER_SESSION = 20


class ServiceError(ValueError):
    pass


class CorpusTooSmall(ServiceError):
    pass


@dataclass
class _Question:
    question_id: str
    left: list[list[float]]
    right: list[list[float]]
    real_side: str            # "left" | "right"; never serialized pre-completion
    source_model: str


@dataclass
class _Session:
    session_id: str
    questions: list[_Question]
    created: float
    answers: dict[str, bool] = field(default_factory=dict)  # question_id -> chose_real
    completed: bool = False
    duration_s: float = 0.0

    def question_index(self, question_id: str) -> int:
        for i, q in enumerate(self.questions):
            if q.question_id == question_id:
                return i
        return -1


class AnswerBody(BaseModel):
    question_id: str
    chosen_side: Literal["left", "right"]


def _window_payload(w: CandleWindow) -> list[list[float]]:
    return [[c.open, c.high, c.low, c.close] for c in w]


class QuestionnaireService:
    """In-memory session store mirrored by an append-only response log."""

    def __init__(
        self,
        real_corpus: Sequence[CandleWindow],
        generated_corpora: dict[str, Sequence[CandleWindow]],
        log_path,
        seed: int | None = None,
        clock: Callable[[], float] = time.time,
    ) -> None:
        if not real_corpus:
            raise CorpusTooSmall("real corpus is empty")
        if not generated_corpora:
            raise CorpusTooSmall("at least one generated corpus must be registered")
        for name, corpus in generated_corpora.items():
            if not corpus:
                raise CorpusTooSmall(f"generated corpus {name!r} is empty")
        self.real = list(real_corpus)
        self.generated = {name: list(corpus) for name, corpus in generated_corpora.items()}
        self.model_names = sorted(self.generated)
        self.log_path = Path(log_path)
        self.clock = clock
        self._rng = np.random.default_rng(seed)
        self._sessions: dict[str, _Session] = {}
        self._lock = threading.Lock()

    def _append_log(self, event: dict) -> None:
        with open(self.log_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(event) + "\n")
            fh.flush()

    def create_session(self) -> _Session:
        with self._lock:
            n = QUESTIONS_PER_SESSION
            if len(self.real) < n:
                raise CorpusTooSmall(f"real corpus has {len(self.real)} windows, need {n}")
            models = [self.model_names[i] for i in
                      self._rng.integers(0, len(self.model_names), size=n)]
            need = {name: models.count(name) for name in set(models)}
            for name, count in need.items():
                if len(self.generated[name]) < count:
                    raise CorpusTooSmall(
                        f"generated corpus {name!r} has {len(self.generated[name])} "
                        f"windows, need {count}"
                    )
            real_picks = self._rng.choice(len(self.real), size=n, replace=False)
            fake_picks: dict[str, list[int]] = {
                name: list(self._rng.choice(len(self.generated[name]), size=count, replace=False))
                for name, count in need.items()
            }
            session_id = secrets.token_urlsafe(16)  # 128-bit
            questions = []
            for i in range(n):
                real_w = self.real[int(real_picks[i])]
                model = models[i]
                fake_w = self.generated[model][int(fake_picks[model].pop())]
                real_side = "left" if self._rng.integers(0, 2) == 0 else "right"
                left, right = (real_w, fake_w) if real_side == "left" else (fake_w, real_w)
                questions.append(
                    _Question(
                        question_id=f"q{i}",
                        left=_window_payload(left),
                        right=_window_payload(right),
                        real_side=real_side,
                        source_model=model,
                    )
                )
            session = _Session(session_id, questions, created=self.clock())
            self._sessions[session_id] = session
            self._append_log(
                {"type": "session", "session_id": session_id, "created": session.created}
            )
            return session

    def submit_answer(self, session_id: str, question_id: str, chosen_side: str) -> bool:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise KeyError("unknown session")
            idx = session.question_index(question_id)
            if idx < 0:
                raise KeyError("unknown question")
            if question_id in session.answers:
                raise ValueError("duplicate answer")
            q = session.questions[idx]
            chose_real = chosen_side == q.real_side
            ts = self.clock()
            session.answers[question_id] = chose_real
            self._append_log(
                {
                    "type": "answer",
                    "session_id": session_id,
                    "question_id": question_id,
                    "question_index": idx,
                    "source_model": q.source_model,
                    "chose_real": chose_real,
                    "ts": ts,
                }
            )
            if len(session.answers) == len(session.questions):
                session.completed = True
                session.duration_s = max(0.0, ts - session.created)
                self._append_log(
                    {
                        "type": "complete",
                        "session_id": session_id,
                        "duration_s": session.duration_s,
                        "score": self._score(session),
                    }
                )
            return True

    @staticmethod
    def _score(session: _Session) -> float:
        return sum(session.answers.values()) / len(session.questions)

    def session_result(self, session_id: str) -> dict:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                raise KeyError("unknown session")
            if not session.completed:
                raise ValueError("session incomplete")
            per_question = [
                {
                    "question_id": q.question_id,
                    "correct": session.answers[q.question_id],
                    "source_model": q.source_model,
                }
                for q in session.questions
            ]
            return {
                "score": self._score(session),
                "per_question": per_question,
                "duration_s": session.duration_s,
            }

    def pooled_stats(self) -> dict:
        """Post-filter pooled correct ratios per model plus the session count."""
        with self._lock:
            sessions = [
                stats_mod.SessionRecord(s.session_id, s.created, s.duration_s, s.completed)
                for s in self._sessions.values()
            ]
            responses = [
                stats_mod.ResponseRecord(s.session_id, i, q.source_model, s.answers[q.question_id])
                for s in self._sessions.values()
                for i, q in enumerate(s.questions)
                if q.question_id in s.answers
            ]
        report = stats_mod.filter_sessions(sessions, responses)
        per_model = {}
        for name in self.model_names:
            _, pooled = stats_mod.correct_ratio_per_capita(report.responses, name)
            per_model[name] = {
                "answers": pooled.total,
                "correct": pooled.correct,
                "correct_ratio": pooled.ratio,
            }
        return {"sessions": len(report.sessions), "models": per_model}


def create_app(
    real_corpus: Sequence[CandleWindow],
    generated_corpora: dict[str, Sequence[CandleWindow]],
    log_path,
    seed: int | None = None,
    clock: Callable[[], float] = time.time,
    static_dir: str | Path | None = None,
) -> FastAPI:
    service = QuestionnaireService(real_corpus, generated_corpora, log_path, seed, clock)
    app = FastAPI(title="candleaug questionnaire")
    app.state.service = service

    @app.post("/api/sessions")
    def create_session() -> dict:
        try:
            session = service.create_session()
        except CorpusTooSmall as exc:
            raise HTTPException(status_code=503, detail=str(exc)) from None
        return {
            "session_id": session.session_id,
            "questions": [
                {"question_id": q.question_id, "left": q.left, "right": q.right}
                for q in session.questions
            ],
        }

    @app.post("/api/sessions/{session_id}/answers")
    def submit_answer(session_id: str, body: AnswerBody) -> dict:
        try:
            accepted = service.submit_answer(session_id, body.question_id, body.chosen_side)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return {"accepted": accepted}

    @app.get("/api/sessions/{session_id}/result")
    def session_result(session_id: str) -> dict:
        try:
            return service.session_result(session_id)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except ValueError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None

    @app.get("/api/stats")
    def pooled_stats() -> dict:
        return service.pooled_stats()

    if static_dir is not None and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
