"""Progress-gated tutoring: retrieval over covered lessons, cited answers.

A question is answered only from transcript chunks of lessons the learner
has already reached; when the gate leaves nothing to retrieve from, the
result is a typed "not covered yet" reply rather than an error or an
answer drawn from future material.
"""

from __future__ import annotations

import datetime
import hashlib
from dataclasses import dataclass
from enum import Enum

from .gateway import (
    LlmClient,
    PipelineConfig,
    ProviderUnreachable,
    _RepairExhausted,
    render_prompt,
    schema_text,
    validated_completion,
)
from . import _text
from .model import LearnerState, Plan, QuestionRecord, SessionKind, Syllabus
from .transcripts import Chunk, EmptyQuery, LexicalIndex, search

DEFAULT_TOP_K = 4

NOT_COVERED_BODY = (
    "This topic is not covered by the lessons you have studied so far. "
    "Ask about your completed or current lessons, or come back after your "
    "schedule reaches it."
)


class AnswerProvenance(str, Enum):
    LLM_COMPOSED = "llm_composed"
    EXTRACTIVE = "extractive"


@dataclass(frozen=True)
class Citation:
    lesson_id: str
    start_seconds: float
    end_seconds: float

    def to_doc(self) -> dict:
        return {
            "lesson_id": self.lesson_id,
            "start_s": round(self.start_seconds, 3),
            "end_s": round(self.end_seconds, 3),
        }


@dataclass(frozen=True)
class Answer:
    answer_id: str
    relevant_lesson: str
    body: str
    citations: tuple[Citation, ...]
    provenance: AnswerProvenance

    def __post_init__(self):
        if not self.citations:
            raise ValueError("an answer must carry at least one citation")

    def to_doc(self) -> dict:
        return {
            "kind": "answer",
            "answer_id": self.answer_id,
            "relevant_lesson": self.relevant_lesson,
            "body": self.body,
            "citations": [c.to_doc() for c in self.citations],
            "provenance": self.provenance.value,
        }


@dataclass(frozen=True)
class NotCovered:
    body: str
    allowed: tuple[str, ...]

    def to_doc(self) -> dict:
        return {
            "kind": "not_covered",
            "body": self.body,
            "allowed_lessons": list(self.allowed),
        }


def allowed_lessons(state: LearnerState, plan: Plan) -> set[str]:
    """Lessons with at least one completed session, plus the current one."""
    allowed = set()
    by_id = {s.id: s for s in plan.sessions}
    for session_id in state.completed_session_ids:
        session = by_id.get(session_id)
        if session is not None and session.kind is SessionKind.STUDY:
            allowed.add(session.lesson_id)
    if state.current_lesson_id:
        allowed.add(state.current_lesson_id)
    return allowed


def answer_id_for(query: str, chunk_ids: list[str], provenance: str) -> str:
    payload = "answer:" + provenance + ":" + query + ":" + ",".join(chunk_ids)
    return hashlib.sha1(payload.encode("utf-8")).hexdigest()[:12]


def _citations_for(chunks: list[Chunk]) -> tuple[Citation, ...]:
    return tuple(Citation(c.lesson_id, c.start_seconds, c.end_seconds) for c in chunks)


def _lesson_title(syllabus: Syllabus, lesson_id: str) -> str:
    lesson = syllabus.lesson(lesson_id)
    return lesson.title if lesson is not None else lesson_id


def _compose_with_llm(
    query: str,
    hits: list[tuple[Chunk, float]],
    client: LlmClient,
    config: PipelineConfig,
) -> tuple[str, list[Chunk]] | None:
    """Model-written body plus the subset of chunks it cited, or ``None``."""
    rendered = "\n".join(
        f"[{i}] lesson={chunk.lesson_id} "
        f"time={chunk.start_seconds:.0f}-{chunk.end_seconds:.0f}s: {chunk.text}"
        for i, (chunk, _) in enumerate(hits)
    )
    prompt = render_prompt(
        config.templates["tutor"],
        query=query,
        chunks=rendered,
        schema=schema_text("tutor_answer"),
    )

    def check(doc: dict) -> list[str]:
        bad = [i for i in doc["cited_chunks"] if not 0 <= i < len(hits)]
        if bad:
            return [f"cited_chunks indexes out of range: {bad}; valid 0..{len(hits) - 1}"]
        return []

    try:
        doc, _ = validated_completion(client, prompt, "tutor_answer", config, check)
    except (_RepairExhausted, ProviderUnreachable):
        return None
    seen = []
    for i in doc["cited_chunks"]:
        if hits[i][0] not in seen:
            seen.append(hits[i][0])
    return str(doc["body"]), seen


def ask(
    query: str,
    state: LearnerState,
    plan: Plan,
    syllabus: Syllabus,
    index: LexicalIndex,
    client: LlmClient | None = None,
    config: PipelineConfig | None = None,
    k: int = DEFAULT_TOP_K,
    now: datetime.datetime | None = None,
) -> tuple[Answer | NotCovered, LearnerState]:
    """Answer a question from covered-lesson transcripts.

    Returns the reply plus the learner state with the question logged.
    Raises ``EmptyQuery`` for a tokenless query. Without a client (or when
    the model's reply never validates) the body is the top chunk's text;
    either way the relevant lesson is the top-ranked chunk's lesson and
    every citation points at a retrieved chunk's interval.
    """
    config = config or PipelineConfig()
    if not _text.tokenize(query):
        raise EmptyQuery("query has no searchable tokens")
    allowed = allowed_lessons(state, plan)
    hits = search(index, query, allowed, k) if allowed else []
    timestamp = now or datetime.datetime.now(datetime.timezone.utc)

    if not hits:
        reply: Answer | NotCovered = NotCovered(
            body=NOT_COVERED_BODY, allowed=tuple(sorted(allowed))
        )
        record = QuestionRecord(timestamp=timestamp, query=query, answer_id="not_covered")
        return reply, state.with_question(record)

    top_chunk = hits[0][0]
    composed = None
    if client is not None:
        composed = _compose_with_llm(query, hits, client, config)
    if composed is not None:
        body, cited = composed
        provenance = AnswerProvenance.LLM_COMPOSED
    else:
        body, cited = top_chunk.text, [top_chunk]
        provenance = AnswerProvenance.EXTRACTIVE

    answer_id = answer_id_for(query, [c.chunk_id for c in cited], provenance.value)
    reply = Answer(
        answer_id=answer_id,
        relevant_lesson=_lesson_title(syllabus, top_chunk.lesson_id),
        body=body,
        citations=_citations_for(cited),
        provenance=provenance,
    )
    record = QuestionRecord(timestamp=timestamp, query=query, answer_id=answer_id)
    return reply, state.with_question(record)
