"""HTTP JSON API and the application core it wraps.

``CoreApp`` owns the catalog, the document store, and the LLM client, and
exposes the user-facing operations as plain methods raising typed errors;
``create_app`` wraps it in FastAPI and maps those errors to status codes.
The CLI drives the same ``CoreApp`` directly, so every endpoint has a
no-HTTP twin.
"""

from __future__ import annotations

import uuid
from typing import Any

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from . import tutor
from .calendarize import (
    CalendarEdit,
    MalformedEvent,
    UnknownLesson,
    export_ical,
    plan_to_events,
)
from .catalog import Catalog, MissingSyllabus, load_catalog, recommend_courses
from .config import ServiceConfig
from .gateway import (
    PROVENANCE_DETERMINISTIC,
    PROVENANCE_FALLBACK,
    ProviderUnreachable,
    Unextractable,
    extract_profile,
    generate_plan,
)
from .model import (
    LearnerState,
    Plan,
    SessionKind,
    Syllabus,
    ValidationError,
    validate_plan,
    validate_learner_state,
    validate_profile,
)
from .planner import (
    OverlapAfterEdit,
    PlanEditError,
    UnknownSession,
    build_plan,
    revise_plan,
)
from .store import JsonStore, MissingDocument
from .transcripts import (
    DirectoryFetcher,
    EmptyQuery,
    LexicalIndex,
    TranscriptDoc,
    TranscriptNotFound,
    build_index,
    chunk_transcript,
    ingest_transcript,
)

PLANS = "plans"
HEADS = "heads"
STATES = "states"
TRANSCRIPTS = "transcripts"
INDEXES = "indexes"


def _revision_key(plan_id: str, revision: int) -> str:
    return f"{plan_id}.r{revision}"


class CoreApp:
    """All service operations, independent of the HTTP layer."""

    def __init__(self, config: ServiceConfig | None = None):
        self.config = config or ServiceConfig()
        self.catalog: Catalog = load_catalog(self.config.resolved_catalog_dir())
        self.store = JsonStore(self.config.data_dir)
        self.fetcher = DirectoryFetcher(self.config.resolved_transcripts_dir())
        self.client = self.config.make_client()
        self.pipeline = self.config.pipeline()

    # -- catalog ----------------------------------------------------------

    def courses(self, topic: str | None = None) -> dict:
        cards = self.catalog.cards
        if topic:
            ids = set(self.catalog.topic_index.get(topic.lower(), ()))
            cards = tuple(c for c in cards if c.course_id in ids)
        return {"courses": [c.public_doc() for c in cards]}

    def recommend(self, goal_text: str, k: int = 5) -> dict:
        if not goal_text.strip():
            raise EmptyQuery("goal_text is empty")
        ranked = recommend_courses(goal_text, self.catalog, k)
        return {
            "results": [
                {**card.public_doc(), "score": score}
                for card, score in ranked
            ]
        }

    def topics(self) -> dict:
        return {"topics": list(self.catalog.topic_index)}

    def syllabus_doc(self, course_id: str) -> dict:
        if self.catalog.card(course_id) is None:
            raise MissingDocument(f"no course {course_id!r}", element=course_id)
        return self._syllabus(course_id).to_doc()

    def _syllabus(self, course_id: str) -> Syllabus:
        return self.catalog.syllabus(course_id)

    # -- plans -------------------------------------------------------------

    def _plan_response(
        self, plan_id: str, plan: Plan, warnings: list[dict] | None = None
    ) -> dict:
        syllabus = self._syllabus(plan.course_id)
        events = plan_to_events(plan, syllabus)
        return {
            "plan_id": plan_id,
            "provenance": plan.provenance,
            "plan": plan.to_doc(),
            "events": [e.to_doc() for e in events],
            "warnings": warnings or [],
        }

    def create_plan(
        self,
        course_id: str,
        dimension_answers: dict[str, str] | None = None,
        profile_doc: dict | None = None,
        use_llm: bool = False,
        start_date: str | None = None,
    ) -> dict:
        if self.catalog.card(course_id) is None:
            raise MissingDocument(f"no course {course_id!r}", element=course_id)
        syllabus = self._syllabus(course_id)
        client = self.client if use_llm else None

        if profile_doc is not None:
            profile = validate_profile(profile_doc)
        elif dimension_answers is not None:
            profile = extract_profile(
                dimension_answers, client, self.pipeline, start_date
            ).value
        else:
            raise Unextractable("request needs dimension_answers or a profile")

        try:
            result = generate_plan(syllabus, profile, client, self.pipeline)
            plan = result.value
        except ProviderUnreachable:
            plan = build_plan(
                syllabus, profile, self.pipeline.policy, provenance=PROVENANCE_FALLBACK
            )

        plan_id = uuid.uuid4().hex[:12]
        with self.store.lock(HEADS, plan_id):
            self.store.create(PLANS, _revision_key(plan_id, plan.revision), plan.to_doc())
            state = LearnerState(
                course_id=course_id, current_lesson_id=self._first_lesson(plan)
            )
            self.store.put(STATES, plan_id, state.to_doc())
            self.store.put(
                HEADS,
                plan_id,
                {"plan_id": plan_id, "course_id": course_id, "head_revision": plan.revision},
            )
        return self._plan_response(plan_id, plan)

    @staticmethod
    def _first_lesson(plan: Plan) -> str | None:
        for session in plan.sessions:
            if session.kind is SessionKind.STUDY:
                return session.lesson_id
        return None

    def _load_plan(self, plan_id: str) -> Plan:
        head = self.store.get(HEADS, plan_id)
        doc = self.store.get(PLANS, _revision_key(plan_id, head["head_revision"]))
        return validate_plan(doc)

    def plan_response(self, plan_id: str) -> dict:
        return self._plan_response(plan_id, self._load_plan(plan_id))

    def edit_events(self, plan_id: str, edit_docs: list[Any]) -> dict:
        edits = [CalendarEdit.from_doc(raw) for raw in edit_docs]
        with self.store.lock(HEADS, plan_id):
            plan = self._load_plan(plan_id)
            syllabus = self._syllabus(plan.course_id)
            result = revise_plan(plan, edits, syllabus, self.pipeline.policy)
            revised = result.plan
            self.store.create(PLANS, _revision_key(plan_id, revised.revision), revised.to_doc())
            self.store.update(
                HEADS, plan_id, lambda head: {**head, "head_revision": revised.revision}
            )
        warnings = [v.to_doc() for v in result.warnings]
        return self._plan_response(plan_id, revised, warnings)

    def ical(self, plan_id: str) -> str:
        plan = self._load_plan(plan_id)
        syllabus = self._syllabus(plan.course_id)
        return export_ical(plan_to_events(plan, syllabus), calendar_name=syllabus.course_title)

    # -- learning ----------------------------------------------------------

    def _load_state(self, plan_id: str) -> LearnerState:
        return validate_learner_state(self.store.get(STATES, plan_id))

    def state_doc(self, plan_id: str) -> dict:
        return self._load_state(plan_id).to_doc()

    def _load_index(self, course_id: str) -> LexicalIndex:
        doc = self.store.get_or(INDEXES, course_id)
        if doc is None:
            return build_index([])
        return LexicalIndex.from_doc(doc)

    def ask(self, plan_id: str, query: str) -> dict:
        with self.store.lock(HEADS, plan_id):
            plan = self._load_plan(plan_id)
            state = self._load_state(plan_id)
            syllabus = self._syllabus(plan.course_id)
            index = self._load_index(plan.course_id)
            reply, new_state = tutor.ask(
                query, state, plan, syllabus, index, self.client, self.pipeline
            )
            self.store.put(STATES, plan_id, new_state.to_doc())
        return reply.to_doc()

    def progress(
        self, plan_id: str, session_id: str, current_lesson_id: str | None = None
    ) -> dict:
        with self.store.lock(HEADS, plan_id):
            plan = self._load_plan(plan_id)
            state = self._load_state(plan_id)
            session = plan.session(session_id)
            if session is None:
                raise MissingDocument(
                    f"no session {session_id!r} in plan {plan_id}", element=session_id
                )
            state = state.with_completed(session_id)
            if current_lesson_id is not None:
                syllabus = self._syllabus(plan.course_id)
                if syllabus.lesson(current_lesson_id) is None:
                    raise UnknownLesson(f"unknown lesson {current_lesson_id!r}")
                current = current_lesson_id
            else:
                current = self._next_lesson(plan, state)
            state = state.with_current_lesson(current)
            self.store.put(STATES, plan_id, state.to_doc())
        return state.to_doc()

    @staticmethod
    def _next_lesson(plan: Plan, state: LearnerState) -> str | None:
        for session in plan.sessions:
            if (
                session.kind is SessionKind.STUDY
                and session.id not in state.completed_session_ids
            ):
                return session.lesson_id
        return None

    # -- transcripts ---------------------------------------------------------

    def ingest(
        self,
        lesson_id: str,
        content: str | None = None,
        video_id: str | None = None,
        fmt: str | None = None,
        filename: str | None = None,
    ) -> dict:
        if content is None:
            locator = video_id or self._video_locator(lesson_id)
            if locator is None:
                raise TranscriptNotFound(
                    f"lesson {lesson_id!r} has no video resource to fetch", element=lesson_id
                )
            content, fetched_fmt = self.fetcher.fetch(locator)
            fmt = fmt or fetched_fmt
        doc = ingest_transcript(content, lesson_id, fmt=fmt, filename=filename)
        self.store.put(TRANSCRIPTS, lesson_id, doc.to_doc())
        indexed = self._reindex_courses_with(lesson_id)
        chunks = chunk_transcript(doc, self.config.chunk_seconds)
        return {
            "ingested": [
                {"lesson_id": lesson_id, "segments": len(doc.segments), "chunks": len(chunks)}
            ],
            "indexed_courses": indexed,
        }

    def ingest_course(self, course_id: str) -> dict:
        """Ingest every lesson of a course that has a fetchable transcript."""
        if self.catalog.card(course_id) is None:
            raise MissingDocument(f"no course {course_id!r}", element=course_id)
        syllabus = self._syllabus(course_id)
        ingested = []
        for lesson in syllabus.lessons():
            locator = next(
                (r.locator for r in lesson.resources if r.kind.value == "video"), None
            )
            if locator is None:
                continue
            try:
                content, fmt = self.fetcher.fetch(locator)
            except TranscriptNotFound:
                continue
            doc = ingest_transcript(content, lesson.id, video_locator=locator, fmt=fmt)
            self.store.put(TRANSCRIPTS, lesson.id, doc.to_doc())
            chunks = chunk_transcript(doc, self.config.chunk_seconds)
            ingested.append(
                {"lesson_id": lesson.id, "segments": len(doc.segments), "chunks": len(chunks)}
            )
        self._rebuild_index(course_id)
        return {"ingested": ingested, "indexed_courses": [course_id]}

    def _video_locator(self, lesson_id: str) -> str | None:
        for card in self.catalog.cards:
            lesson = self._syllabus(card.course_id).lesson(lesson_id)
            if lesson is not None:
                for resource in lesson.resources:
                    if resource.kind.value == "video":
                        return resource.locator
        return None

    def _reindex_courses_with(self, lesson_id: str) -> list[str]:
        touched = []
        for card in self.catalog.cards:
            if self._syllabus(card.course_id).lesson(lesson_id) is not None:
                self._rebuild_index(card.course_id)
                touched.append(card.course_id)
        return touched

    def _rebuild_index(self, course_id: str) -> None:
        syllabus = self._syllabus(course_id)
        chunks = []
        for lesson in syllabus.lessons():
            doc = self.store.get_or(TRANSCRIPTS, lesson.id)
            if doc is None:
                continue
            chunks.extend(
                chunk_transcript(TranscriptDoc.from_doc(doc), self.config.chunk_seconds)
            )
        self.store.put(INDEXES, course_id, build_index(chunks).to_doc())


# --------------------------------------------------------------------------
# HTTP layer


class RecommendRequest(BaseModel):
    goal_text: str
    k: int = 5


class PlanRequest(BaseModel):
    course_id: str
    dimension_answers: dict[str, str] | None = None
    profile: dict | None = None
    use_llm: bool = False
    start_date: str | None = None


class EditsRequest(BaseModel):
    edits: list[dict]


class AskRequest(BaseModel):
    plan_id: str
    query: str


class ProgressRequest(BaseModel):
    plan_id: str
    session_id: str
    current_lesson_id: str | None = None


class IngestRequest(BaseModel):
    lesson_id: str | None = None
    course_id: str | None = None
    content: str | None = None
    video_id: str | None = None
    format: str | None = None


def _error_body(code: str, message: str, extra: dict | None = None) -> dict:
    body = {"error": {"code": code, "message": message}}
    if extra:
        body["error"].update(extra)
    return body


_STATUS_BY_ERROR: list[tuple[type, int]] = [
    (MissingDocument, 404),
    (MissingSyllabus, 404),
    (TranscriptNotFound, 404),
    (EmptyQuery, 400),
    (Unextractable, 422),
    (MalformedEvent, 422),
    (UnknownLesson, 422),
]


def _validation_status(exc: ValidationError) -> int:
    for etype, status in _STATUS_BY_ERROR:
        if isinstance(exc, etype):
            return status
    return 422


def create_app(config: ServiceConfig | None = None, core: CoreApp | None = None) -> FastAPI:
    core = core or CoreApp(config)
    app = FastAPI(title="studypilot", version="1.0.0")
    app.state.core = core

    @app.exception_handler(ValidationError)
    async def on_validation_error(request: Request, exc: ValidationError):
        return JSONResponse(_error_body(exc.code, exc.message), _validation_status(exc))

    # Unreadable or wrongly-shaped request bodies are the caller's syntax
    # problem, not a semantic rejection, so they get 400 rather than 422.
    @app.exception_handler(RequestValidationError)
    async def on_request_shape(request: Request, exc: RequestValidationError):
        return JSONResponse(_error_body("invalid_request", str(exc.errors()[:3])), 400)

    @app.exception_handler(UnknownSession)
    async def on_unknown_session(request: Request, exc: UnknownSession):
        return JSONResponse(_error_body("unknown_session", str(exc)), 404)

    @app.exception_handler(PlanEditError)
    async def on_edit_conflict(request: Request, exc: PlanEditError):
        extra = {"violations": [v.to_doc() for v in exc.violations]}
        code = "overlap_after_edit" if isinstance(exc, OverlapAfterEdit) else "edit_conflict"
        return JSONResponse(_error_body(code, str(exc), extra), 409)

    @app.exception_handler(ProviderUnreachable)
    async def on_provider_error(request: Request, exc: ProviderUnreachable):
        return JSONResponse(_error_body("provider_unreachable", str(exc)), 503)

    @app.get("/courses")
    def get_courses(topic: str | None = None):
        return core.courses(topic)

    @app.post("/courses/recommend")
    def post_recommend(body: RecommendRequest):
        return core.recommend(body.goal_text, body.k)

    @app.get("/courses/topics")
    def get_topics():
        return core.topics()

    @app.get("/courses/{course_id}/syllabus")
    def get_syllabus(course_id: str):
        return core.syllabus_doc(course_id)

    @app.post("/plans", status_code=201)
    def post_plans(body: PlanRequest):
        return core.create_plan(
            body.course_id,
            dimension_answers=body.dimension_answers,
            profile_doc=body.profile,
            use_llm=body.use_llm,
            start_date=body.start_date,
        )

    @app.get("/plans/{plan_id}")
    def get_plan(plan_id: str):
        return core.plan_response(plan_id)

    @app.patch("/plans/{plan_id}/events")
    def patch_events(plan_id: str, body: EditsRequest):
        return core.edit_events(plan_id, body.edits)

    @app.get("/plans/{plan_id}/ical")
    def get_ical(plan_id: str):
        return Response(core.ical(plan_id), media_type="text/calendar; charset=utf-8")

    @app.get("/plans/{plan_id}/state")
    def get_state(plan_id: str):
        return core.state_doc(plan_id)

    @app.post("/tutor/ask")
    def post_ask(body: AskRequest):
        return core.ask(body.plan_id, body.query)

    @app.post("/progress")
    def post_progress(body: ProgressRequest):
        return core.progress(body.plan_id, body.session_id, body.current_lesson_id)

    @app.post("/transcripts/ingest")
    def post_ingest(body: IngestRequest):
        if body.course_id:
            return core.ingest_course(body.course_id)
        if not body.lesson_id:
            raise MalformedEvent("ingest needs lesson_id or course_id")
        return core.ingest(
            body.lesson_id, content=body.content, video_id=body.video_id, fmt=body.format
        )

    @app.get("/healthz", response_class=PlainTextResponse)
    def healthz():
        return "ok"

    return app
