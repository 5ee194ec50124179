"""Core domain types, validation, and canonical JSON serialization.

Everything here is an immutable value object. Validation functions are
total: any parsed document either becomes a valid object or raises a
structured ``ValidationError`` subclass naming the offending element.
Clock times are minutes since midnight on a named calendar date; there is
no timezone arithmetic.
"""

from __future__ import annotations

import datetime
import json
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterator

WEEKDAY_NAMES = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")
MINUTES_PER_DAY = 24 * 60

DEFAULT_SEGMENT_MINUTES = 40
DEFAULT_BREAK_MINUTES = 10


class Difficulty(str, Enum):
    EASY = "easy"
    MEDIUM = "medium"
    HARD = "hard"

    @property
    def label(self) -> str:
        """Display form used in event titles, e.g. ``Easy``."""
        return self.value.capitalize()


class Pace(str, Enum):
    FRONT_LOADED = "front_loaded"
    STEADY = "steady"
    BACK_LOADED = "back_loaded"


class ResourceKind(str, Enum):
    VIDEO = "video"
    READING = "reading"
    EXERCISE = "exercise"


class SessionKind(str, Enum):
    STUDY = "study"
    BREAK = "break"


# --------------------------------------------------------------------------
# Structured validation errors


class ValidationError(ValueError):
    """Base class for document validation failures."""

    code = "invalid"

    def __init__(self, message: str, *, element: str | None = None):
        super().__init__(message)
        self.message = message
        self.element = element

    def to_doc(self) -> dict:
        doc: dict[str, Any] = {"code": self.code, "message": self.message}
        if self.element is not None:
            doc["element"] = self.element
        return doc


class ParseError(ValidationError):
    code = "parse_error"


class SchemaError(ValidationError):
    code = "schema_error"


class DuplicateLessonId(ValidationError):
    code = "duplicate_lesson_id"


class EmptyUnit(ValidationError):
    code = "empty_unit"


class NonContiguousIndex(ValidationError):
    code = "non_contiguous_index"


class WindowTooShort(ValidationError):
    code = "window_too_short"


class NoAvailability(ValidationError):
    code = "no_availability"


class InvalidWindow(ValidationError):
    code = "invalid_window"


class OverlappingWindows(ValidationError):
    code = "overlapping_windows"


# --------------------------------------------------------------------------
# Clock/date helpers

_CLOCK_RE = re.compile(r"^(\d{1,2}):(\d{2})$")


def parse_clock(text: str) -> int:
    """Parse ``HH:MM`` into minutes since midnight (``24:00`` allowed)."""
    m = _CLOCK_RE.match(text.strip())
    if not m:
        raise SchemaError(f"invalid clock time {text!r}, expected HH:MM")
    hours, minutes = int(m.group(1)), int(m.group(2))
    total = hours * 60 + minutes
    if minutes > 59 or total > MINUTES_PER_DAY:
        raise SchemaError(f"clock time {text!r} out of range")
    return total


def format_clock(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"


def parse_date(text: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(text)
    except (TypeError, ValueError):
        raise SchemaError(f"invalid date {text!r}, expected YYYY-MM-DD") from None


def canonical_json(doc: Any) -> str:
    """Serialize with stable key order and a trailing newline.

    Dicts built by ``to_doc`` methods carry a fixed insertion order, so the
    output is byte-stable and diffable.
    """
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _require(raw: Any, key: str, kind: type, *, element: str | None = None) -> Any:
    if not isinstance(raw, dict):
        raise SchemaError(f"expected an object, got {type(raw).__name__}", element=element)
    if key not in raw:
        raise SchemaError(f"missing required field {key!r}", element=element)
    value = raw[key]
    if kind is int and isinstance(value, bool):
        raise SchemaError(f"field {key!r} must be {kind.__name__}", element=element)
    if not isinstance(value, kind):
        raise SchemaError(f"field {key!r} must be {kind.__name__}", element=element)
    return value


def _parse_enum(enum_cls: type, value: Any, what: str, *, element: str | None = None):
    try:
        return enum_cls(str(value).strip().lower())
    except ValueError:
        allowed = ", ".join(e.value for e in enum_cls)
        raise SchemaError(
            f"unknown {what} {value!r}, expected one of: {allowed}", element=element
        ) from None


# --------------------------------------------------------------------------
# Syllabus


@dataclass(frozen=True)
class ResourceRef:
    kind: ResourceKind
    locator: str

    def to_doc(self) -> dict:
        return {"kind": self.kind.value, "locator": self.locator}


@dataclass(frozen=True)
class Lesson:
    id: str
    title: str
    difficulty: Difficulty
    unit_index: int
    order_in_unit: int
    resources: tuple[ResourceRef, ...] = ()

    def to_doc(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "difficulty": self.difficulty.value,
            "resources": [r.to_doc() for r in self.resources],
        }


@dataclass(frozen=True)
class Unit:
    index: int
    title: str
    lessons: tuple[Lesson, ...]

    def to_doc(self) -> dict:
        return {"title": self.title, "lessons": [l.to_doc() for l in self.lessons]}


@dataclass(frozen=True)
class Syllabus:
    course_id: str
    course_title: str
    units: tuple[Unit, ...]

    def lessons(self) -> Iterator[Lesson]:
        for unit in self.units:
            yield from unit.lessons

    def lesson(self, lesson_id: str) -> Lesson | None:
        return self.lesson_map().get(lesson_id)

    def lesson_map(self) -> dict[str, Lesson]:
        return {lesson.id: lesson for lesson in self.lessons()}

    def lesson_order(self) -> dict[str, int]:
        """Lesson id -> position in overall syllabus order."""
        return {lesson.id: i for i, lesson in enumerate(self.lessons())}

    def to_doc(self) -> dict:
        return {
            "course_id": self.course_id,
            "course_title": self.course_title,
            "units": [u.to_doc() for u in self.units],
        }


def validate_syllabus(raw: Any) -> Syllabus:
    """Build a :class:`Syllabus` from a parsed syllabus document.

    Raises ``EmptyUnit``, ``DuplicateLessonId``, ``NonContiguousIndex`` or
    ``SchemaError`` naming the offending element.
    """
    course_id = _require(raw, "course_id", str)
    course_title = _require(raw, "course_title", str)
    raw_units = _require(raw, "units", list)
    if not course_id:
        raise SchemaError("course_id must be non-empty")
    if not raw_units:
        raise EmptyUnit("syllabus has no units", element=course_id)

    seen_ids: set[str] = set()
    units = []
    for u_idx, raw_unit in enumerate(raw_units):
        unit_title = _require(raw_unit, "title", str, element=f"unit {u_idx}")
        if "index" in raw_unit and raw_unit["index"] != u_idx:
            raise NonContiguousIndex(
                f"unit {unit_title!r} declares index {raw_unit['index']}, "
                f"expected {u_idx}",
                element=unit_title,
            )
        raw_lessons = _require(raw_unit, "lessons", list, element=unit_title)
        if not raw_lessons:
            raise EmptyUnit(f"unit {unit_title!r} has no lessons", element=unit_title)
        lessons = []
        for l_idx, raw_lesson in enumerate(raw_lessons):
            lesson_id = _require(raw_lesson, "id", str, element=f"{unit_title} lesson {l_idx}")
            if not lesson_id:
                raise SchemaError("lesson id must be non-empty", element=unit_title)
            if lesson_id in seen_ids:
                raise DuplicateLessonId(
                    f"lesson id {lesson_id!r} appears more than once", element=lesson_id
                )
            seen_ids.add(lesson_id)
            title = _require(raw_lesson, "title", str, element=lesson_id)
            difficulty = _parse_enum(
                Difficulty, _require(raw_lesson, "difficulty", str, element=lesson_id),
                "difficulty", element=lesson_id,
            )
            for key in ("unit_index", "order_in_unit"):
                expected = u_idx if key == "unit_index" else l_idx
                if key in raw_lesson and raw_lesson[key] != expected:
                    raise NonContiguousIndex(
                        f"lesson {lesson_id!r} declares {key}={raw_lesson[key]}, "
                        f"expected {expected}",
                        element=lesson_id,
                    )
            resources = []
            for raw_res in raw_lesson.get("resources", []):
                kind = _parse_enum(
                    ResourceKind, _require(raw_res, "kind", str, element=lesson_id),
                    "resource kind", element=lesson_id,
                )
                locator = _require(raw_res, "locator", str, element=lesson_id)
                resources.append(ResourceRef(kind=kind, locator=locator))
            lessons.append(
                Lesson(
                    id=lesson_id,
                    title=title,
                    difficulty=difficulty,
                    unit_index=u_idx,
                    order_in_unit=l_idx,
                    resources=tuple(resources),
                )
            )
        units.append(Unit(index=u_idx, title=unit_title, lessons=tuple(lessons)))
    return Syllabus(course_id=course_id, course_title=course_title, units=tuple(units))


def load_syllabus(text: str | bytes) -> Syllabus:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return validate_syllabus(raw)


# --------------------------------------------------------------------------
# Profile


@dataclass(frozen=True)
class AvailabilityWindow:
    weekdays: tuple[int, ...]  # 0=Monday .. 6=Sunday, sorted
    start_minutes: int
    window_minutes: int

    @property
    def end_minutes(self) -> int:
        return self.start_minutes + self.window_minutes

    def covers(self, date: datetime.date) -> bool:
        return date.weekday() in self.weekdays

    def to_doc(self) -> dict:
        return {
            "weekdays": [WEEKDAY_NAMES[d] for d in self.weekdays],
            "start": format_clock(self.start_minutes),
            "minutes": self.window_minutes,
        }


@dataclass(frozen=True)
class PersonalizationProfile:
    goals_text: str
    availability: tuple[AvailabilityWindow, ...]
    segment_minutes: int
    break_minutes: int
    pace: Pace
    path_preferences: tuple[ResourceKind, ...]
    start_date: datetime.date

    def to_doc(self) -> dict:
        return {
            "goals_text": self.goals_text,
            "availability": [w.to_doc() for w in self.availability],
            "segment_minutes": self.segment_minutes,
            "break_minutes": self.break_minutes,
            "pace": self.pace.value,
            "path_preferences": [k.value for k in self.path_preferences],
            "start_date": self.start_date.isoformat(),
        }


def _parse_weekdays(raw: Any, element: str) -> tuple[int, ...]:
    if not isinstance(raw, list) or not raw:
        raise SchemaError("weekdays must be a non-empty list", element=element)
    days = set()
    for name in raw:
        key = str(name).strip().lower()[:3]
        if key not in WEEKDAY_NAMES:
            raise SchemaError(f"unknown weekday {name!r}", element=element)
        days.add(WEEKDAY_NAMES.index(key))
    return tuple(sorted(days))


def validate_profile(raw: Any) -> PersonalizationProfile:
    """Build a :class:`PersonalizationProfile` from a parsed profile document.

    ``segment_minutes`` defaults to 40 and ``break_minutes`` to 10 when
    absent. Windows must fit at least one segment, must not cross midnight,
    and must not overlap on a shared weekday.
    """
    if not isinstance(raw, dict):
        raise SchemaError(f"expected an object, got {type(raw).__name__}")
    raw_avail = raw.get("availability")
    if not isinstance(raw_avail, list) or not raw_avail:
        raise NoAvailability("profile declares no availability windows")

    segment_minutes = raw.get("segment_minutes", DEFAULT_SEGMENT_MINUTES)
    break_minutes = raw.get("break_minutes", DEFAULT_BREAK_MINUTES)
    if not isinstance(segment_minutes, int) or isinstance(segment_minutes, bool):
        raise SchemaError("segment_minutes must be an integer")
    if not isinstance(break_minutes, int) or isinstance(break_minutes, bool):
        raise SchemaError("break_minutes must be an integer")
    if segment_minutes < 10:
        raise SchemaError(f"segment_minutes must be >= 10, got {segment_minutes}")
    if break_minutes < 0:
        raise SchemaError(f"break_minutes must be >= 0, got {break_minutes}")

    windows = []
    for i, raw_win in enumerate(raw_avail):
        element = f"availability[{i}]"
        weekdays = _parse_weekdays(
            _require(raw_win, "weekdays", list, element=element), element
        )
        start = parse_clock(_require(raw_win, "start", str, element=element))
        minutes = _require(raw_win, "minutes", int, element=element)
        if minutes <= 0:
            raise InvalidWindow(f"window minutes must be positive, got {minutes}", element=element)
        if minutes < segment_minutes:
            raise WindowTooShort(
                f"window of {minutes} min cannot fit a {segment_minutes} min segment",
                element=element,
            )
        if start + minutes > MINUTES_PER_DAY:
            raise InvalidWindow(
                f"window starting {format_clock(start)} for {minutes} min crosses midnight",
                element=element,
            )
        windows.append(
            AvailabilityWindow(weekdays=weekdays, start_minutes=start, window_minutes=minutes)
        )

    for i, a in enumerate(windows):
        for b in windows[i + 1 :]:
            if set(a.weekdays) & set(b.weekdays):
                if a.start_minutes < b.end_minutes and b.start_minutes < a.end_minutes:
                    raise OverlappingWindows(
                        f"windows {a.to_doc()} and {b.to_doc()} overlap on a shared weekday"
                    )

    pace = _parse_enum(Pace, raw.get("pace", ""), "pace") if "pace" in raw else None
    if pace is None:
        raise SchemaError("missing required field 'pace'")

    raw_path = raw.get("path_preferences")
    if raw_path is None:
        path = (ResourceKind.VIDEO, ResourceKind.READING, ResourceKind.EXERCISE)
    else:
        if not isinstance(raw_path, list) or not raw_path:
            raise SchemaError("path_preferences must be a non-empty list")
        path = tuple(_parse_enum(ResourceKind, k, "resource kind") for k in raw_path)

    start_date = parse_date(_require(raw, "start_date", str))
    goals_text = raw.get("goals_text", "")
    if not isinstance(goals_text, str):
        raise SchemaError("goals_text must be a string")

    return PersonalizationProfile(
        goals_text=goals_text,
        availability=tuple(windows),
        segment_minutes=segment_minutes,
        break_minutes=break_minutes,
        pace=pace,
        path_preferences=path,
        start_date=start_date,
    )


def load_profile(text: str | bytes) -> PersonalizationProfile:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return validate_profile(raw)


# --------------------------------------------------------------------------
# Plan


@dataclass(frozen=True)
class ScheduledSession:
    id: str
    date: datetime.date
    start_minutes: int
    end_minutes: int
    kind: SessionKind
    lesson_id: str | None = None
    segment_ordinal: int | None = None

    def __post_init__(self):
        if self.start_minutes >= self.end_minutes:
            raise SchemaError(
                f"session {self.id!r} has start {format_clock(self.start_minutes)} "
                f">= end {format_clock(self.end_minutes)}",
                element=self.id,
            )
        if self.kind is SessionKind.STUDY and not self.lesson_id:
            raise SchemaError(f"study session {self.id!r} has no lesson_id", element=self.id)
        if self.kind is SessionKind.BREAK and self.lesson_id is not None:
            raise SchemaError(f"break session {self.id!r} carries a lesson_id", element=self.id)

    @property
    def sort_key(self) -> tuple:
        return (self.date, self.start_minutes, self.end_minutes, self.kind.value)

    def to_doc(self) -> dict:
        doc: dict[str, Any] = {
            "id": self.id,
            "date": self.date.isoformat(),
            "start": format_clock(self.start_minutes),
            "end": format_clock(self.end_minutes),
            "kind": self.kind.value,
        }
        if self.kind is SessionKind.STUDY:
            doc["lesson_id"] = self.lesson_id
            doc["segment_ordinal"] = self.segment_ordinal
        return doc


@dataclass(frozen=True)
class Plan:
    course_id: str
    profile: PersonalizationProfile
    sessions: tuple[ScheduledSession, ...]
    revision: int = 1
    provenance: str = "deterministic"

    def study_sessions(self) -> Iterator[ScheduledSession]:
        return (s for s in self.sessions if s.kind is SessionKind.STUDY)

    def session(self, session_id: str) -> ScheduledSession | None:
        for s in self.sessions:
            if s.id == session_id:
                return s
        return None

    def to_doc(self) -> dict:
        return {
            "course_id": self.course_id,
            "revision": self.revision,
            "provenance": self.provenance,
            "profile": self.profile.to_doc(),
            "sessions": [s.to_doc() for s in self.sessions],
        }


def session_from_doc(raw: Any, *, element: str = "session") -> ScheduledSession:
    kind = _parse_enum(SessionKind, _require(raw, "kind", str, element=element), "session kind")
    lesson_id = raw.get("lesson_id")
    ordinal = raw.get("segment_ordinal")
    if ordinal is not None and (not isinstance(ordinal, int) or ordinal < 1):
        raise SchemaError(f"segment_ordinal must be a positive integer", element=element)
    return ScheduledSession(
        id=str(raw.get("id", "")),
        date=parse_date(_require(raw, "date", str, element=element)),
        start_minutes=parse_clock(_require(raw, "start", str, element=element)),
        end_minutes=parse_clock(_require(raw, "end", str, element=element)),
        kind=kind,
        lesson_id=str(lesson_id) if lesson_id is not None else None,
        segment_ordinal=ordinal,
    )


def validate_plan(raw: Any) -> Plan:
    course_id = _require(raw, "course_id", str)
    revision = _require(raw, "revision", int)
    if revision < 1:
        raise SchemaError(f"revision must be >= 1, got {revision}")
    profile = validate_profile(_require(raw, "profile", dict))
    sessions = [
        session_from_doc(s, element=f"sessions[{i}]")
        for i, s in enumerate(_require(raw, "sessions", list))
    ]
    for earlier, later in zip(sessions, sessions[1:]):
        if later.sort_key < earlier.sort_key:
            raise SchemaError(
                f"sessions out of chronological order at {later.id!r}", element=later.id
            )
    provenance = raw.get("provenance", "deterministic")
    return Plan(
        course_id=course_id,
        profile=profile,
        sessions=tuple(sessions),
        revision=revision,
        provenance=str(provenance),
    )


def load_plan(text: str | bytes) -> Plan:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return validate_plan(raw)


# --------------------------------------------------------------------------
# Learner state


@dataclass(frozen=True)
class QuestionRecord:
    timestamp: datetime.datetime
    query: str
    answer_id: str

    def to_doc(self) -> dict:
        return {
            "timestamp": self.timestamp.isoformat(),
            "query": self.query,
            "answer_id": self.answer_id,
        }


@dataclass(frozen=True)
class LearnerState:
    course_id: str
    completed_session_ids: frozenset[str] = frozenset()
    current_lesson_id: str | None = None
    question_log: tuple[QuestionRecord, ...] = ()

    def with_completed(self, session_id: str) -> LearnerState:
        return LearnerState(
            course_id=self.course_id,
            completed_session_ids=self.completed_session_ids | {session_id},
            current_lesson_id=self.current_lesson_id,
            question_log=self.question_log,
        )

    def with_current_lesson(self, lesson_id: str | None) -> LearnerState:
        return LearnerState(
            course_id=self.course_id,
            completed_session_ids=self.completed_session_ids,
            current_lesson_id=lesson_id,
            question_log=self.question_log,
        )

    def with_question(self, record: QuestionRecord) -> LearnerState:
        return LearnerState(
            course_id=self.course_id,
            completed_session_ids=self.completed_session_ids,
            current_lesson_id=self.current_lesson_id,
            question_log=self.question_log + (record,),
        )

    def to_doc(self) -> dict:
        return {
            "course_id": self.course_id,
            "completed_session_ids": sorted(self.completed_session_ids),
            "current_lesson_id": self.current_lesson_id,
            "question_log": [q.to_doc() for q in self.question_log],
        }


def validate_learner_state(raw: Any) -> LearnerState:
    course_id = _require(raw, "course_id", str)
    completed = raw.get("completed_session_ids", [])
    if not isinstance(completed, list):
        raise SchemaError("completed_session_ids must be a list")
    current = raw.get("current_lesson_id")
    log = []
    for entry in raw.get("question_log", []):
        log.append(
            QuestionRecord(
                timestamp=datetime.datetime.fromisoformat(_require(entry, "timestamp", str)),
                query=_require(entry, "query", str),
                answer_id=_require(entry, "answer_id", str),
            )
        )
    return LearnerState(
        course_id=course_id,
        completed_session_ids=frozenset(str(s) for s in completed),
        current_lesson_id=str(current) if current is not None else None,
        question_log=tuple(log),
    )
