"""Plan <-> calendar-event conversion and iCalendar (RFC 5545) export.

Event ids are content-addressed from (plan revision, session index) so
conversions are reproducible and golden-file friendly. Breaks appear in the
event list (the UI renders them dimmed, non-editable) but are never exported
to iCal.
"""

from __future__ import annotations

import datetime
import hashlib
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Sequence

from .model import (
    MINUTES_PER_DAY,
    PersonalizationProfile,
    Plan,
    ScheduledSession,
    SessionKind,
    Syllabus,
    ValidationError,
)


class UnknownLesson(ValidationError):
    code = "unknown_lesson"


class MalformedEvent(ValidationError):
    code = "malformed_event"


def event_id_for(revision: int, index: int) -> str:
    return hashlib.sha1(f"event:{revision}:{index}".encode()).hexdigest()[:12]


class EditOp(str, Enum):
    MOVE = "move"
    ADD = "add"
    DELETE = "delete"


@dataclass(frozen=True)
class CalendarEdit:
    op: EditOp
    event_id: str = ""
    new_start: datetime.datetime | None = None
    payload: dict | None = None

    def __post_init__(self):
        if self.op is EditOp.MOVE and self.new_start is None:
            raise MalformedEvent("move edit requires new_start")
        if self.op is EditOp.ADD and not self.payload:
            raise MalformedEvent("add edit requires a payload")
        if self.op in (EditOp.MOVE, EditOp.DELETE) and not self.event_id:
            raise MalformedEvent(f"{self.op.value} edit requires event_id")

    @classmethod
    def from_doc(cls, raw: Any) -> "CalendarEdit":
        if not isinstance(raw, dict) or "op" not in raw:
            raise MalformedEvent("edit must be an object with an 'op' field")
        try:
            op = EditOp(str(raw["op"]).lower())
        except ValueError:
            raise MalformedEvent(f"unknown edit op {raw['op']!r}") from None
        new_start = None
        if raw.get("new_start") is not None:
            try:
                new_start = datetime.datetime.fromisoformat(raw["new_start"])
            except (TypeError, ValueError):
                raise MalformedEvent(f"invalid new_start {raw['new_start']!r}") from None
        return cls(
            op=op,
            event_id=str(raw.get("event_id", "")),
            new_start=new_start,
            payload=raw.get("payload"),
        )


@dataclass(frozen=True)
class CalendarEvent:
    event_id: str
    session_id: str
    title: str
    start: datetime.datetime
    end: datetime.datetime
    kind: SessionKind
    lesson_id: str | None = None
    editable: bool = True

    def __post_init__(self):
        if self.start >= self.end:
            raise MalformedEvent(f"event {self.event_id!r} has start >= end")

    def to_doc(self) -> dict:
        return {
            "event_id": self.event_id,
            "session_id": self.session_id,
            "title": self.title,
            "start": self.start.isoformat(timespec="minutes"),
            "end": self.end.isoformat(timespec="minutes"),
            "kind": self.kind.value,
            "lesson_id": self.lesson_id,
            "editable": self.editable,
        }


def _at(date: datetime.date, minutes: int) -> datetime.datetime:
    # Minute 1440 is midnight of the following day.
    if minutes >= MINUTES_PER_DAY:
        return datetime.datetime.combine(
            date + datetime.timedelta(days=1), datetime.time(0, 0)
        )
    return datetime.datetime.combine(date, datetime.time(minutes // 60, minutes % 60))


def plan_to_events(plan: Plan, syllabus: Syllabus) -> list[CalendarEvent]:
    """One event per session; study titles carry the difficulty label."""
    lesson_map = syllabus.lesson_map()
    events = []
    for index, session in enumerate(plan.sessions):
        if session.kind is SessionKind.STUDY:
            lesson = lesson_map.get(session.lesson_id)
            if lesson is None:
                raise UnknownLesson(
                    f"plan session {session.id} references unknown lesson "
                    f"{session.lesson_id!r}",
                    element=session.lesson_id,
                )
            title = f"{lesson.title} ({lesson.difficulty.label})"
        else:
            title = "Break"
        events.append(
            CalendarEvent(
                event_id=event_id_for(plan.revision, index),
                session_id=session.id,
                title=title,
                start=_at(session.date, session.start_minutes),
                end=_at(session.date, session.end_minutes),
                kind=session.kind,
                lesson_id=session.lesson_id,
                editable=session.kind is SessionKind.STUDY,
            )
        )
    return events


@dataclass(frozen=True)
class PlanHeader:
    course_id: str
    profile: PersonalizationProfile
    revision: int = 1
    provenance: str = "deterministic"


def events_to_plan(events: Iterable[CalendarEvent], header: PlanHeader) -> Plan:
    """Rebuild a plan from a (possibly edited) event list.

    The inverse of :func:`plan_to_events` up to the (date, start, end, kind,
    lesson_id) multiset; segment ordinals are recounted chronologically.
    """
    ordered = sorted(events, key=lambda e: (e.start, e.end, e.kind.value))
    sessions = []
    per_lesson: dict[str, int] = {}
    for index, event in enumerate(ordered):
        if event.kind is SessionKind.STUDY and not event.lesson_id:
            raise MalformedEvent(
                f"study event {event.event_id!r} has no lesson_id", element=event.event_id
            )
        date = event.start.date()
        start = event.start.hour * 60 + event.start.minute
        end = event.end.hour * 60 + event.end.minute
        if event.end.date() != date:
            if event.end.date() == date + datetime.timedelta(days=1) and end == 0:
                end = MINUTES_PER_DAY
            else:
                raise MalformedEvent(
                    f"event {event.event_id!r} crosses midnight", element=event.event_id
                )
        ordinal = None
        lesson_id = None
        if event.kind is SessionKind.STUDY:
            lesson_id = event.lesson_id
            per_lesson[lesson_id] = per_lesson.get(lesson_id, 0) + 1
            ordinal = per_lesson[lesson_id]
        sessions.append(
            ScheduledSession(
                id=event.session_id or event_id_for(header.revision, index),
                date=date,
                start_minutes=start,
                end_minutes=end,
                kind=event.kind,
                lesson_id=lesson_id,
                segment_ordinal=ordinal,
            )
        )
    return Plan(
        course_id=header.course_id,
        profile=header.profile,
        sessions=tuple(sessions),
        revision=header.revision,
        provenance=header.provenance,
    )


# --------------------------------------------------------------------------
# iCalendar export


def _ical_escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace(";", "\\;")
        .replace(",", "\\,")
        .replace("\n", "\\n")
    )


def _ical_fold(line: str) -> list[str]:
    # RFC 5545 3.1: lines longer than 75 octets are folded with CRLF + space.
    encoded = line.encode("utf-8")
    if len(encoded) <= 75:
        return [line]
    out: list[str] = []
    while encoded:
        limit = 75 if not out else 74  # continuation lines lose one octet to the space
        head = encoded[:limit]
        # Do not split inside a multi-byte sequence.
        while len(head) < len(encoded) and (encoded[len(head)] & 0xC0) == 0x80:
            head = head[:-1]
        out.append(head.decode("utf-8") if not out else " " + head.decode("utf-8"))
        encoded = encoded[len(head):]
    return out


def _ical_datetime(dt: datetime.datetime) -> str:
    return dt.strftime("%Y%m%dT%H%M%S")


def export_ical(events: Sequence[CalendarEvent], calendar_name: str) -> str:
    """Render non-break events as an RFC 5545 VCALENDAR (floating local times)."""
    lines = [
        "BEGIN:VCALENDAR",
        "VERSION:2.0",
        "PRODID:-//studypilot//schedule//EN",
        "CALSCALE:GREGORIAN",
        f"X-WR-CALNAME:{_ical_escape(calendar_name)}",
    ]
    for event in events:
        if event.kind is SessionKind.BREAK:
            continue
        lines.extend(
            [
                "BEGIN:VEVENT",
                f"UID:{event.event_id}",
                f"DTSTAMP:{event.start.strftime('%Y%m%d')}T000000Z",
                f"DTSTART:{_ical_datetime(event.start)}",
                f"DTEND:{_ical_datetime(event.end)}",
                f"SUMMARY:{_ical_escape(event.title)}",
                "END:VEVENT",
            ]
        )
    lines.append("END:VCALENDAR")
    folded: list[str] = []
    for line in lines:
        folded.extend(_ical_fold(line))
    return "\r\n".join(folded) + "\r\n"
