"""Deterministic scheduling engine: slot slicing, difficulty-weighted pacing,
plan generation, plan checking, and edit application.

``build_plan`` is a pure function of (syllabus, profile, policy): it expands
each lesson into a difficulty- and pace-dependent number of study segments,
slices every available day into fixed-length study slots separated by
breaks, and fills the slots greedily in syllabus order. ``check_plan`` is
the independent validator the LLM pipeline runs against; it never raises,
it returns named violations.
"""

from __future__ import annotations

import datetime
import hashlib
from collections import Counter, deque
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .calendarize import CalendarEdit, EditOp, MalformedEvent, UnknownLesson, event_id_for
from .model import (
    AvailabilityWindow,
    Difficulty,
    Pace,
    PersonalizationProfile,
    Plan,
    ScheduledSession,
    SessionKind,
    Syllabus,
    format_clock,
    parse_clock,
)

DEFAULT_PACE_TABLE: dict[Pace, dict[Difficulty, int]] = {
    Pace.FRONT_LOADED: {Difficulty.EASY: 1, Difficulty.MEDIUM: 2, Difficulty.HARD: 2},
    Pace.STEADY: {Difficulty.EASY: 1, Difficulty.MEDIUM: 1, Difficulty.HARD: 2},
    Pace.BACK_LOADED: {Difficulty.EASY: 1, Difficulty.MEDIUM: 1, Difficulty.HARD: 1},
}


def session_id_for(revision: int, index: int) -> str:
    return hashlib.sha1(f"session:{revision}:{index}".encode()).hexdigest()[:12]


@dataclass(frozen=True)
class PacePolicy:
    """Maps (difficulty, pace) to a study-segment count, always >= 1."""

    table: Mapping[Pace, Mapping[Difficulty, int]]

    def __post_init__(self):
        for pace in Pace:
            for difficulty in Difficulty:
                count = self.table.get(pace, {}).get(difficulty)
                if not isinstance(count, int) or count < 1:
                    raise ValueError(
                        f"pace table must map ({difficulty.value}, {pace.value}) "
                        f"to a positive integer, got {count!r}"
                    )

    def segments_for(self, difficulty: Difficulty, pace: Pace) -> int:
        return self.table[pace][difficulty]

    @classmethod
    def default(cls) -> "PacePolicy":
        return cls(table=DEFAULT_PACE_TABLE)

    @classmethod
    def from_doc(cls, raw: Mapping) -> "PacePolicy":
        table = {
            Pace(p): {Difficulty(d): int(n) for d, n in row.items()}
            for p, row in raw.items()
        }
        return cls(table=table)


@dataclass(frozen=True)
class DaySlots:
    """One availability window sliced into study slots and interleaved breaks."""

    date: datetime.date | None
    study_slots: tuple[tuple[int, int], ...]
    break_slots: tuple[tuple[int, int], ...]


def slice_day(
    window: AvailabilityWindow,
    segment_minutes: int,
    break_minutes: int,
    date: datetime.date | None = None,
) -> DaySlots:
    """Partition a window into alternating study segments and breaks.

    Fits ``floor((window + break) / (segment + break))`` study slots starting
    at the window start, separated by exactly ``break_minutes``; the trailing
    break is omitted.
    """
    if window.window_minutes < segment_minutes:
        raise ValueError("window shorter than one segment")
    stride = segment_minutes + break_minutes
    n = (window.window_minutes + break_minutes) // stride
    studies = []
    breaks = []
    for i in range(n):
        start = window.start_minutes + i * stride
        studies.append((start, start + segment_minutes))
        if i + 1 < n and break_minutes > 0:
            breaks.append((start + segment_minutes, start + stride))
    return DaySlots(date=date, study_slots=tuple(studies), break_slots=tuple(breaks))


def lesson_segments(
    syllabus: Syllabus, profile: PersonalizationProfile, policy: PacePolicy | None = None
) -> list[tuple[str, int]]:
    """Expand lessons in syllabus order into (lesson_id, segment_ordinal) entries."""
    policy = policy or PacePolicy.default()
    out = []
    for lesson in syllabus.lessons():
        count = policy.segments_for(lesson.difficulty, profile.pace)
        out.extend((lesson.id, ordinal) for ordinal in range(1, count + 1))
    return out


def _windows_for(profile: PersonalizationProfile, date: datetime.date) -> list[AvailabilityWindow]:
    return sorted(
        (w for w in profile.availability if w.covers(date)),
        key=lambda w: w.start_minutes,
    )


def build_plan(
    syllabus: Syllabus,
    profile: PersonalizationProfile,
    policy: PacePolicy | None = None,
    *,
    provenance: str = "deterministic",
) -> Plan:
    """Generate the full schedule for a syllabus under a profile.

    Iterates dates from the profile start date, filling each available
    window's slots with the next lesson segments; lessons split freely
    across day boundaries. Stops when all segments are placed.
    """
    policy = policy or PacePolicy.default()
    queue = deque(lesson_segments(syllabus, profile, policy))
    raw_sessions: list[tuple] = []

    date = profile.start_date
    idle_days = 0
    while queue:
        placed_today = False
        for window in _windows_for(profile, date):
            if not queue:
                break
            slots = slice_day(window, profile.segment_minutes, profile.break_minutes, date=date)
            for i, (start, end) in enumerate(slots.study_slots):
                if not queue:
                    break
                if i > 0 and profile.break_minutes > 0:
                    b_start, b_end = slots.break_slots[i - 1]
                    raw_sessions.append((date, b_start, b_end, SessionKind.BREAK, None, None))
                lesson_id, ordinal = queue.popleft()
                raw_sessions.append((date, start, end, SessionKind.STUDY, lesson_id, ordinal))
                placed_today = True
        idle_days = 0 if placed_today else idle_days + 1
        if idle_days > 7:
            raise ValueError("profile availability never recurs; cannot place segments")
        date += datetime.timedelta(days=1)

    sessions = tuple(
        ScheduledSession(
            id=session_id_for(1, i),
            date=d,
            start_minutes=s,
            end_minutes=e,
            kind=kind,
            lesson_id=lesson_id,
            segment_ordinal=ordinal,
        )
        for i, (d, s, e, kind, lesson_id, ordinal) in enumerate(raw_sessions)
    )
    return Plan(
        course_id=syllabus.course_id,
        profile=profile,
        sessions=sessions,
        revision=1,
        provenance=provenance,
    )


def days_per_unit(plan: Plan, syllabus: Syllabus) -> list[int]:
    """Distinct calendar days holding at least one study session of each unit."""
    unit_of = {lesson.id: lesson.unit_index for lesson in syllabus.lessons()}
    dates: dict[int, set[datetime.date]] = {u.index: set() for u in syllabus.units}
    for session in plan.study_sessions():
        unit = unit_of.get(session.lesson_id)
        if unit is not None:
            dates[unit].add(session.date)
    return [len(dates[u.index]) for u in syllabus.units]


# --------------------------------------------------------------------------
# Plan checking


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    session_ids: tuple[str, ...] = ()

    def to_doc(self) -> dict:
        return {"code": self.code, "message": self.message, "session_ids": list(self.session_ids)}


#: Violation codes that user edits may override; everything else is a hard error.
WARNING_CODES = frozenset({"window_exceeded", "break_spacing"})


def check_plan(
    plan: Plan,
    syllabus: Syllabus,
    profile: PersonalizationProfile | None = None,
    policy: PacePolicy | None = None,
) -> list[Violation]:
    """Validate a plan-shaped value; returns named violations, never raises.

    Empty result means: all lessons covered with at least their pace-policy
    segment count, no overlapping study sessions, every session inside an
    availability window, study-to-study gaps of at least the break length,
    and chronological session order.
    """
    profile = profile or plan.profile
    policy = policy or PacePolicy.default()
    violations = []

    for a, b in zip(plan.sessions, plan.sessions[1:]):
        if b.sort_key < a.sort_key:
            violations.append(
                Violation(
                    code="out_of_order",
                    message=f"session {b.id} precedes {a.id} but is listed after it",
                    session_ids=(a.id, b.id),
                )
            )

    lesson_map = syllabus.lesson_map()
    studies = [s for s in plan.sessions if s.kind is SessionKind.STUDY]
    for session in studies:
        if session.lesson_id not in lesson_map:
            violations.append(
                Violation(
                    code="unknown_lesson",
                    message=f"session {session.id} references unknown lesson {session.lesson_id!r}",
                    session_ids=(session.id,),
                )
            )

    counts = Counter(s.lesson_id for s in studies)
    for lesson in syllabus.lessons():
        need = policy.segments_for(lesson.difficulty, profile.pace)
        have = counts.get(lesson.id, 0)
        if have < need:
            violations.append(
                Violation(
                    code="under_covered",
                    message=(
                        f"lesson {lesson.id!r} has {have} study segment(s), needs {need}"
                    ),
                )
            )

    by_date: dict[datetime.date, list[ScheduledSession]] = {}
    for session in studies:
        by_date.setdefault(session.date, []).append(session)
    for date, day_sessions in sorted(by_date.items()):
        ordered = sorted(day_sessions, key=lambda s: (s.start_minutes, s.end_minutes))
        for i, a in enumerate(ordered):
            for b in ordered[i + 1 :]:
                if b.start_minutes >= a.end_minutes:
                    break
                violations.append(
                    Violation(
                        code="overlap",
                        message=(
                            f"study sessions {a.id} and {b.id} overlap on {date.isoformat()}"
                        ),
                        session_ids=(a.id, b.id),
                    )
                )

    for session in plan.sessions:
        contained = any(
            w.covers(session.date)
            and w.start_minutes <= session.start_minutes
            and session.end_minutes <= w.end_minutes
            for w in profile.availability
        )
        if not contained:
            violations.append(
                Violation(
                    code="window_exceeded",
                    message=(
                        f"session {session.id} ({session.date.isoformat()} "
                        f"{format_clock(session.start_minutes)}-"
                        f"{format_clock(session.end_minutes)}) lies outside every "
                        f"availability window"
                    ),
                    session_ids=(session.id,),
                )
            )

    for date, day_sessions in sorted(by_date.items()):
        ordered = sorted(day_sessions, key=lambda s: (s.start_minutes, s.end_minutes))
        for a, b in zip(ordered, ordered[1:]):
            gap = b.start_minutes - a.end_minutes
            if 0 <= gap < profile.break_minutes:
                violations.append(
                    Violation(
                        code="break_spacing",
                        message=(
                            f"only {gap} min between sessions {a.id} and {b.id}, "
                            f"profile requires {profile.break_minutes}"
                        ),
                        session_ids=(a.id, b.id),
                    )
                )

    return violations


# --------------------------------------------------------------------------
# Plan revision


class PlanEditError(Exception):
    """Base for edit application failures."""

    code = "edit_error"

    def __init__(self, message: str, violations: Sequence[Violation] = ()):
        super().__init__(message)
        self.message = message
        self.violations = list(violations)


class UnknownSession(PlanEditError):
    code = "unknown_session"


class OverlapAfterEdit(PlanEditError):
    code = "overlap_after_edit"


class CoverageBrokenAfterDelete(PlanEditError):
    code = "coverage_broken_after_delete"


@dataclass(frozen=True)
class RevisionResult:
    plan: Plan
    warnings: tuple[Violation, ...]


def _resolve_refs(plan: Plan) -> dict[str, int]:
    refs: dict[str, int] = {}
    for i, session in enumerate(plan.sessions):
        refs[session.id] = i
        refs[event_id_for(plan.revision, i)] = i
    return refs


def revise_plan(
    plan: Plan,
    edits: Iterable[CalendarEdit],
    syllabus: Syllabus,
    policy: PacePolicy | None = None,
) -> RevisionResult:
    """Apply calendar edits and re-validate.

    Window containment and break spacing become warnings (user overrides are
    honored); overlapping study sessions and broken lesson coverage abort the
    revision. The returned plan carries ``revision + 1`` and keeps surviving
    session ids stable.
    """
    policy = policy or PacePolicy.default()
    refs = _resolve_refs(plan)
    working: dict[int, ScheduledSession] = dict(enumerate(plan.sessions))
    added: list[ScheduledSession] = []
    deletes = 0
    new_revision = plan.revision + 1
    lesson_map = syllabus.lesson_map()

    def resolve(ref: str) -> int:
        index = refs.get(ref)
        if index is None or index not in working:
            raise UnknownSession(f"no session matches reference {ref!r}")
        return index

    for edit in edits:
        if edit.op is EditOp.MOVE:
            index = resolve(edit.event_id)
            session = working[index]
            duration = session.end_minutes - session.start_minutes
            start = edit.new_start.hour * 60 + edit.new_start.minute
            working[index] = replace(
                session,
                date=edit.new_start.date(),
                start_minutes=start,
                end_minutes=start + duration,
            )
        elif edit.op is EditOp.DELETE:
            working.pop(resolve(edit.event_id))
            deletes += 1
        elif edit.op is EditOp.ADD:
            payload = edit.payload or {}
            lesson_id = payload.get("lesson_id")
            if lesson_id not in lesson_map:
                raise UnknownLesson(f"added event references unknown lesson {lesson_id!r}")
            try:
                date = datetime.date.fromisoformat(payload["date"])
                start = parse_clock(payload["start"])
                end = (
                    parse_clock(payload["end"])
                    if "end" in payload
                    else start + plan.profile.segment_minutes
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedEvent(f"bad add payload: {exc}") from None
            existing = [
                s.segment_ordinal
                for s in list(working.values()) + added
                if s.kind is SessionKind.STUDY and s.lesson_id == lesson_id
            ]
            ordinal = max((o for o in existing if o), default=0) + 1
            added.append(
                ScheduledSession(
                    id="",
                    date=date,
                    start_minutes=start,
                    end_minutes=end,
                    kind=SessionKind.STUDY,
                    lesson_id=lesson_id,
                    segment_ordinal=ordinal,
                )
            )
        else:  # pragma: no cover - enum is closed
            raise MalformedEvent(f"unsupported edit op {edit.op!r}")

    merged = sorted(
        list(working.values()) + added, key=lambda s: s.sort_key
    )
    sessions = tuple(
        replace(s, id=s.id or session_id_for(new_revision, i)) for i, s in enumerate(merged)
    )
    new_plan = Plan(
        course_id=plan.course_id,
        profile=plan.profile,
        sessions=sessions,
        revision=new_revision,
        provenance=plan.provenance,
    )

    violations = check_plan(new_plan, syllabus, plan.profile, policy)
    hard = [v for v in violations if v.code not in WARNING_CODES]
    overlaps = [v for v in hard if v.code == "overlap"]
    if overlaps:
        raise OverlapAfterEdit(overlaps[0].message, violations=hard)
    uncovered = [v for v in hard if v.code == "under_covered"]
    if uncovered and deletes:
        raise CoverageBrokenAfterDelete(uncovered[0].message, violations=hard)
    if hard:
        raise PlanEditError(hard[0].message, violations=hard)

    warnings = tuple(v for v in violations if v.code in WARNING_CODES)
    return RevisionResult(plan=new_plan, warnings=warnings)
