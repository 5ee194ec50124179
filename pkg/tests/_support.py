"""Independent oracles and random-input generators shared by the suite.

Everything here re-derives expected behaviour from first principles —
dict-level plan walking, minute-by-minute occupancy arrays, a from-scratch
RFC 5545 parser, a textbook BM25 — instead of calling back into the package,
so an implementation bug cannot vindicate itself through its own tests.
"""

from __future__ import annotations

import datetime
import math
import random
import string

WEEKDAYS = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")

PACE_TABLE = {
    "front_loaded": {"easy": 1, "medium": 2, "hard": 2},
    "steady": {"easy": 1, "medium": 1, "hard": 2},
    "back_loaded": {"easy": 1, "medium": 1, "hard": 1},
}


def _clock_minutes(text: str) -> int:
    hh, mm = text.split(":")
    return int(hh) * 60 + int(mm)


def brute_force_check(plan_doc: dict, syllabus_doc: dict) -> list[str]:
    """Exhaustively validate a plan document against its own profile.

    Checks coverage counts, per-minute study overlap, window containment,
    break spacing, chronological order, and segment-ordinal sequences.
    Returns human-readable problem strings; empty means the plan is sound.
    """
    problems: list[str] = []
    profile = plan_doc["profile"]
    pace = profile["pace"]
    sessions = plan_doc["sessions"]

    lessons = {}
    for unit in syllabus_doc["units"]:
        for lesson in unit["lessons"]:
            lessons[lesson["id"]] = lesson["difficulty"]

    # Coverage: exactly the difficulty-and-pace mandated segment count.
    counts: dict[str, int] = {}
    for s in sessions:
        if s["kind"] == "study":
            counts[s["lesson_id"]] = counts.get(s["lesson_id"], 0) + 1
    for lesson_id, difficulty in lessons.items():
        want = PACE_TABLE[pace][difficulty]
        got = counts.get(lesson_id, 0)
        if got != want:
            problems.append(f"coverage: {lesson_id} has {got} segments, wants {want}")
    for lesson_id in counts:
        if lesson_id not in lessons:
            problems.append(f"coverage: unknown lesson {lesson_id} scheduled")

    # Ordinals: 1..n in chronological order per lesson.
    seen: dict[str, list[int]] = {}
    for s in sessions:
        if s["kind"] == "study":
            seen.setdefault(s["lesson_id"], []).append(s["segment_ordinal"])
    for lesson_id, ordinals in seen.items():
        if ordinals != list(range(1, len(ordinals) + 1)):
            problems.append(f"ordinals: {lesson_id} has sequence {ordinals}")

    # Study overlap via per-minute occupancy.
    by_date: dict[str, list[dict]] = {}
    for s in sessions:
        by_date.setdefault(s["date"], []).append(s)
    for date, day in by_date.items():
        occupied = [False] * (24 * 60)
        for s in day:
            if s["kind"] != "study":
                continue
            for minute in range(_clock_minutes(s["start"]), _clock_minutes(s["end"])):
                if occupied[minute]:
                    problems.append(f"overlap: {date} minute {minute}")
                    break
                occupied[minute] = True

    # Containment: every session inside one availability window of its weekday.
    windows = profile["availability"]
    for s in sessions:
        weekday = WEEKDAYS[datetime.date.fromisoformat(s["date"]).weekday()]
        start = _clock_minutes(s["start"])
        end = _clock_minutes(s["end"])
        ok = any(
            weekday in [w[:3].lower() for w in win["weekdays"]]
            and _clock_minutes(win["start"]) <= start
            and end <= _clock_minutes(win["start"]) + win["minutes"]
            for win in windows
        )
        if not ok:
            problems.append(f"containment: {s['id']} at {s['date']} {s['start']}")

    # Break spacing between consecutive study sessions on one day.
    for date, day in by_date.items():
        studies = sorted(
            (s for s in day if s["kind"] == "study"),
            key=lambda s: _clock_minutes(s["start"]),
        )
        for a, b in zip(studies, studies[1:]):
            gap = _clock_minutes(b["start"]) - _clock_minutes(a["end"])
            if gap < profile["break_minutes"]:
                problems.append(f"spacing: {gap} min gap on {date}")

    # Chronological listing order.
    keys = [(s["date"], _clock_minutes(s["start"])) for s in sessions]
    if keys != sorted(keys):
        problems.append("order: sessions not chronological")

    return problems


# ---------------------------------------------------------------------------
# RFC 5545 parsing (used to re-read our own iCal output)


def parse_ical(text: str) -> dict:
    """Parse a VCALENDAR stream into {properties, events}.

    Implements unfolding (CRLF + single space/tab), property parameters
    (NAME;PARAM=V:value) and text unescaping — enough of RFC 5545 to verify
    round-trips without trusting the exporter's own helpers.
    """
    assert text.endswith("\r\n"), "stream must end with CRLF"
    raw_lines = text.split("\r\n")
    unfolded: list[str] = []
    for line in raw_lines:
        if line == "":
            continue
        if line[0] in (" ", "\t"):
            assert unfolded, "continuation line before any content line"
            unfolded[-1] += line[1:]
        else:
            unfolded.append(line)

    def unescape(value: str) -> str:
        out = []
        i = 0
        while i < len(value):
            if value[i] == "\\" and i + 1 < len(value):
                nxt = value[i + 1]
                out.append({"n": "\n", "N": "\n"}.get(nxt, nxt))
                i += 2
            else:
                out.append(value[i])
                i += 1
        return "".join(out)

    assert unfolded[0] == "BEGIN:VCALENDAR" and unfolded[-1] == "END:VCALENDAR"
    calendar: dict = {"properties": {}, "events": []}
    event: dict | None = None
    for line in unfolded[1:-1]:
        name, _, value = line.partition(":")
        name = name.split(";", 1)[0].upper()
        if name == "BEGIN" and value == "VEVENT":
            assert event is None, "nested VEVENT"
            event = {}
        elif name == "END" and value == "VEVENT":
            assert event is not None
            calendar["events"].append(event)
            event = None
        elif event is not None:
            event[name] = unescape(value)
        else:
            calendar["properties"][name] = unescape(value)
    assert event is None, "unterminated VEVENT"
    return calendar


def ical_datetime(stamp: str) -> datetime.datetime:
    return datetime.datetime.strptime(stamp, "%Y%m%dT%H%M%S")


# ---------------------------------------------------------------------------
# Reference BM25 (textbook form, no inverted index)


def reference_bm25(
    docs: dict[str, list[str]], query: list[str], k1: float = 1.2, b: float = 0.75
) -> dict[str, float]:
    """Score every document against the query by direct formula evaluation."""
    n = len(docs)
    avg_len = sum(len(tokens) for tokens in docs.values()) / max(n, 1)
    avg_len = max(avg_len, 1e-9)
    df: dict[str, int] = {}
    for tokens in docs.values():
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    scores: dict[str, float] = {}
    for doc_id, tokens in docs.items():
        score = 0.0
        for term in query:
            tf = tokens.count(term)
            if tf == 0 or term not in df:
                continue
            idf = math.log(1 + (n - df[term] + 0.5) / (df[term] + 0.5))
            denom = tf + k1 * (1 - b + b * len(tokens) / avg_len)
            score += idf * tf * (k1 + 1) / denom
        scores[doc_id] = score
    return scores


# ---------------------------------------------------------------------------
# Random input generators for the property suites


def random_syllabus(rng: random.Random) -> dict:
    units = []
    lesson_counter = 0
    for u in range(rng.randint(1, 8)):
        lessons = []
        for _ in range(rng.randint(1, 10)):
            lesson_counter += 1
            lessons.append(
                {
                    "id": f"lesson-{lesson_counter:03d}",
                    "title": f"Lesson {lesson_counter}",
                    "difficulty": rng.choice(["easy", "medium", "hard"]),
                    "resources": [],
                }
            )
        units.append({"title": f"Unit {u + 1}", "lessons": lessons})
    suffix = "".join(rng.choices(string.ascii_lowercase, k=6))
    return {
        "course_id": f"course-{suffix}",
        "course_title": f"Course {suffix}",
        "units": units,
    }


def random_profile(rng: random.Random) -> dict:
    segment = rng.randint(10, 60)
    break_minutes = rng.randint(0, 20)
    stride = segment + break_minutes

    first_start = rng.randint(6 * 60, 14 * 60)
    first_len = rng.randint(segment, 4 * stride)
    weekdays = sorted(rng.sample(range(7), rng.randint(1, 7)))
    windows = [
        {
            "weekdays": [WEEKDAYS[d] for d in weekdays],
            "start": f"{first_start // 60:02d}:{first_start % 60:02d}",
            "minutes": first_len,
        }
    ]
    if rng.random() < 0.3:
        # Second window, same days, far enough after the first for spacing.
        second_start = first_start + first_len + max(break_minutes, 1) + rng.randint(0, 60)
        second_len = rng.randint(segment, 2 * stride)
        if second_start + second_len <= 24 * 60:
            windows.append(
                {
                    "weekdays": [WEEKDAYS[d] for d in weekdays],
                    "start": f"{second_start // 60:02d}:{second_start % 60:02d}",
                    "minutes": second_len,
                }
            )
    start = datetime.date(2025, 1, 1) + datetime.timedelta(days=rng.randint(0, 180))
    return {
        "goals_text": "generated coverage scenario",
        "availability": windows,
        "segment_minutes": segment,
        "break_minutes": break_minutes,
        "pace": rng.choice(["front_loaded", "steady", "back_loaded"]),
        "path_preferences": rng.sample(["video", "reading", "exercise"], 3),
        "start_date": start.isoformat(),
    }
