"""Provider-agnostic LLM access with validated JSON output and fallbacks.

Every LLM operation renders a versioned prompt template that embeds the
output contract (a JSON Schema shipped with the package), validates the
reply, and re-prompts with the validator's error message on failure. When
``max_repair_attempts`` re-prompts are exhausted the operation silently
falls back to the deterministic planner path and marks the result's
provenance accordingly.
"""

from __future__ import annotations

import dataclasses
import functools
import hashlib
import json
import logging
import os
import re
import string
import threading
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Generic, Protocol, TypeVar

import httpx
import jsonschema

from .model import (
    DEFAULT_BREAK_MINUTES,
    DEFAULT_SEGMENT_MINUTES,
    Pace,
    PersonalizationProfile,
    Plan,
    ResourceKind,
    ScheduledSession,
    SessionKind,
    Syllabus,
    ValidationError,
    canonical_json,
    format_clock,
    parse_clock,
    parse_date,
    validate_profile,
)
from .planner import PacePolicy, build_plan, check_plan, days_per_unit, session_id_for

logger = logging.getLogger("studypilot.gateway")

T = TypeVar("T")

PROVENANCE_DETERMINISTIC = "deterministic"
PROVENANCE_LLM = "llm"
PROVENANCE_FALLBACK = "fallback"

DEFAULT_TOKEN_ENV = "STUDYPILOT_LLM_TOKEN"


class Unextractable(ValidationError):
    code = "unextractable"


class ProviderUnreachable(RuntimeError):
    """The network LLM provider could not be reached or answered non-2xx."""

    code = "provider_unreachable"


# --------------------------------------------------------------------------
# Output contracts and prompt templates


@functools.lru_cache(maxsize=None)
def schema_text(name: str) -> str:
    """Raw text of a bundled JSON Schema, e.g. ``schema_text("plan")``."""
    return (
        resources.files("studypilot").joinpath(f"schemas/{name}.schema.json").read_text("utf-8")
    )


@functools.lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(schema_text(name))


@functools.lru_cache(maxsize=None)
def _validator(name: str) -> jsonschema.Draft202012Validator:
    # Register every bundled schema so cross-file $refs resolve offline.
    from referencing import Registry, Resource

    schema_dir = resources.files("studypilot").joinpath("schemas")
    registry = Registry()
    for entry in sorted(schema_dir.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".schema.json"):
            doc = json.loads(entry.read_text("utf-8"))
            registry = registry.with_resource(doc["$id"], Resource.from_contents(doc))
    schema = load_schema(name)
    return jsonschema.Draft202012Validator(schema, registry=registry)


def schema_errors(name: str, doc: Any) -> list[str]:
    """Human-readable schema violations for ``doc``, empty when valid."""
    errors = sorted(
        _validator(name).iter_errors(doc), key=lambda e: [str(p) for p in e.absolute_path]
    )
    return [
        f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errors
    ]


@functools.lru_cache(maxsize=None)
def load_template(template_id: str) -> string.Template:
    text = (
        resources.files("studypilot").joinpath(f"prompts/{template_id}.txt").read_text("utf-8")
    )
    return string.Template(text)


def render_prompt(template_id: str, **values: str) -> str:
    return load_template(template_id).substitute(values)


# --------------------------------------------------------------------------
# Clients


@dataclass(frozen=True)
class DecodingParams:
    temperature: float = 0.0
    max_tokens: int = 2048
    seed: int | None = 0

    def to_doc(self) -> dict:
        return {
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "seed": self.seed,
        }


class LlmClient(Protocol):
    def complete(self, prompt: str, params: DecodingParams) -> str:
        """Return the model's text completion for ``prompt``."""
        ...


class MockLlmClient:
    """Scripted client: returns queued responses in order.

    With ``repeat_last`` the final response repeats forever; otherwise an
    exhausted script is a test bug and raises ``AssertionError``. Given the
    same script the client is byte-deterministic.
    """

    def __init__(self, script: Sequence[str], repeat_last: bool = False):
        self._script = list(script)
        self._repeat_last = repeat_last
        self._cursor = 0
        self._lock = threading.Lock()
        self.calls: list[tuple[str, DecodingParams]] = []

    def complete(self, prompt: str, params: DecodingParams) -> str:
        with self._lock:
            self.calls.append((prompt, params))
            if self._cursor >= len(self._script):
                if self._repeat_last and self._script:
                    return self._script[-1]
                raise AssertionError("mock LLM script exhausted")
            response = self._script[self._cursor]
            self._cursor += 1
            return response


def _prompt_key(prompt: str) -> str:
    return hashlib.sha1(prompt.encode("utf-8")).hexdigest()


class ReplayLlmClient:
    """Replays recorded completions; records through ``inner`` when given.

    The cassette is a JSON file of ``{prompt_key, response}`` records in
    call order; repeated identical prompts replay in recording order. A
    replay miss without an inner client raises ``ProviderUnreachable``.
    """

    def __init__(self, path: Path | str, inner: LlmClient | None = None):
        self.path = Path(path)
        self.inner = inner
        self._lock = threading.Lock()
        self._records: list[dict] = []
        self._queues: dict[str, list[str]] = {}
        if self.path.is_file():
            self._records = json.loads(self.path.read_text("utf-8"))["records"]
            for record in self._records:
                self._queues.setdefault(record["prompt_key"], []).append(record["response"])

    def _persist(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.path.write_text(canonical_json({"records": self._records}), "utf-8")

    def complete(self, prompt: str, params: DecodingParams) -> str:
        key = _prompt_key(prompt)
        with self._lock:
            queue = self._queues.get(key)
            if queue:
                return queue.pop(0)
            if self.inner is None:
                raise ProviderUnreachable(f"no recorded response for prompt {key[:12]}")
            response = self.inner.complete(prompt, params)
            self._records.append({"prompt_key": key, "response": response})
            self._persist()
            return response


class HttpLlmClient:
    """POSTs ``{model, prompt, ...decoding}`` to a completion endpoint.

    Expects a JSON reply with a top-level ``text`` field. The bearer token
    is read from ``token_env`` at call time and never logged.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        token_env: str = DEFAULT_TOKEN_ENV,
        timeout: float = 60.0,
    ):
        self.endpoint = endpoint
        self.model = model
        self.token_env = token_env
        self.timeout = timeout

    def complete(self, prompt: str, params: DecodingParams) -> str:
        headers = {}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        body = {"model": self.model, "prompt": prompt, **params.to_doc()}
        logger.debug(
            "llm request endpoint=%s model=%s prompt_sha=%s auth=%s",
            self.endpoint,
            self.model,
            _prompt_key(prompt)[:12],
            "<redacted>" if token else "<none>",
        )
        try:
            response = httpx.post(self.endpoint, json=body, headers=headers, timeout=self.timeout)
            response.raise_for_status()
            text = response.json()["text"]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise ProviderUnreachable(f"provider call failed: {exc}") from None
        logger.debug("llm response prompt_sha=%s chars=%d", _prompt_key(prompt)[:12], len(text))
        return str(text)


# --------------------------------------------------------------------------
# Pipeline configuration


def _default_templates() -> dict[str, str]:
    return {
        "strategy": "strategy_v1",
        "schedule": "schedule_v1",
        "profile": "profile_v1",
        "tutor": "tutor_v1",
    }


def _default_dayparts() -> dict[str, int]:
    return {"morning": 8 * 60, "afternoon": 13 * 60, "evening": 18 * 60, "night": 21 * 60}


@dataclass(frozen=True)
class PipelineConfig:
    max_repair_attempts: int = 3
    decoding: DecodingParams = field(default_factory=DecodingParams)
    templates: Mapping[str, str] = field(default_factory=_default_templates)
    policy: PacePolicy = field(default_factory=PacePolicy.default)
    default_window_start: int = 18 * 60
    dayparts: Mapping[str, int] = field(default_factory=_default_dayparts)
    default_start_date: str = "2025-01-01"

    def __post_init__(self):
        if self.max_repair_attempts < 0:
            raise ValueError("max_repair_attempts must be >= 0")


@dataclass(frozen=True)
class GatewayResult(Generic[T]):
    value: T
    provenance: str
    attempts: int


class _RepairExhausted(Exception):
    def __init__(self, attempts: int, errors: list[str]):
        super().__init__(f"output invalid after {attempts} attempts: {errors[:3]}")
        self.attempts = attempts
        self.errors = errors


_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def parse_json_reply(text: str) -> Any:
    """Parse a model reply as JSON, tolerating a markdown code fence."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        match = _FENCE_RE.search(text)
        if match:
            return json.loads(match.group(1))
        raise


def validated_completion(
    client: LlmClient,
    prompt: str,
    schema_name: str,
    config: PipelineConfig,
    semantic_check=None,
) -> tuple[Any, int]:
    """Call the client until its JSON reply passes schema + semantic checks.

    Performs at most ``max_repair_attempts + 1`` client calls; each retry
    appends the previous attempt's validation errors to the base prompt.
    Raises ``_RepairExhausted`` when every attempt fails.
    """
    errors: list[str] = []
    attempts = 0
    for attempt in range(config.max_repair_attempts + 1):
        if attempt == 0:
            current = prompt
        else:
            current = (
                prompt
                + "\n\nYour previous reply failed validation:\n- "
                + "\n- ".join(errors)
                + "\n\nReply again with corrected JSON only."
            )
        reply = client.complete(current, config.decoding)
        attempts = attempt + 1
        try:
            doc = parse_json_reply(reply)
        except json.JSONDecodeError as exc:
            errors = [f"reply is not valid JSON: {exc}"]
            continue
        errors = schema_errors(schema_name, doc)
        if not errors and semantic_check is not None:
            errors = semantic_check(doc)
        if not errors:
            return doc, attempts
    raise _RepairExhausted(attempts, errors)


# --------------------------------------------------------------------------
# Plan outlines


@dataclass(frozen=True)
class UnitOutline:
    unit_index: int
    day_count: int
    lesson_segments: tuple[tuple[str, int], ...]

    def to_doc(self) -> dict:
        return {
            "unit_index": self.unit_index,
            "day_count": self.day_count,
            "lesson_segments": {lid: n for lid, n in self.lesson_segments},
        }


@dataclass(frozen=True)
class PlanOutline:
    units: tuple[UnitOutline, ...]
    rationale: str

    def to_doc(self) -> dict:
        return {"units": [u.to_doc() for u in self.units], "rationale": self.rationale}

    @classmethod
    def from_doc(cls, raw: dict) -> "PlanOutline":
        units = tuple(
            UnitOutline(
                unit_index=int(u["unit_index"]),
                day_count=int(u["day_count"]),
                lesson_segments=tuple((lid, int(n)) for lid, n in u["lesson_segments"].items()),
            )
            for u in raw["units"]
        )
        return cls(units=units, rationale=str(raw.get("rationale", "")))


def outline_from_plan(plan: Plan, syllabus: Syllabus, policy: PacePolicy | None = None) -> PlanOutline:
    """Summarize an existing plan as per-unit day counts and segment counts."""
    policy = policy or PacePolicy.default()
    day_counts = days_per_unit(plan, syllabus)
    units = []
    for unit in syllabus.units:
        segments = tuple(
            (lesson.id, policy.segments_for(lesson.difficulty, plan.profile.pace))
            for lesson in unit.lessons
        )
        units.append(
            UnitOutline(unit_index=unit.index, day_count=day_counts[unit.index], lesson_segments=segments)
        )
    rationale = (
        f"Difficulty-weighted allocation under {plan.profile.pace.value} pacing: "
        f"{sum(n for u in units for _, n in u.lesson_segments)} segments of "
        f"{plan.profile.segment_minutes} minutes across {len(units)} units."
    )
    return PlanOutline(units=tuple(units), rationale=rationale)


def deterministic_outline(
    syllabus: Syllabus, profile: PersonalizationProfile, policy: PacePolicy | None = None
) -> PlanOutline:
    policy = policy or PacePolicy.default()
    return outline_from_plan(build_plan(syllabus, profile, policy), syllabus, policy)


def _outline_semantics(syllabus: Syllabus) -> Any:
    def check(doc: dict) -> list[str]:
        problems = []
        units = doc["units"]
        if [u["unit_index"] for u in units] != [u.index for u in syllabus.units]:
            problems.append(
                "units must list every syllabus unit exactly once, in order, "
                f"with unit_index 0..{len(syllabus.units) - 1}"
            )
            return problems
        for unit, raw in zip(syllabus.units, units):
            expected = [lesson.id for lesson in unit.lessons]
            got = list(raw["lesson_segments"])
            if sorted(got) != sorted(expected):
                problems.append(
                    f"unit {unit.index} lesson_segments keys must be exactly {expected}"
                )
        return problems

    return check


def generate_strategy(
    syllabus: Syllabus,
    profile: PersonalizationProfile,
    client: LlmClient | None = None,
    config: PipelineConfig | None = None,
) -> GatewayResult[PlanOutline]:
    """Produce a per-unit/per-lesson effort outline for the schedule stage.

    Without a client this is the deterministic pace-policy outline; with
    one, the model's outline is accepted only after validation, falling
    back to the deterministic outline when repairs are exhausted.
    """
    config = config or PipelineConfig()
    if client is None:
        outline = deterministic_outline(syllabus, profile, config.policy)
        return GatewayResult(outline, PROVENANCE_DETERMINISTIC, 0)
    prompt = render_prompt(
        config.templates["strategy"],
        syllabus=canonical_json(syllabus.to_doc()),
        profile=canonical_json(profile.to_doc()),
        schema=schema_text("plan_outline"),
    )
    try:
        doc, attempts = validated_completion(
            client, prompt, "plan_outline", config, _outline_semantics(syllabus)
        )
        return GatewayResult(PlanOutline.from_doc(doc), PROVENANCE_LLM, attempts)
    except _RepairExhausted as exc:
        logger.warning("strategy output invalid after %d attempts; using planner outline", exc.attempts)
        outline = deterministic_outline(syllabus, profile, config.policy)
        return GatewayResult(outline, PROVENANCE_FALLBACK, exc.attempts)


# --------------------------------------------------------------------------
# Schedule formatting


def _sessions_from_docs(raw_sessions: list[dict], revision: int) -> list[ScheduledSession]:
    sessions = []
    for raw in raw_sessions:
        kind = SessionKind(raw["kind"])
        sessions.append(
            ScheduledSession(
                id="",
                date=parse_date(raw["date"]),
                start_minutes=parse_clock(raw["start"]),
                end_minutes=parse_clock(raw["end"]),
                kind=kind,
                lesson_id=raw.get("lesson_id") if kind is SessionKind.STUDY else None,
                segment_ordinal=raw.get("segment_ordinal") if kind is SessionKind.STUDY else None,
            )
        )
    sessions.sort(key=lambda s: s.sort_key)
    return [
        dataclasses.replace(s, id=session_id_for(revision, i)) for i, s in enumerate(sessions)
    ]


def format_to_schedule(
    outline: PlanOutline,
    syllabus: Syllabus,
    profile: PersonalizationProfile,
    client: LlmClient | None = None,
    config: PipelineConfig | None = None,
) -> GatewayResult[Plan]:
    """Turn an outline into a concrete Plan.

    A model-produced session list is accepted only when the assembled plan
    shows zero violations (including warnings); otherwise the violation
    messages drive the repair loop and exhaustion falls back to the
    deterministic planner.
    """
    config = config or PipelineConfig()
    if client is None:
        return GatewayResult(
            build_plan(syllabus, profile, config.policy), PROVENANCE_DETERMINISTIC, 0
        )

    def check(doc: dict) -> list[str]:
        try:
            sessions = _sessions_from_docs(doc["sessions"], revision=1)
            candidate = Plan(
                course_id=syllabus.course_id,
                profile=profile,
                sessions=tuple(sessions),
                revision=1,
                provenance=PROVENANCE_LLM,
            )
        except (ValidationError, ValueError, KeyError, TypeError) as exc:
            return [f"sessions could not be assembled into a plan: {exc}"]
        return [v.message for v in check_plan(candidate, syllabus, profile, config.policy)]

    prompt = render_prompt(
        config.templates["schedule"],
        outline=canonical_json(outline.to_doc()),
        syllabus=canonical_json(syllabus.to_doc()),
        profile=canonical_json(profile.to_doc()),
        schema=schema_text("schedule_sessions"),
    )
    try:
        doc, attempts = validated_completion(client, prompt, "schedule_sessions", config, check)
        plan = Plan(
            course_id=syllabus.course_id,
            profile=profile,
            sessions=tuple(_sessions_from_docs(doc["sessions"], revision=1)),
            revision=1,
            provenance=PROVENANCE_LLM,
        )
        return GatewayResult(plan, PROVENANCE_LLM, attempts)
    except _RepairExhausted as exc:
        logger.warning("schedule output invalid after %d attempts; using build_plan", exc.attempts)
        plan = build_plan(syllabus, profile, config.policy, provenance=PROVENANCE_FALLBACK)
        return GatewayResult(plan, PROVENANCE_FALLBACK, exc.attempts)


def generate_plan(
    syllabus: Syllabus,
    profile: PersonalizationProfile,
    client: LlmClient | None = None,
    config: PipelineConfig | None = None,
) -> GatewayResult[Plan]:
    """Run both pipeline stages; provenance is "llm" only when both are."""
    config = config or PipelineConfig()
    strategy = generate_strategy(syllabus, profile, client, config)
    schedule = format_to_schedule(strategy.value, syllabus, profile, client, config)
    attempts = strategy.attempts + schedule.attempts
    if client is None:
        return GatewayResult(schedule.value, PROVENANCE_DETERMINISTIC, attempts)
    if strategy.provenance == PROVENANCE_LLM and schedule.provenance == PROVENANCE_LLM:
        return GatewayResult(schedule.value, PROVENANCE_LLM, attempts)
    plan = dataclasses.replace(schedule.value, provenance=PROVENANCE_FALLBACK)
    return GatewayResult(plan, PROVENANCE_FALLBACK, attempts)


# --------------------------------------------------------------------------
# Profile extraction

_WORD_NUMBERS = {
    "one": 1,
    "two": 2,
    "three": 3,
    "four": 4,
    "five": 5,
    "six": 6,
    "seven": 7,
    "eight": 8,
    "nine": 9,
    "ten": 10,
    "eleven": 11,
    "twelve": 12,
}

_NUMBER_PATTERN = r"(\d+(?:\.\d+)?|" + "|".join(_WORD_NUMBERS) + r")"

_HOURS_RE = re.compile(_NUMBER_PATTERN + r"\s+(?:\w+\s+)?hours?\b")
_WINDOW_MINUTES_RE = re.compile(
    r"(\d+)\s*(?:-\s*)?min(?:ute)?s?\s+(?:per|each|every|a)\s+(?:day|session|evening|morning|afternoon|night)\b"
)
_SEGMENT_EVERY_RE = re.compile(r"every\s+" + _NUMBER_PATTERN + r"\s*(?:-\s*)?min(?:ute)?s?\b")
_SEGMENT_BURST_RE = re.compile(
    _NUMBER_PATTERN + r"\s*(?:-\s*|\s+)min(?:ute)?s?\s+(?:burst|block|session|segment|chunk|sprint|stretch)"
)
_BREAK_LEN_RE = re.compile(
    _NUMBER_PATTERN + r"\s*(?:-\s*|\s+)min(?:ute)?s?\s+(?:break|rest|pause)"
)
_BREAK_OF_RE = re.compile(r"(?:break|rest|pause)s?\s+of\s+" + _NUMBER_PATTERN + r"\s*min")
_CLOCK_AMPM_RE = re.compile(r"\b(\d{1,2})(?::(\d{2}))?\s*(am|pm)\b")
_CLOCK_24H_RE = re.compile(r"\b(?:at|from)\s+(\d{1,2}):(\d{2})\b")

_WEEKDAY_WORDS = {
    "monday": 0,
    "tuesday": 1,
    "wednesday": 2,
    "thursday": 3,
    "friday": 4,
    "saturday": 5,
    "sunday": 6,
}


def _as_number(token: str) -> float:
    return _WORD_NUMBERS.get(token, 0) or float(token)


def _match_minutes(pattern: re.Pattern, text: str) -> int | None:
    match = pattern.search(text)
    return int(_as_number(match.group(1))) if match else None


def _extract_start(text: str, config: PipelineConfig) -> int | None:
    match = _CLOCK_AMPM_RE.search(text)
    if match:
        hour = int(match.group(1)) % 12
        if match.group(3) == "pm":
            hour += 12
        return hour * 60 + int(match.group(2) or 0)
    match = _CLOCK_24H_RE.search(text)
    if match:
        return int(match.group(1)) * 60 + int(match.group(2))
    found = [(text.find(name), start) for name, start in config.dayparts.items() if name in text]
    if found:
        return min(found)[1]
    return None


def _extract_weekdays(text: str) -> tuple[int, ...]:
    named = sorted({day for word, day in _WEEKDAY_WORDS.items() if word in text})
    if named:
        return tuple(named)
    if "weekend" in text and "weekday" not in text:
        return (5, 6)
    if "weekday" in text and "weekend" not in text:
        return (0, 1, 2, 3, 4)
    # "each evening", "every day", or nothing specific: assume daily.
    return (0, 1, 2, 3, 4, 5, 6)


def _extract_pace(text: str) -> Pace:
    folded = text.lower()
    if re.search(r"front[\s-]?loaded", folded):
        return Pace.FRONT_LOADED
    if re.search(r"back[\s-]?loaded", folded):
        return Pace.BACK_LOADED
    if re.search(r"steady|consistent|uniform|balanced|same every", folded):
        return Pace.STEADY
    early = re.search(r"start|beginning|initial|early|first|fundament|basics", folded)
    late = re.search(r"\bend\b|later|final|advanced|over time|progress", folded)
    more_early = re.search(
        r"more\s+(?:time|effort|focus)[^.]*\b(?:start|beginning|initial|early|first|fundament|basics)",
        folded,
    )
    more_late = re.search(
        r"more\s+(?:time|effort|focus)[^.]*\b(?:end|later|final|advanced)", folded
    )
    if more_early or re.search(r"(?:reduce|decrease|ease|taper|lighten)[^.]*progress", folded):
        return Pace.FRONT_LOADED
    if more_late or re.search(r"(?:increase|ramp|build)[^.]*(?:progress|up|over time)", folded):
        return Pace.BACK_LOADED
    if early and not late:
        return Pace.FRONT_LOADED
    if late and not early:
        return Pace.BACK_LOADED
    return Pace.STEADY


_PATH_MARKERS = {
    ResourceKind.VIDEO: ("video", "watch", "animation", "lecture"),
    ResourceKind.READING: ("read", "article", "book", "notes", "writeup"),
    ResourceKind.EXERCISE: ("exercise", "practice", "quiz", "problem", "hands-on"),
}


def _extract_path(text: str) -> tuple[ResourceKind, ...]:
    folded = text.lower()
    positions = []
    for kind, markers in _PATH_MARKERS.items():
        hits = [folded.find(m) for m in markers if m in folded]
        if hits:
            positions.append((min(hits), kind))
    ordered = [kind for _, kind in sorted(positions, key=lambda p: p[0])]
    for kind in (ResourceKind.VIDEO, ResourceKind.READING, ResourceKind.EXERCISE):
        if kind not in ordered:
            ordered.append(kind)
    return tuple(ordered)


def rule_based_profile(
    answers: Mapping[str, str],
    config: PipelineConfig | None = None,
    start_date: str | None = None,
    goals_text: str = "",
) -> PersonalizationProfile:
    """Regex/keyword extraction of a profile from dimension answers.

    This is the offline path: it needs an explicit total duration in the
    time answer ("two hours", "90 minutes per day") and otherwise applies
    the configured defaults. Raises ``Unextractable`` when no duration is
    found or the assembled profile is invalid.
    """
    config = config or PipelineConfig()
    time_text = (answers.get("time") or "").lower()
    pace_text = answers.get("pace") or ""
    path_text = answers.get("path") or ""
    if not time_text.strip() or not pace_text.strip() or not path_text.strip():
        raise Unextractable("answers for the time, pace, and path dimensions are required")

    window_minutes = None
    hours = _HOURS_RE.search(time_text)
    if hours:
        window_minutes = int(round(_as_number(hours.group(1)) * 60))
    else:
        window_minutes = _match_minutes(_WINDOW_MINUTES_RE, time_text)

    segment = _match_minutes(_SEGMENT_EVERY_RE, time_text) or _match_minutes(
        _SEGMENT_BURST_RE, time_text
    )
    break_minutes = _match_minutes(_BREAK_LEN_RE, time_text)
    if break_minutes is None:
        break_minutes = _match_minutes(_BREAK_OF_RE, time_text)

    if window_minutes is None and segment is not None:
        # "30 minute bursts" with no total: one segment per day.
        window_minutes = segment
    if window_minutes is None:
        raise Unextractable(
            "could not find a study duration in the time answer", element="time"
        )

    start = _extract_start(time_text, config)
    if start is None:
        start = config.default_window_start

    raw = {
        "goals_text": goals_text or (answers.get("goals") or ""),
        "availability": [
            {
                "weekdays": [
                    ("mon", "tue", "wed", "thu", "fri", "sat", "sun")[d]
                    for d in _extract_weekdays(time_text)
                ],
                "start": format_clock(start),
                "minutes": window_minutes,
            }
        ],
        "pace": _extract_pace(pace_text).value,
        "path_preferences": [k.value for k in _extract_path(path_text)],
        "start_date": start_date or config.default_start_date,
    }
    if segment is not None:
        raw["segment_minutes"] = segment
    if break_minutes is not None:
        raw["break_minutes"] = break_minutes
    try:
        return validate_profile(raw)
    except ValidationError as exc:
        raise Unextractable(f"extracted values do not form a valid profile: {exc}") from None


def extract_profile(
    answers: Mapping[str, str],
    client: LlmClient | None = None,
    config: PipelineConfig | None = None,
    start_date: str | None = None,
) -> GatewayResult[PersonalizationProfile]:
    """Map free-text dimension answers to a structured profile.

    With a client, the model's structured reply is validated against the
    extraction schema and then as a full profile; exhaustion falls back to
    the rule-based extractor. Raises ``Unextractable`` when neither path
    yields a valid profile.
    """
    config = config or PipelineConfig()
    required = [d for d in ("time", "pace", "path") if not (answers.get(d) or "").strip()]
    if required:
        raise Unextractable(f"missing answers for dimensions: {', '.join(required)}")
    if client is None:
        return GatewayResult(
            rule_based_profile(answers, config, start_date), PROVENANCE_DETERMINISTIC, 0
        )

    goals = answers.get("goals") or ""

    def check(doc: dict) -> list[str]:
        raw = dict(doc)
        raw["goals_text"] = goals
        raw["start_date"] = start_date or config.default_start_date
        try:
            validate_profile(raw)
        except ValidationError as exc:
            return [str(exc)]
        return []

    prompt = render_prompt(
        config.templates["profile"],
        answers=canonical_json({k: answers[k] for k in sorted(answers)}),
        schema=schema_text("profile_extraction"),
        default_segment=str(DEFAULT_SEGMENT_MINUTES),
        default_break=str(DEFAULT_BREAK_MINUTES),
        default_start=format_clock(config.default_window_start),
    )
    try:
        doc, attempts = validated_completion(client, prompt, "profile_extraction", config, check)
        raw = dict(doc)
        raw["goals_text"] = goals
        raw["start_date"] = start_date or config.default_start_date
        return GatewayResult(validate_profile(raw), PROVENANCE_LLM, attempts)
    except _RepairExhausted as exc:
        logger.warning("profile extraction invalid after %d attempts; using rules", exc.attempts)
        profile = rule_based_profile(answers, config, start_date)
        return GatewayResult(profile, PROVENANCE_FALLBACK, exc.attempts)
