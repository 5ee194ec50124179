"""Course repository and goal-driven course recommendation.

A catalog is an immutable snapshot of course cards loaded from a directory
of ``*.card.json`` documents, each pointing at a syllabus document.
Recommendation is plain TF-IDF cosine over card text, fully offline and
deterministic; an LLM re-ranker can be layered on top by callers but is
never required.
"""

from __future__ import annotations

import json
import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import _text
from .model import ParseError, Syllabus, ValidationError, load_syllabus


class MissingSyllabus(ValidationError):
    code = "missing_syllabus"


@dataclass(frozen=True)
class CourseCard:
    course_id: str
    title: str
    topics: tuple[str, ...]
    description: str
    syllabus_path: str

    def search_text(self) -> str:
        return " ".join((self.title, self.description, " ".join(self.topics)))

    def to_doc(self) -> dict:
        return {
            "course_id": self.course_id,
            "title": self.title,
            "topics": list(self.topics),
            "description": self.description,
            "syllabus_path": self.syllabus_path,
        }

    def public_doc(self) -> dict:
        """Card as served over the wire: no storage-layout fields."""
        doc = self.to_doc()
        del doc["syllabus_path"]
        return doc


@dataclass(frozen=True)
class Catalog:
    cards: tuple[CourseCard, ...]
    topic_index: dict[str, tuple[str, ...]]
    base_dir: Path
    _syllabus_cache: dict = field(default_factory=dict, repr=False)
    _cache_lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def card(self, course_id: str) -> CourseCard | None:
        for card in self.cards:
            if card.course_id == course_id:
                return card
        return None

    def syllabus(self, course_id: str) -> Syllabus:
        """Load (and cache) the syllabus behind a card's locator."""
        card = self.card(course_id)
        if card is None:
            raise MissingSyllabus(f"no course {course_id!r} in catalog", element=course_id)
        with self._cache_lock:
            if course_id not in self._syllabus_cache:
                path = self.base_dir / card.syllabus_path
                try:
                    text = path.read_text(encoding="utf-8")
                except OSError:
                    raise MissingSyllabus(
                        f"syllabus file {card.syllabus_path!r} for course "
                        f"{course_id!r} is unreadable",
                        element=course_id,
                    ) from None
                self._syllabus_cache[course_id] = load_syllabus(text)
            return self._syllabus_cache[course_id]


def _parse_card(raw: dict, source: str) -> CourseCard:
    for key in ("course_id", "title", "description", "syllabus_path"):
        if not isinstance(raw.get(key), str) or not raw.get(key):
            raise ParseError(f"card {source} missing field {key!r}", element=source)
    topics = raw.get("topics", [])
    if not isinstance(topics, list):
        raise ParseError(f"card {source} topics must be a list", element=source)
    return CourseCard(
        course_id=raw["course_id"],
        title=raw["title"],
        topics=tuple(str(t).strip().lower() for t in topics),
        description=raw["description"],
        syllabus_path=raw["syllabus_path"],
    )


def load_catalog(directory: Path | str) -> Catalog:
    """Scan a directory for ``*.card.json`` documents.

    Every card's syllabus file must exist (``MissingSyllabus`` otherwise);
    syllabi are parsed lazily on first access.
    """
    base = Path(directory)
    cards = []
    seen: set[str] = set()
    for path in sorted(base.glob("*.card.json")):
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON in {path.name}: {exc}", element=path.name) from None
        card = _parse_card(raw, path.name)
        if card.course_id in seen:
            raise ParseError(
                f"duplicate course id {card.course_id!r} in {path.name}", element=card.course_id
            )
        seen.add(card.course_id)
        if not (base / card.syllabus_path).is_file():
            raise MissingSyllabus(
                f"card {path.name} points at missing syllabus {card.syllabus_path!r}",
                element=card.course_id,
            )
        cards.append(card)

    topic_index: dict[str, list[str]] = {}
    for card in cards:
        for topic in card.topics:
            topic_index.setdefault(topic, []).append(card.course_id)
    return Catalog(
        cards=tuple(cards),
        topic_index={t: tuple(sorted(ids)) for t, ids in sorted(topic_index.items())},
        base_dir=base,
    )


def list_topics(catalog: Catalog) -> list[str]:
    """Deduplicated, lexically sorted topic tags."""
    return sorted(catalog.topic_index)


def _tfidf_vector(tokens: list[str], idf: dict[str, float]) -> dict[str, float]:
    counts = Counter(tokens)
    return {term: tf * idf[term] for term, tf in counts.items() if term in idf}


def _cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    if dot == 0.0:
        return 0.0
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    return dot / (norm_a * norm_b)


def recommend_courses(
    goal_text: str, catalog: Catalog, k: int
) -> list[tuple[CourseCard, float]]:
    """Rank cards by TF-IDF cosine against the goal text.

    Pure and deterministic: equal scores tie-break by ascending course_id.
    Cards with zero similarity are dropped, so the result may be shorter
    than ``k`` (or empty).
    """
    if not goal_text.strip():
        raise ValueError("goal_text must be non-empty")
    if k <= 0:
        return []

    doc_tokens = {card.course_id: _text.tokenize(card.search_text()) for card in catalog.cards}
    n_docs = len(catalog.cards)
    df: Counter[str] = Counter()
    for tokens in doc_tokens.values():
        df.update(set(tokens))
    # Smoothed IDF keeps corpus-wide terms from zeroing out entire vectors.
    idf = {term: math.log((1 + n_docs) / (1 + d)) + 1.0 for term, d in df.items()}

    query_vec = _tfidf_vector(_text.tokenize(goal_text), idf)
    scored = []
    for card in catalog.cards:
        score = _cosine(query_vec, _tfidf_vector(doc_tokens[card.course_id], idf))
        if score > 0.0:
            scored.append((card, score))
    scored.sort(key=lambda pair: (-pair[1], pair[0].course_id))
    return scored[:k]
