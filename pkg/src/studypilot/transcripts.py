"""Caption ingestion, timestamped chunking, and BM25 lexical indexing.

Transcripts arrive as WebVTT, SRT, or segment-JSON and are normalized into
ordered (start, duration, text) segments. Chunking greedily accumulates
consecutive segments to a target duration so search hits carry usable
timestamps. The index is an immutable snapshot with deterministic
serialization.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Protocol

import httpx

from . import _text
from .model import ValidationError, canonical_json

BM25_K1 = 1.2
BM25_B = 0.75
DEFAULT_CHUNK_SECONDS = 60.0


class UnsupportedFormat(ValidationError):
    code = "unsupported_format"


class EmptyTranscript(ValidationError):
    code = "empty_transcript"


class EmptyQuery(ValidationError):
    code = "empty_query"


class TranscriptNotFound(ValidationError):
    code = "transcript_not_found"


@dataclass(frozen=True)
class TranscriptSegment:
    start_seconds: float
    duration_seconds: float
    text: str

    @property
    def end_seconds(self) -> float:
        return self.start_seconds + self.duration_seconds

    def to_doc(self) -> dict:
        return {
            "start": round(self.start_seconds, 3),
            "duration": round(self.duration_seconds, 3),
            "text": self.text,
        }


@dataclass(frozen=True)
class TranscriptDoc:
    lesson_id: str
    video_locator: str
    segments: tuple[TranscriptSegment, ...]

    def to_doc(self) -> dict:
        return {
            "lesson_id": self.lesson_id,
            "video_locator": self.video_locator,
            "segments": [s.to_doc() for s in self.segments],
        }

    @classmethod
    def from_doc(cls, raw: dict) -> "TranscriptDoc":
        segments = tuple(
            TranscriptSegment(float(s["start"]), float(s["duration"]), str(s["text"]))
            for s in raw["segments"]
        )
        return cls(
            lesson_id=str(raw["lesson_id"]),
            video_locator=str(raw.get("video_locator", "")),
            segments=segments,
        )


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    lesson_id: str
    start_seconds: float
    end_seconds: float
    text: str

    def to_doc(self) -> dict:
        return {
            "chunk_id": self.chunk_id,
            "lesson_id": self.lesson_id,
            "start": round(self.start_seconds, 3),
            "end": round(self.end_seconds, 3),
            "text": self.text,
        }

    @classmethod
    def from_doc(cls, raw: dict) -> "Chunk":
        return cls(
            chunk_id=str(raw["chunk_id"]),
            lesson_id=str(raw["lesson_id"]),
            start_seconds=float(raw["start"]),
            end_seconds=float(raw["end"]),
            text=str(raw["text"]),
        )


# --------------------------------------------------------------------------
# Caption parsing

_TIMING_RE = re.compile(
    r"(?:(\d{1,2}):)?(\d{1,2}):(\d{2})[.,](\d{3})\s*-->\s*(?:(\d{1,2}):)?(\d{1,2}):(\d{2})[.,](\d{3})"
)
_TAG_RE = re.compile(r"<[^>]+>")


def _timing_seconds(h: str | None, m: str, s: str, ms: str) -> float:
    return int(h or 0) * 3600 + int(m) * 60 + int(s) + int(ms) / 1000.0


def _parse_cue_blocks(lines: list[str]) -> list[TranscriptSegment]:
    segments = []
    i = 0
    while i < len(lines):
        match = _TIMING_RE.search(lines[i])
        if not match:
            i += 1
            continue
        start = _timing_seconds(*match.groups()[:4])
        end = _timing_seconds(*match.groups()[4:])
        i += 1
        text_lines = []
        while i < len(lines) and lines[i].strip():
            text_lines.append(_TAG_RE.sub("", lines[i].strip()))
            i += 1
        text = " ".join(t for t in text_lines if t).strip()
        if text and end > start:
            segments.append(TranscriptSegment(start, end - start, text))
    return segments


def parse_srt(text: str) -> list[TranscriptSegment]:
    """Parse SubRip cues; numeric counters and formatting tags are dropped."""
    return _parse_cue_blocks(text.lstrip("﻿").splitlines())


def parse_vtt(text: str) -> list[TranscriptSegment]:
    """Parse WebVTT cues; NOTE/STYLE/REGION blocks and cue settings are ignored."""
    lines = text.lstrip("﻿").splitlines()
    if not lines or not lines[0].startswith("WEBVTT"):
        raise UnsupportedFormat("missing WEBVTT header")
    body: list[str] = []
    skipping_block = False
    for line in lines[1:]:
        stripped = line.strip()
        if stripped.startswith(("NOTE", "STYLE", "REGION")) and "-->" not in stripped:
            skipping_block = True
            continue
        if skipping_block:
            if not stripped:
                skipping_block = False
            continue
        body.append(line)
    return _parse_cue_blocks(body)


def parse_segments_json(text: str) -> list[TranscriptSegment]:
    """Parse ``[{"start": s, "duration": d, "text": t}, ...]``."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UnsupportedFormat(f"invalid segment JSON: {exc}") from None
    if not isinstance(raw, list):
        raise UnsupportedFormat("segment JSON must be a list")
    segments = []
    for entry in raw:
        try:
            start = float(entry["start"])
            duration = float(entry["duration"])
            text_value = str(entry["text"]).strip()
        except (TypeError, KeyError, ValueError):
            raise UnsupportedFormat(f"bad segment entry: {entry!r}") from None
        if text_value and duration > 0:
            segments.append(TranscriptSegment(start, duration, text_value))
    return segments


def sniff_format(content: str, filename: str | None = None) -> str:
    """Guess one of ``vtt``/``srt``/``json`` from extension or content."""
    if filename:
        suffix = Path(filename).suffix.lower().lstrip(".")
        if suffix in ("vtt", "srt", "json"):
            return suffix
    head = content.lstrip("﻿").lstrip()
    if head.startswith("WEBVTT"):
        return "vtt"
    if head.startswith(("[", "{")):
        return "json"
    if _TIMING_RE.search(content):
        return "srt"
    raise UnsupportedFormat("could not determine transcript format")


def ingest_transcript(
    content: str,
    lesson_id: str,
    *,
    video_locator: str = "",
    fmt: str | None = None,
    filename: str | None = None,
) -> TranscriptDoc:
    """Normalize caption content into a :class:`TranscriptDoc`.

    Raises ``UnsupportedFormat`` for unrecognized input and
    ``EmptyTranscript`` when no usable cues remain.
    """
    fmt = fmt or sniff_format(content, filename)
    if fmt == "vtt":
        segments = parse_vtt(content)
    elif fmt == "srt":
        segments = parse_srt(content)
    elif fmt == "json":
        segments = parse_segments_json(content)
    else:
        raise UnsupportedFormat(f"unsupported transcript format {fmt!r}")
    segments.sort(key=lambda s: s.start_seconds)
    if not segments:
        raise EmptyTranscript(f"no cues found for lesson {lesson_id!r}", element=lesson_id)
    return TranscriptDoc(
        lesson_id=lesson_id, video_locator=video_locator, segments=tuple(segments)
    )


# --------------------------------------------------------------------------
# Chunking


def chunk_transcript(doc: TranscriptDoc, target_seconds: float = DEFAULT_CHUNK_SECONDS) -> list[Chunk]:
    """Greedy partition of consecutive segments into ~target-length chunks.

    Every chunk but the last reaches at least ``target_seconds`` of summed
    cue duration; chunks cover all segments in order without overlap.
    """
    chunks = []
    pending: list[TranscriptSegment] = []
    accumulated = 0.0

    def flush():
        nonlocal pending, accumulated
        if not pending:
            return
        chunks.append(
            Chunk(
                chunk_id=f"{doc.lesson_id}:{len(chunks):04d}",
                lesson_id=doc.lesson_id,
                start_seconds=pending[0].start_seconds,
                end_seconds=pending[-1].end_seconds,
                text=" ".join(s.text for s in pending),
            )
        )
        pending = []
        accumulated = 0.0

    for segment in doc.segments:
        pending.append(segment)
        accumulated += segment.duration_seconds
        if accumulated >= target_seconds:
            flush()
    flush()
    return chunks


# --------------------------------------------------------------------------
# BM25 index


@dataclass(frozen=True)
class LexicalIndex:
    """Immutable inverted index over chunks with BM25 statistics."""

    chunks: tuple[Chunk, ...]
    postings: dict[str, tuple[tuple[int, int], ...]]  # term -> ((chunk_pos, tf), ...)
    doc_lengths: tuple[int, ...]
    avg_length: float
    lesson_order: dict[str, int]
    k1: float = BM25_K1
    b: float = BM25_B

    def to_doc(self) -> dict:
        return {
            "k1": self.k1,
            "b": self.b,
            "avg_length": round(self.avg_length, 6),
            "doc_lengths": list(self.doc_lengths),
            "lesson_order": dict(sorted(self.lesson_order.items())),
            "postings": {
                term: [list(p) for p in plist]
                for term, plist in sorted(self.postings.items())
            },
            "chunks": [c.to_doc() for c in self.chunks],
        }

    def dumps(self) -> str:
        return canonical_json(self.to_doc())

    @classmethod
    def from_doc(cls, raw: dict) -> "LexicalIndex":
        return cls(
            chunks=tuple(Chunk.from_doc(c) for c in raw["chunks"]),
            postings={
                term: tuple((int(pos), int(tf)) for pos, tf in plist)
                for term, plist in raw["postings"].items()
            },
            doc_lengths=tuple(int(n) for n in raw["doc_lengths"]),
            avg_length=float(raw["avg_length"]),
            lesson_order={k: int(v) for k, v in raw["lesson_order"].items()},
            k1=float(raw["k1"]),
            b=float(raw["b"]),
        )


def build_index(chunks: Iterable[Chunk], k1: float = BM25_K1, b: float = BM25_B) -> LexicalIndex:
    """Build the inverted index; corpus statistics are recomputed from scratch."""
    chunk_list = tuple(chunks)
    postings: dict[str, list[tuple[int, int]]] = {}
    lengths = []
    lesson_order: dict[str, int] = {}
    for pos, chunk in enumerate(chunk_list):
        tokens = _text.tokenize(chunk.text)
        lengths.append(len(tokens))
        if chunk.lesson_id not in lesson_order:
            lesson_order[chunk.lesson_id] = len(lesson_order)
        for term, tf in sorted(Counter(tokens).items()):
            postings.setdefault(term, []).append((pos, tf))
    avg = sum(lengths) / len(lengths) if lengths else 0.0
    return LexicalIndex(
        chunks=chunk_list,
        postings={t: tuple(p) for t, p in postings.items()},
        doc_lengths=tuple(lengths),
        avg_length=avg,
        lesson_order=lesson_order,
        k1=k1,
        b=b,
    )


def search(
    index: LexicalIndex,
    query: str,
    allowed_lessons: set[str] | None = None,
    k: int = 4,
) -> list[tuple[Chunk, float]]:
    """BM25 ranking over chunks gated to ``allowed_lessons``.

    Ties break by (lesson order, chunk start); zero-score chunks are
    dropped, so a query with no term overlap yields an empty list.
    """
    terms = _text.tokenize(query)
    if not terms:
        raise EmptyQuery("query has no searchable tokens")
    n_docs = len(index.chunks)
    if n_docs == 0:
        return []

    scores: dict[int, float] = {}
    for term in terms:
        plist = index.postings.get(term)
        if not plist:
            continue
        df = len(plist)
        idf = math.log(1 + (n_docs - df + 0.5) / (df + 0.5))
        for pos, tf in plist:
            chunk = index.chunks[pos]
            if allowed_lessons is not None and chunk.lesson_id not in allowed_lessons:
                continue
            length_norm = 1 - index.b + index.b * index.doc_lengths[pos] / max(index.avg_length, 1e-9)
            scores[pos] = scores.get(pos, 0.0) + idf * (
                tf * (index.k1 + 1) / (tf + index.k1 * length_norm)
            )

    ranked = sorted(
        ((pos, score) for pos, score in scores.items() if score > 0.0),
        key=lambda item: (
            -item[1],
            index.lesson_order[index.chunks[item[0]].lesson_id],
            index.chunks[item[0]].start_seconds,
        ),
    )
    return [(index.chunks[pos], score) for pos, score in ranked[:k]]


# --------------------------------------------------------------------------
# Transcript fetching


class TranscriptFetcher(Protocol):
    def fetch(self, video_id: str) -> tuple[str, str | None]:
        """Return (content, format hint) for a video id."""
        ...


class DirectoryFetcher:
    """Directory-backed fake: looks up ``<video_id>.{vtt,srt,json}``."""

    def __init__(self, directory: Path | str):
        self.directory = Path(directory)

    def fetch(self, video_id: str) -> tuple[str, str | None]:
        for ext in ("vtt", "srt", "json"):
            path = self.directory / f"{video_id}.{ext}"
            if path.is_file():
                return path.read_text(encoding="utf-8"), ext
        raise TranscriptNotFound(
            f"no transcript file for video {video_id!r} in {self.directory}",
            element=video_id,
        )


class HttpFetcher:
    """Fetches ``{base_url}/{video_id}`` and trusts the content type."""

    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def fetch(self, video_id: str) -> tuple[str, str | None]:
        try:
            response = httpx.get(f"{self.base_url}/{video_id}", timeout=self.timeout)
            response.raise_for_status()
        except httpx.HTTPError as exc:
            raise TranscriptNotFound(
                f"transcript fetch failed for {video_id!r}: {exc}", element=video_id
            ) from None
        content_type = response.headers.get("content-type", "")
        fmt = None
        if "vtt" in content_type:
            fmt = "vtt"
        elif "json" in content_type:
            fmt = "json"
        return response.text, fmt
