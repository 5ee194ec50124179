"""Shared lexical tokenization: lowercase ASCII-fold, [a-z0-9]+ runs, no stemming.

A small fixed stopword list keeps function words out of both indexing and
queries; otherwise any natural-language question would lexically "match"
every transcript through words like "the", defeating score-based gating.
"""

from __future__ import annotations

import re
import unicodedata

_TOKEN_RE = re.compile(r"[a-z0-9]+")

STOPWORDS = frozenset(
    """
    a about all also an and any are as at be but by can did do does during
    for from had has have he her his how i if in into is it its may me my no
    nor not of on one or other others our out s she so than that the their
    them then there these they this to up was we were what when where which
    who why will with you your
    """.split()
)


def fold(text: str) -> str:
    """Lowercase and strip diacritics/non-ASCII."""
    normalized = unicodedata.normalize("NFKD", text)
    return normalized.encode("ascii", "ignore").decode("ascii").lower()


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.findall(fold(text)) if t not in STOPWORDS]
