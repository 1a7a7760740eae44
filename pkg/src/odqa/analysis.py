"""Text analysis: Unicode word tokenization and stopword filtering.

The same analyzer is applied to documents at index time and to questions
at query time, so term statistics and query terms always agree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

ANALYZER_VERSION = "std-1"

# Word = run of Unicode letters/digits; underscore is a separator.
_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


def _load_stopwords() -> frozenset[str]:
    raw = resources.files("odqa.data").joinpath("stopwords.txt").read_text("utf-8")
    words = set()
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


STOPWORDS = _load_stopwords()


@dataclass(frozen=True)
class Token:
    text: str  # lowercased
    start: int  # offset of the raw token in the source string
    end: int


def tokenize_with_offsets(text: str) -> list[Token]:
    """All word tokens (lowercased) with their character offsets.

    No stopword filtering; used where spans into the original text are
    needed.
    """
    return [
        Token(text=m.group().lower(), start=m.start(), end=m.end())
        for m in _WORD_RE.finditer(text)
    ]


def analyze(text: str) -> list[str]:
    """Lowercased word tokens with stopwords removed.

    Deterministic; empty input yields an empty list.
    """
    return [t.text for t in tokenize_with_offsets(text) if t.text not in STOPWORDS]


def is_stopword(token: str) -> bool:
    return token in STOPWORDS
