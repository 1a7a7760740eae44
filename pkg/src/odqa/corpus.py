"""Corpus ingestion and segmentation.

A collection is a UTF-8 JSONL file, one article per line:
``{"id": str, "title": str, "text": str}``.  Articles are cut into
retrieval units at one of three granularities: the whole article, its
paragraphs (blank-line separated blocks), or individual sentences
(rule-based splitter with an abbreviation exception list).

All character offsets count Unicode scalar values into the parent
article's ``text``, so ``article.text[char_start:char_end]`` always
reproduces a segment's text exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from importlib import resources
from typing import Iterable, Iterator


class Granularity(str, Enum):
    ARTICLE = "article"
    PARAGRAPH = "paragraph"
    SENTENCE = "sentence"


class CorpusFormatError(ValueError):
    """A collection file record is malformed."""


class DuplicateArticleError(CorpusFormatError):
    """The same article id appears on two lines of a collection file."""


@dataclass(frozen=True)
class Article:
    id: str
    title: str
    text: str


@dataclass(frozen=True)
class Segment:
    """A unit of retrieval with provenance back to its article."""

    segment_id: str
    article_id: str
    granularity: Granularity
    text: str
    char_start: int
    char_end: int
    # For sentence segments: the ordinal of the paragraph they came from.
    # For paragraph segments this equals the segment's own ordinal; 0 for
    # article segments.
    paragraph_ordinal: int = 0

    def to_dict(self) -> dict:
        return {
            "segment_id": self.segment_id,
            "article_id": self.article_id,
            "granularity": self.granularity.value,
            "text": self.text,
            "char_start": self.char_start,
            "char_end": self.char_end,
            "paragraph_ordinal": self.paragraph_ordinal,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Segment":
        return cls(
            segment_id=d["segment_id"],
            article_id=d["article_id"],
            granularity=Granularity(d["granularity"]),
            text=d["text"],
            char_start=d["char_start"],
            char_end=d["char_end"],
            paragraph_ordinal=d["paragraph_ordinal"],
        )


@dataclass(frozen=True)
class SegmentationStats:
    n_articles: int
    n_paragraphs: int
    n_sentences: int
    avg_sentences_per_paragraph: float
    avg_paragraphs_per_article: float


def _load_abbreviations() -> frozenset[str]:
    raw = resources.files("odqa.data").joinpath("abbreviations.txt").read_text("utf-8")
    toks = set()
    for line in raw.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            toks.add(line.lower())
    return frozenset(toks)


_ABBREVIATIONS = _load_abbreviations()

_RECORD_FIELDS = ("id", "title", "text")


def parse_article(obj: dict, line_no: int) -> Article:
    for field in _RECORD_FIELDS:
        if field not in obj:
            raise CorpusFormatError(f"line {line_no}: missing field {field!r}")
        if not isinstance(obj[field], str):
            raise CorpusFormatError(f"line {line_no}: field {field!r} must be a string")
    if not obj["id"]:
        raise CorpusFormatError(f"line {line_no}: empty article id")
    if not obj["text"].strip():
        raise CorpusFormatError(f"line {line_no}: article {obj['id']!r} has empty text")
    return Article(id=obj["id"], title=obj["title"], text=obj["text"])


def ingest_collection(path, format: str = "jsonl") -> Iterator[Article]:
    """Stream articles from a collection file, in file order.

    Raises CorpusFormatError naming the offending line number for
    malformed records, and DuplicateArticleError naming both lines for
    repeated ids.
    """
    if format != "jsonl":
        raise CorpusFormatError(f"unsupported corpus format {format!r}")
    with open(path, "r", encoding="utf-8") as fh:
        yield from _ingest_lines(fh)


def _ingest_lines(lines: Iterable[str]) -> Iterator[Article]:
    seen: dict[str, int] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise CorpusFormatError(f"line {line_no}: invalid JSON ({e.msg})") from e
        if not isinstance(obj, dict):
            raise CorpusFormatError(f"line {line_no}: record is not an object")
        article = parse_article(obj, line_no)
        if article.id in seen:
            raise DuplicateArticleError(
                f"duplicate article id {article.id!r} on lines "
                f"{seen[article.id]} and {line_no}"
            )
        seen[article.id] = line_no
        yield article


def _paragraph_spans(text: str) -> list[tuple[int, int]]:
    """Blank-line separated blocks as (start, end) offsets, each stripped."""
    spans = []
    pos = 0
    block_start = None
    block_end = None
    for line in text.splitlines(keepends=True):
        stripped_len = len(line.rstrip("\r\n"))
        if line.strip():
            if block_start is None:
                block_start = pos
            block_end = pos + stripped_len
        else:
            if block_start is not None:
                spans.append((block_start, block_end))
                block_start = None
        pos += len(line)
    if block_start is not None:
        spans.append((block_start, block_end))
    # Trim surrounding whitespace within each block.
    out = []
    for start, end in spans:
        while start < end and text[start].isspace():
            start += 1
        while end > start and text[end - 1].isspace():
            end -= 1
        if start < end:
            out.append((start, end))
    return out


_TERMINATORS = ".!?"


def _token_before(text: str, pos: int) -> str:
    """Whitespace-delimited token ending at pos (inclusive), lowercased."""
    start = pos
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start : pos + 1].lower()


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Offsets of sentences within ``text`` (one paragraph).

    A sentence ends after '.', '!' or '?' when followed by whitespace and
    an uppercase letter (or end of text), unless the terminating token is
    a known abbreviation.  Spans are stripped of surrounding whitespace.
    """
    spans = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        ch = text[i]
        if ch in _TERMINATORS:
            # Absorb a run of terminators ("?!", "...").
            j = i
            while j + 1 < n and text[j + 1] in _TERMINATORS:
                j += 1
            boundary = False
            if j + 1 >= n:
                boundary = True
            elif text[j + 1].isspace():
                k = j + 1
                while k < n and text[k].isspace():
                    k += 1
                if k >= n or text[k].isupper():
                    boundary = True
            if boundary and ch == "." and i == j:
                if _token_before(text, i) in _ABBREVIATIONS:
                    boundary = False
            if boundary:
                spans.append((start, j + 1))
                start = j + 1
            i = j + 1
        else:
            i += 1
    if start < n and text[start:].strip():
        spans.append((start, n))
    out = []
    for s, e in spans:
        while s < e and text[s].isspace():
            s += 1
        while e > s and text[e - 1].isspace():
            e -= 1
        if s < e:
            out.append((s, e))
    return out


def _segment_id(article_id: str, granularity: Granularity, ordinal: int) -> str:
    return f"{article_id}:{granularity.value}:{ordinal}"


def segment_article(article: Article, granularity: Granularity) -> list[Segment]:
    """Cut one article into segments of the requested granularity."""
    if granularity is Granularity.ARTICLE:
        return [
            Segment(
                segment_id=_segment_id(article.id, granularity, 0),
                article_id=article.id,
                granularity=granularity,
                text=article.text,
                char_start=0,
                char_end=len(article.text),
                paragraph_ordinal=0,
            )
        ]

    para_spans = _paragraph_spans(article.text)
    if granularity is Granularity.PARAGRAPH:
        return [
            Segment(
                segment_id=_segment_id(article.id, granularity, ordinal),
                article_id=article.id,
                granularity=granularity,
                text=article.text[start:end],
                char_start=start,
                char_end=end,
                paragraph_ordinal=ordinal,
            )
            for ordinal, (start, end) in enumerate(para_spans)
        ]

    segments = []
    ordinal = 0
    for para_ordinal, (pstart, pend) in enumerate(para_spans):
        for s, e in sentence_spans(article.text[pstart:pend]):
            segments.append(
                Segment(
                    segment_id=_segment_id(article.id, granularity, ordinal),
                    article_id=article.id,
                    granularity=granularity,
                    text=article.text[pstart + s : pstart + e],
                    char_start=pstart + s,
                    char_end=pstart + e,
                    paragraph_ordinal=para_ordinal,
                )
            )
            ordinal += 1
    return segments


def collection_stats(articles: Iterable[Article]) -> SegmentationStats:
    """Counts and exact-ratio averages over a full article stream."""
    n_articles = 0
    n_paragraphs = 0
    n_sentences = 0
    for article in articles:
        n_articles += 1
        paras = segment_article(article, Granularity.PARAGRAPH)
        n_paragraphs += len(paras)
        n_sentences += len(segment_article(article, Granularity.SENTENCE))
    if n_articles == 0:
        raise ValueError("empty article stream")
    return SegmentationStats(
        n_articles=n_articles,
        n_paragraphs=n_paragraphs,
        n_sentences=n_sentences,
        avg_sentences_per_paragraph=(
            float(Fraction(n_sentences, n_paragraphs)) if n_paragraphs else 0.0
        ),
        avg_paragraphs_per_article=float(Fraction(n_paragraphs, n_articles)),
    )
