"""Answer-span readers.

A reader scores candidate answer spans within one segment.  Scores are
raw (no per-segment normalization) so candidates from different segments
are directly comparable; the pipeline relies on this when it merges and
fuses candidates globally.

Two implementations:

* ``LexicalReader`` -- deterministic term-proximity scorer, used for
  tests and CPU-only deployments.  A span is scored by the IDF mass of
  question terms found near it, minus a small length penalty.
* ``SidecarReader`` (in ``odqa.sidecar``) -- adapter to an external
  neural reader process speaking the line-delimited JSON protocol.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from typing import Protocol, Sequence, runtime_checkable

from odqa.analysis import analyze, is_stopword, tokenize_with_offsets
from odqa.corpus import Segment


class ReaderTransportError(RuntimeError):
    """The external reader is unreachable or violated its protocol.

    Distinct from "no span found", which is an empty result list.
    """


@dataclass(frozen=True)
class SpanCandidate:
    segment_id: str
    char_start: int
    char_end: int
    text: str
    reader_score: float


@runtime_checkable
class Reader(Protocol):
    kind: str

    def read_spans(
        self, question: str, segment: Segment, top_spans: int
    ) -> list[SpanCandidate]: ...


def _load_config() -> dict:
    raw = resources.files("odqa.data").joinpath("lexical_reader.json").read_text("utf-8")
    return json.loads(raw)


_CFG = _load_config()
MAX_SPAN_TOKENS: int = _CFG["max_span_tokens"]
WINDOW_TOKENS: int = _CFG["window_tokens"]
LENGTH_PENALTY: float = _CFG["length_penalty"]


def lexical_span_score(
    question_terms: Sequence[str],
    segment_tokens: Sequence[str],
    span: tuple[int, int],
    idf,
    window_tokens: int = WINDOW_TOKENS,
    length_penalty: float = LENGTH_PENALTY,
) -> float:
    """Score a token-range span of a segment against question terms.

    Sum of idf(t) over unique question terms t occurring within a window
    extending ``window_tokens // 2`` tokens on either side of the span,
    minus ``length_penalty`` per span token.
    """
    start, end = span
    half = window_tokens // 2
    lo = max(0, start - half)
    hi = min(len(segment_tokens), end + half)
    in_window = set(segment_tokens[lo:hi])
    score = 0.0
    for term in dict.fromkeys(question_terms):
        if term in in_window:
            score += idf(term)
    return score - length_penalty * (end - start)


class LexicalReader:
    """Deterministic span scorer driven by the index's IDF statistics.

    Candidate spans run 1..max_span_tokens tokens, must not contain any
    question term (an answer that repeats the question is useless), must
    start and end on non-stopword tokens, and must have at least one
    question term within the scoring window.  Ties break by
    (char_start, char_end) ascending.
    """

    kind = "lexical"

    def __init__(self, idf_source):
        """idf_source: anything with an ``idf(term) -> float`` method."""
        self._idf_source = idf_source

    def read_spans(
        self, question: str, segment: Segment, top_spans: int
    ) -> list[SpanCandidate]:
        if top_spans < 1:
            raise ValueError("top_spans must be >= 1")
        if not segment.text:
            raise ValueError("segment text must be nonempty")
        question_terms = list(dict.fromkeys(analyze(question)))
        if not question_terms:
            return []
        tokens = tokenize_with_offsets(segment.text)
        token_texts = [t.text for t in tokens]
        qset = set(question_terms)
        idf = self._idf_source.idf
        half = WINDOW_TOKENS // 2

        scored: list[tuple[float, int, int, int, int]] = []
        n = len(tokens)
        for i in range(n):
            if token_texts[i] in qset or is_stopword(token_texts[i]):
                continue
            for j in range(i + 1, min(i + 1 + MAX_SPAN_TOKENS, n + 1)):
                last = token_texts[j - 1]
                if last in qset:
                    break  # spans may not contain question terms
                if is_stopword(last):
                    continue  # spans may not end on a stopword
                lo = max(0, i - half)
                hi = min(n, j + half)
                window = set(token_texts[lo:hi])
                if not window & qset:
                    continue
                score = lexical_span_score(
                    question_terms, token_texts, (i, j), idf
                )
                scored.append((score, tokens[i].start, tokens[j - 1].end, i, j))

        scored.sort(key=lambda s: (-s[0], s[1], s[2]))
        out = []
        for score, cs, ce, _, _ in scored[:top_spans]:
            out.append(
                SpanCandidate(
                    segment_id=segment.segment_id,
                    char_start=cs,
                    char_end=ce,
                    text=segment.text[cs:ce],
                    reader_score=score,
                )
            )
        return out


def read_spans(
    reader: Reader, question: str, segment: Segment, top_spans: int
) -> list[SpanCandidate]:
    """Uniform entry point over any reader implementation."""
    return reader.read_spans(question, segment, top_spans)


def read_article(
    reader: Reader,
    question: str,
    article_segments: Sequence[Segment],
    top_spans_per_segment: int = 1,
) -> list[SpanCandidate]:
    """Apply the reader paragraph by paragraph and merge candidates.

    The merge is a plain stable sort on raw reader score: no per-segment
    renormalization happens anywhere.
    """
    merged: list[SpanCandidate] = []
    for segment in article_segments:
        merged.extend(reader.read_spans(question, segment, top_spans_per_segment))
    merged.sort(key=lambda c: -c.reader_score)
    return merged
