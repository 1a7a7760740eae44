"""Inverted index with BM25 ranking over segments of one granularity.

On-disk layout (directory):

    meta.json      IndexMeta fields
    terms.bin      magic "ODQATRM1"; u32 term count; per term:
                   u16 utf-8 byte length, term bytes, u32 df,
                   u64 byte offset into the postings payload
    postings.bin   magic "ODQAPST1"; per term, df little-endian
                   (u32 ordinal, u32 tf) pairs
    lengths.bin    magic "ODQALEN1"; u32 N; N little-endian u32 token counts
    segments.jsonl one segment per line, in ordinal order

Only behavioral (score) compatibility is guaranteed across format
versions; the magic strings carry the version.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum
from math import log
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from odqa.analysis import ANALYZER_VERSION, analyze
from odqa.corpus import Granularity, Segment
from odqa.scoring import accumulate_term

_TERMS_MAGIC = b"ODQATRM1"
_POSTINGS_MAGIC = b"ODQAPST1"
_LENGTHS_MAGIC = b"ODQALEN1"

DEFAULT_K1 = 0.9
DEFAULT_B = 0.4


class IndexBuildError(ValueError):
    """Invalid input to index construction."""


class IndexFormatError(ValueError):
    """Persisted index directory is missing files or corrupt."""


@dataclass(frozen=True)
class IndexMeta:
    granularity: Granularity
    n_segments: int
    avgdl: float
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B
    analyzer_version: str = ANALYZER_VERSION

    def __post_init__(self):
        if self.n_segments < 1:
            raise IndexBuildError("index must contain at least one segment")
        if not self.avgdl > 0:
            raise IndexBuildError("avgdl must be positive")
        if self.k1 < 0:
            raise IndexBuildError("k1 must be nonnegative")
        if not 0.0 <= self.b <= 1.0:
            raise IndexBuildError("b must be in [0, 1]")


class SearchStatus(str, Enum):
    OK = "ok"
    EMPTY_QUERY = "empty_query"


@dataclass(frozen=True)
class RetrievedSegment:
    segment: Segment
    score: float
    rank: int  # 1-based, dense


@dataclass(frozen=True)
class SearchResult:
    hits: list[RetrievedSegment]
    status: SearchStatus = SearchStatus.OK

    def __iter__(self):
        return iter(self.hits)

    def __len__(self):
        return len(self.hits)


def _unique_in_order(tokens: Sequence[str]) -> list[str]:
    return list(dict.fromkeys(tokens))


class InvertedIndex:
    """Immutable after construction; safe for concurrent readers."""

    def __init__(
        self,
        meta: IndexMeta,
        postings: dict[str, tuple[np.ndarray, np.ndarray]],
        doc_lens: np.ndarray,
        segments: list[Segment],
    ):
        self.meta = meta
        self._postings = postings
        self._doc_lens = doc_lens
        self._segments = segments
        # Per-document BM25 length normalization, precomputed once.
        self._norms = meta.k1 * (
            1.0 - meta.b + meta.b * (doc_lens.astype(np.float64) / meta.avgdl)
        )

    # -- accessors ---------------------------------------------------------

    @property
    def n_segments(self) -> int:
        return self.meta.n_segments

    @property
    def granularity(self) -> Granularity:
        return self.meta.granularity

    def get_segment(self, ordinal: int) -> Segment:
        return self._segments[ordinal]

    @property
    def segments(self) -> list[Segment]:
        return self._segments

    def df(self, term: str) -> int:
        entry = self._postings.get(term)
        return 0 if entry is None else len(entry[0])

    def idf(self, term: str) -> float:
        """Nonnegative IDF: ln(1 + (N - df + 0.5) / (df + 0.5))."""
        n = self.meta.n_segments
        df = self.df(term)
        return log(1.0 + (n - df + 0.5) / (df + 0.5))

    # -- scoring -----------------------------------------------------------

    def bm25_score(self, query_tokens: Sequence[str], ordinal: int) -> float:
        """BM25 score of one segment for a bag-of-words query.

        Duplicate query terms are collapsed; terms absent from the
        segment contribute 0.
        """
        if not 0 <= ordinal < self.meta.n_segments:
            raise IndexError(f"segment ordinal {ordinal} out of range")
        k1p1 = self.meta.k1 + 1.0
        norm = self._norms[ordinal]
        score = 0.0
        for term in _unique_in_order(query_tokens):
            entry = self._postings.get(term)
            if entry is None:
                continue
            ordinals, tfs = entry
            pos = np.searchsorted(ordinals, ordinal)
            if pos < len(ordinals) and ordinals[pos] == ordinal:
                tf = float(tfs[pos])
                score += self.idf(term) * tf * k1p1 / (tf + norm)
        return score

    def retrieve(self, question: str, k: int) -> SearchResult:
        """Top-k segments by BM25 over the analyzed question.

        Fewer than k hits are returned only when fewer segments score
        above zero; ties break by ascending segment ordinal.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        tokens = analyze(question)
        if not tokens:
            return SearchResult([], SearchStatus.EMPTY_QUERY)
        scores = self.score_all(tokens)
        cand = np.flatnonzero(scores > 0.0)
        if len(cand) == 0:
            return SearchResult([], SearchStatus.OK)
        order = cand[np.lexsort((cand, -scores[cand]))]
        hits = [
            RetrievedSegment(
                segment=self._segments[int(d)],
                score=float(scores[d]),
                rank=rank,
            )
            for rank, d in enumerate(order[:k], start=1)
        ]
        return SearchResult(hits, SearchStatus.OK)

    def score_all(self, query_tokens: Sequence[str]) -> np.ndarray:
        """Dense BM25 scores for all segments (term-at-a-time kernel)."""
        scores = np.zeros(self.meta.n_segments, dtype=np.float64)
        for term in _unique_in_order(query_tokens):
            entry = self._postings.get(term)
            if entry is None:
                continue
            ordinals, tfs = entry
            accumulate_term(
                scores, ordinals, tfs, self._norms, self.idf(term), self.meta.k1
            )
        return scores

    # -- persistence -------------------------------------------------------

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        meta = {
            "granularity": self.meta.granularity.value,
            "n_segments": self.meta.n_segments,
            "avgdl": self.meta.avgdl,
            "k1": self.meta.k1,
            "b": self.meta.b,
            "analyzer_version": self.meta.analyzer_version,
        }
        (directory / "meta.json").write_text(
            json.dumps(meta, indent=2) + "\n", encoding="utf-8"
        )

        terms = sorted(self._postings)
        with open(directory / "postings.bin", "wb") as pf, open(
            directory / "terms.bin", "wb"
        ) as tf_:
            pf.write(_POSTINGS_MAGIC)
            tf_.write(_TERMS_MAGIC)
            tf_.write(struct.pack("<I", len(terms)))
            offset = 0
            for term in terms:
                ordinals, tfs = self._postings[term]
                payload = np.column_stack((ordinals, tfs)).astype("<u4").tobytes()
                pf.write(payload)
                tb = term.encode("utf-8")
                tf_.write(struct.pack("<H", len(tb)))
                tf_.write(tb)
                tf_.write(struct.pack("<IQ", len(ordinals), offset))
                offset += len(payload)

        with open(directory / "lengths.bin", "wb") as lf:
            lf.write(_LENGTHS_MAGIC)
            lf.write(struct.pack("<I", self.meta.n_segments))
            lf.write(self._doc_lens.astype("<u4").tobytes())

        with open(directory / "segments.jsonl", "w", encoding="utf-8") as sf:
            for segment in self._segments:
                sf.write(json.dumps(segment.to_dict(), ensure_ascii=False) + "\n")

    @classmethod
    def load(cls, directory) -> "InvertedIndex":
        directory = Path(directory)
        try:
            meta_raw = json.loads((directory / "meta.json").read_text("utf-8"))
        except FileNotFoundError as e:
            raise IndexFormatError(f"not an index directory: {directory}") from e
        meta = IndexMeta(
            granularity=Granularity(meta_raw["granularity"]),
            n_segments=meta_raw["n_segments"],
            avgdl=meta_raw["avgdl"],
            k1=meta_raw["k1"],
            b=meta_raw["b"],
            analyzer_version=meta_raw["analyzer_version"],
        )

        terms_blob = (directory / "terms.bin").read_bytes()
        if terms_blob[:8] != _TERMS_MAGIC:
            raise IndexFormatError("terms.bin: bad magic")
        postings_blob = (directory / "postings.bin").read_bytes()
        if postings_blob[:8] != _POSTINGS_MAGIC:
            raise IndexFormatError("postings.bin: bad magic")
        payload = postings_blob[8:]

        (n_terms,) = struct.unpack_from("<I", terms_blob, 8)
        postings: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        pos = 12
        for _ in range(n_terms):
            (tlen,) = struct.unpack_from("<H", terms_blob, pos)
            pos += 2
            term = terms_blob[pos : pos + tlen].decode("utf-8")
            pos += tlen
            df, offset = struct.unpack_from("<IQ", terms_blob, pos)
            pos += 12
            pairs = np.frombuffer(payload, dtype="<u4", count=df * 2, offset=offset)
            pairs = pairs.reshape(df, 2).astype(np.int32)
            postings[term] = (
                np.ascontiguousarray(pairs[:, 0]),
                np.ascontiguousarray(pairs[:, 1]),
            )

        lengths_blob = (directory / "lengths.bin").read_bytes()
        if lengths_blob[:8] != _LENGTHS_MAGIC:
            raise IndexFormatError("lengths.bin: bad magic")
        (n,) = struct.unpack_from("<I", lengths_blob, 8)
        doc_lens = np.frombuffer(lengths_blob, dtype="<u4", count=n, offset=12).astype(
            np.int32
        )

        segments = []
        with open(directory / "segments.jsonl", "r", encoding="utf-8") as sf:
            for line in sf:
                if line.strip():
                    segments.append(Segment.from_dict(json.loads(line)))
        if len(segments) != meta.n_segments or len(doc_lens) != meta.n_segments:
            raise IndexFormatError("segment count mismatch across index files")
        return cls(meta, postings, doc_lens, segments)


def build_index(
    segments: Iterable[Segment],
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> InvertedIndex:
    """Build an in-memory index from a stream of same-granularity segments."""
    seg_list: list[Segment] = []
    doc_lens: list[int] = []
    # term -> list of (ordinal, tf); ordinals arrive in ascending order.
    table: dict[str, list[tuple[int, int]]] = {}
    granularity: Granularity | None = None

    for ordinal, segment in enumerate(segments):
        if granularity is None:
            granularity = segment.granularity
        elif segment.granularity is not granularity:
            raise IndexBuildError(
                f"mixed granularities: {granularity.value} and "
                f"{segment.granularity.value}"
            )
        tokens = analyze(segment.text)
        doc_lens.append(len(tokens))
        counts: dict[str, int] = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        for term, tf in counts.items():
            table.setdefault(term, []).append((ordinal, tf))
        seg_list.append(segment)

    if not seg_list:
        raise IndexBuildError("cannot build an index from zero segments")

    n = len(seg_list)
    total_tokens = sum(doc_lens)
    meta = IndexMeta(
        granularity=granularity,
        n_segments=n,
        avgdl=total_tokens / n if total_tokens else 1e-9,
        k1=k1,
        b=b,
    )
    postings = {
        term: (
            np.array([o for o, _ in plist], dtype=np.int32),
            np.array([tf for _, tf in plist], dtype=np.int32),
        )
        for term, plist in table.items()
    }
    return InvertedIndex(meta, postings, np.array(doc_lens, dtype=np.int32), seg_list)
