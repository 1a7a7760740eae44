"""End-to-end answer production.

Retrieve k segments, apply the reader according to the granularity rule
(article hits are re-cut into paragraphs and read paragraph by
paragraph; paragraph and sentence hits are read whole), fuse retriever
and reader scores by linear interpolation, and rank all candidates
globally.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Sequence

from odqa.corpus import Article, Granularity, Segment, segment_article
from odqa.index import InvertedIndex, SearchStatus
from odqa.reader import Reader, ReaderTransportError, SpanCandidate

MU_GRID = [round(i / 10, 1) for i in range(11)]


@dataclass(frozen=True)
class PipelineConfig:
    granularity: Granularity = Granularity.PARAGRAPH
    k: int = 10
    mu: float = 0.5
    top_spans_per_segment: int = 1
    # Optional per-query min-max normalization of both score columns
    # before fusing; off by default (raw-score fusion).
    normalize_scores: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0.0 <= self.mu <= 1.0:
            raise ValueError("mu must be in [0, 1]")
        if self.top_spans_per_segment < 1:
            raise ValueError("top_spans_per_segment must be >= 1")


@dataclass(frozen=True)
class RankedAnswer:
    span: SpanCandidate
    retriever_score: float
    fused_score: float
    source_rank: int  # retriever rank of the candidate's segment
    mu: float


@dataclass(frozen=True)
class AnswerResult:
    answers: list[RankedAnswer]
    status: SearchStatus = SearchStatus.OK
    retrieved: list = field(default_factory=list)  # RetrievedSegment hits
    retrieve_ms: float = 0.0
    read_ms: float = 0.0

    @property
    def top(self) -> RankedAnswer | None:
        return self.answers[0] if self.answers else None


def fuse(s_retriever: float, s_reader: float, mu: float) -> float:
    """Linear interpolation of retriever and reader scores.

    mu=0 returns the retriever score unchanged; mu=1 the reader score.
    """
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"mu must be in [0, 1], got {mu}")
    return (1.0 - mu) * s_retriever + mu * s_reader


def _minmax(values: Sequence[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0 for _ in values]
    return [(v - lo) / (hi - lo) for v in values]


@dataclass(frozen=True)
class _Candidate:
    span: SpanCandidate
    retriever_score: float
    source_rank: int


def gather_candidates(
    question: str,
    index: InvertedIndex,
    reader: Reader,
    cfg: PipelineConfig,
) -> AnswerResult:
    """Retrieve and read, producing unfused candidates (answers empty).

    Split out from answer() so callers that evaluate many mu values can
    retrieve and read once.  Transport errors identify the failing
    segment.
    """
    if index.granularity is not cfg.granularity:
        raise ValueError(
            f"index granularity {index.granularity.value} does not match "
            f"config granularity {cfg.granularity.value}"
        )
    t0 = time.perf_counter()
    result = index.retrieve(question, cfg.k)
    retrieve_ms = (time.perf_counter() - t0) * 1000.0
    if result.status is SearchStatus.EMPTY_QUERY:
        return AnswerResult([], result.status, [], retrieve_ms, 0.0)

    candidates: list[_Candidate] = []
    t1 = time.perf_counter()
    for hit in result.hits:
        try:
            if cfg.granularity is Granularity.ARTICLE:
                # Re-cut the retrieved article into paragraphs on the fly.
                article = Article(
                    id=hit.segment.article_id, title="", text=hit.segment.text
                )
                spans = []
                for para in segment_article(article, Granularity.PARAGRAPH):
                    spans.extend(
                        reader.read_spans(question, para, cfg.top_spans_per_segment)
                    )
            else:
                spans = reader.read_spans(
                    question, hit.segment, cfg.top_spans_per_segment
                )
        except ReaderTransportError as e:
            raise ReaderTransportError(
                f"reader failed on segment {hit.segment.segment_id}: {e}"
            ) from e
        for span in spans:
            candidates.append(_Candidate(span, hit.score, hit.rank))
    read_ms = (time.perf_counter() - t1) * 1000.0

    # Candidates ride in AnswerResult.answers with fused_score unset (0);
    # rank_candidates() produces the final ordering.
    raw = [
        RankedAnswer(c.span, c.retriever_score, 0.0, c.source_rank, -1.0)
        for c in candidates
    ]
    return AnswerResult(raw, result.status, result.hits, retrieve_ms, read_ms)


def rank_candidates(
    candidates: Sequence[RankedAnswer], mu: float, normalize_scores: bool = False
) -> list[RankedAnswer]:
    """Fuse and globally sort candidates for one mu value.

    Ties break by source_rank ascending, then reader score descending
    (so at mu=0 the best span of the top segment surfaces), then
    (char_start, char_end) ascending.
    """
    if not candidates:
        return []
    s_ret = [c.retriever_score for c in candidates]
    s_read = [c.span.reader_score for c in candidates]
    if normalize_scores:
        s_ret = _minmax(s_ret)
        s_read = _minmax(s_read)
    fused = [
        RankedAnswer(c.span, c.retriever_score, fuse(a, b, mu), c.source_rank, mu)
        for c, a, b in zip(candidates, s_ret, s_read)
    ]
    fused.sort(
        key=lambda r: (
            -r.fused_score,
            r.source_rank,
            -r.span.reader_score,
            r.span.char_start,
            r.span.char_end,
        )
    )
    return fused


def answer(
    question: str,
    index: InvertedIndex,
    reader: Reader,
    cfg: PipelineConfig | None = None,
) -> AnswerResult:
    """Full pipeline: retrieve, read, fuse, rank."""
    cfg = cfg or PipelineConfig()
    gathered = gather_candidates(question, index, reader, cfg)
    ranked = rank_candidates(gathered.answers, cfg.mu, cfg.normalize_scores)
    return AnswerResult(
        ranked,
        gathered.status,
        gathered.retrieved,
        gathered.retrieve_ms,
        gathered.read_ms,
    )


def tune_mu(
    qa_sample: Sequence[tuple[str, Sequence[str]]],
    index: InvertedIndex,
    reader: Reader,
    k: int,
    granularity: Granularity | None = None,
    top_spans_per_segment: int = 1,
) -> float:
    """Pick the interpolation weight maximizing top-1 exact match.

    Evaluates all eleven tenth-increment values; ties go to the
    smallest.  Retrieval and reading run once per question; only the
    fusion step is repeated per grid point.
    """
    from odqa.evaluation import exact_match

    if not qa_sample:
        raise ValueError("qa_sample must be nonempty")
    cfg = PipelineConfig(
        granularity=granularity or index.granularity,
        k=k,
        top_spans_per_segment=top_spans_per_segment,
    )
    per_question = [
        (gather_candidates(question, index, reader, cfg).answers, golds)
        for question, golds in qa_sample
    ]
    best_mu, best_em = 0.0, -1.0
    for mu in MU_GRID:
        hits = 0
        for candidates, golds in per_question:
            ranked = rank_candidates(candidates, mu)
            if ranked and exact_match(ranked[0].span.text, list(golds)):
                hits += 1
        em = hits / len(per_question)
        if em > best_em:
            best_mu, best_em = mu, em
    return best_mu


def sample_qa_pairs(
    pairs: Sequence[tuple[str, Sequence[str]]], n: int, seed: int = 13
) -> list[tuple[str, Sequence[str]]]:
    """Seeded random sample (without replacement) for mu tuning."""
    if n >= len(pairs):
        return list(pairs)
    return random.Random(seed).sample(list(pairs), n)
