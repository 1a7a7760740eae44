"""SQuAD-style evaluation: EM, token-level F1, segment recall, top-k EM,
k-sweep curves, gap analysis, and latency accounting."""

from __future__ import annotations

import csv
import json
import re
import string
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from odqa.index import InvertedIndex
from odqa.pipeline import PipelineConfig, gather_candidates, rank_candidates
from odqa.reader import Reader

_PUNCT = set(string.punctuation)
_ARTICLES_RE = re.compile(r"\b(a|an|the)\b")


@dataclass(frozen=True)
class QAExample:
    qid: str
    question: str
    gold_answers: list[str]

    def __post_init__(self):
        if not self.gold_answers:
            raise ValueError(f"question {self.qid!r} has no gold answers")


@dataclass(frozen=True)
class CurvePoint:
    k: int
    recall: float
    top_k_em: float
    top_1_em: float


@dataclass
class QuestionRecord:
    qid: str
    em: int
    f1: float
    recall: int
    top_k_em: int
    answer: str | None
    retrieve_ms: float
    read_ms: float
    error: str | None = None


@dataclass
class EvalReport:
    em: float
    f1: float
    recall: float
    top_k_em: float
    k: int
    mu: float
    per_question: list[QuestionRecord]
    latency: dict = field(default_factory=dict)  # retrieve_ms_avg, read_ms_avg

    def to_dict(self) -> dict:
        return {
            "em": self.em,
            "f1": self.f1,
            "recall": self.recall,
            "top_k_em": self.top_k_em,
            "k": self.k,
            "mu": self.mu,
            "latency": self.latency,
            "per_question": [vars(r) for r in self.per_question],
        }


def normalize_answer(s: str) -> str:
    """Lowercase, strip punctuation, drop articles, collapse whitespace."""
    s = s.lower()
    s = "".join(ch for ch in s if ch not in _PUNCT)
    s = _ARTICLES_RE.sub(" ", s)
    return " ".join(s.split())


def exact_match(pred: str, golds: Sequence[str]) -> int:
    """1 iff the normalized prediction equals some normalized gold."""
    norm_pred = normalize_answer(pred)
    return int(any(norm_pred == normalize_answer(g) for g in golds))


def _f1_single(pred: str, gold: str) -> float:
    pred_tokens = normalize_answer(pred).split()
    gold_tokens = normalize_answer(gold).split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def f1_score(pred: str, golds: Sequence[str]) -> float:
    """Max over golds of token-multiset F1."""
    return max(_f1_single(pred, g) for g in golds)


def _contains_sublist(haystack: list[str], needle: list[str]) -> bool:
    if not needle:
        return False
    n = len(needle)
    for i in range(len(haystack) - n + 1):
        if haystack[i : i + n] == needle:
            return True
    return False


def segment_recall(golds: Sequence[str], segments) -> int:
    """1 iff some normalized gold occurs as a token-boundary substring of
    some segment's normalized text."""
    gold_token_lists = [normalize_answer(g).split() for g in golds]
    for segment in segments:
        seg_tokens = normalize_answer(segment.text).split()
        for gold_tokens in gold_token_lists:
            if _contains_sublist(seg_tokens, gold_tokens):
                return 1
    return 0


def load_squad(path) -> list[QAExample]:
    """Read SQuAD v1.1 JSON; passage contexts are ignored."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    examples = []
    seen = set()
    for article in raw["data"]:
        for paragraph in article["paragraphs"]:
            for qa in paragraph["qas"]:
                qid = qa["id"]
                if qid in seen:
                    raise ValueError(f"duplicate question id {qid!r}")
                seen.add(qid)
                examples.append(
                    QAExample(
                        qid=qid,
                        question=qa["question"],
                        gold_answers=[a["text"] for a in qa["answers"]],
                    )
                )
    return examples


@dataclass
class _QuestionOutcome:
    """Everything needed to score one question at any k prefix."""

    qid: str
    golds: list[str]
    # Per retrieved segment, in rank order: the segment and its candidates.
    segments: list
    candidates: list  # RankedAnswer list (unfused), source_rank set
    retrieve_ms: float
    read_ms: float
    error: str | None = None


def _run_question(
    example: QAExample, index: InvertedIndex, reader: Reader, cfg: PipelineConfig
) -> _QuestionOutcome:
    try:
        gathered = gather_candidates(example.question, index, reader, cfg)
    except Exception as e:
        return _QuestionOutcome(example.qid, example.gold_answers, [], [], 0.0, 0.0, str(e))
    return _QuestionOutcome(
        qid=example.qid,
        golds=example.gold_answers,
        segments=[hit.segment for hit in gathered.retrieved],
        candidates=gathered.answers,
        retrieve_ms=gathered.retrieve_ms,
        read_ms=gathered.read_ms,
    )


def _score_at_k(outcome: _QuestionOutcome, k: int, mu: float) -> QuestionRecord:
    if outcome.error is not None:
        return QuestionRecord(
            outcome.qid, 0, 0.0, 0, 0, None, 0.0, 0.0, outcome.error
        )
    segments = outcome.segments[:k]
    candidates = [c for c in outcome.candidates if c.source_rank <= k]
    rec = segment_recall(outcome.golds, segments)
    topk = int(any(exact_match(c.span.text, outcome.golds) for c in candidates))
    ranked = rank_candidates(candidates, mu)
    if ranked:
        top_text = ranked[0].span.text
        em = exact_match(top_text, outcome.golds)
        f1 = f1_score(top_text, outcome.golds)
    else:
        top_text, em, f1 = None, 0, 0.0
    return QuestionRecord(
        outcome.qid, em, f1, rec, topk, top_text,
        outcome.retrieve_ms, outcome.read_ms,
    )


def _run_all(
    dataset: Sequence[QAExample],
    index: InvertedIndex,
    reader: Reader,
    cfg: PipelineConfig,
    workers: int = 1,
) -> list[_QuestionOutcome]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(
                pool.map(lambda ex: _run_question(ex, index, reader, cfg), dataset)
            )
    return [_run_question(ex, index, reader, cfg) for ex in dataset]


def evaluate(
    dataset: Sequence[QAExample],
    index: InvertedIndex,
    reader: Reader,
    cfg: PipelineConfig | None = None,
    workers: int = 1,
) -> EvalReport:
    """Aggregate EM / F1 / recall / top-k EM and mean phase latencies.

    Per-question pipeline errors are recorded on the question's record
    (scored 0) and the run continues.
    """
    if not dataset:
        raise ValueError("dataset must be nonempty")
    cfg = cfg or PipelineConfig()
    outcomes = _run_all(dataset, index, reader, cfg, workers)
    records = [_score_at_k(o, cfg.k, cfg.mu) for o in outcomes]
    n = len(records)
    return EvalReport(
        em=sum(r.em for r in records) / n,
        f1=sum(r.f1 for r in records) / n,
        recall=sum(r.recall for r in records) / n,
        top_k_em=sum(r.top_k_em for r in records) / n,
        k=cfg.k,
        mu=cfg.mu,
        per_question=records,
        latency={
            "retrieve_ms_avg": sum(r.retrieve_ms for r in records) / n,
            "read_ms_avg": sum(r.read_ms for r in records) / n,
        },
    )


def sweep_k(
    dataset: Sequence[QAExample],
    index: InvertedIndex,
    reader: Reader,
    mu: float,
    k_max: int,
    granularity=None,
    top_spans_per_segment: int = 1,
    workers: int = 1,
) -> list[CurvePoint]:
    """One curve point per k in 1..k_max from a single k_max-deep run.

    Retrieval at depth k is a prefix of retrieval at depth k_max, so
    each question is retrieved and read once.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    cfg = PipelineConfig(
        granularity=granularity or index.granularity,
        k=k_max,
        mu=mu,
        top_spans_per_segment=top_spans_per_segment,
    )
    outcomes = _run_all(dataset, index, reader, cfg, workers)
    n = len(outcomes)
    points = []
    for k in range(1, k_max + 1):
        records = [_score_at_k(o, k, mu) for o in outcomes]
        points.append(
            CurvePoint(
                k=k,
                recall=sum(r.recall for r in records) / n,
                top_k_em=sum(r.top_k_em for r in records) / n,
                top_1_em=sum(r.em for r in records) / n,
            )
        )
    return points


def gap_analysis(points: Sequence[CurvePoint]) -> list[dict]:
    """Decompose headroom at each k.

    retriever_gap: questions with no relevant segment retrieved.
    reader_gap: relevant segment retrieved but no correct span anywhere.
    aggregation_gap: correct span found but not ranked top-1.
    """
    return [
        {
            "k": p.k,
            "retriever_gap": 1.0 - p.recall,
            "reader_gap": p.recall - p.top_k_em,
            "aggregation_gap": p.top_k_em - p.top_1_em,
        }
        for p in points
    ]


def write_curve_csv(points: Sequence[CurvePoint], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "recall", "top_k_em", "top_1_em"])
        for p in points:
            writer.writerow([p.k, p.recall, p.top_k_em, p.top_1_em])
