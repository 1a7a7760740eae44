"""HTTP service for interactive QA.

POST /ask     answer a question; the response carries the sentence
              containing the answer with highlight offsets, the fused
              score, and a retrieve/read latency split.
GET /health   index and reader status.
GET /metrics  rolling latency statistics over served requests.
/ui           static chat client, when a UI directory is configured.

Configuration comes from a JSON or TOML file plus environment
overrides (ODQA_PORT, ODQA_INDEX_DIR).  Every served /ask request is
appended to a JSONL request log when one is configured.
"""

from __future__ import annotations

import json
import math
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from fastapi import Body, FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles

from odqa.corpus import Granularity, Segment, sentence_spans
from odqa.index import InvertedIndex, SearchStatus
from odqa.pipeline import AnswerResult, PipelineConfig, RankedAnswer, answer
from odqa.reader import LexicalReader, Reader, ReaderTransportError
from odqa.sidecar import SidecarReader


@dataclass
class ServiceConfig:
    index_dir: str
    reader: str = "lexical"  # "lexical" | "sidecar"
    sidecar_target: str | None = None  # "host:port" or "cmd: ..."
    k: int = 10
    mu: float = 0.5
    port: int = 8000
    ui_dir: str | None = None
    request_log: str | None = None

    @classmethod
    def from_file(cls, path) -> "ServiceConfig":
        path = Path(path)
        if path.suffix == ".toml":
            raw = tomllib.loads(path.read_text("utf-8"))
        else:
            raw = json.loads(path.read_text("utf-8"))
        cfg = cls(**raw)
        return cfg.with_env_overrides()

    def with_env_overrides(self) -> "ServiceConfig":
        if "ODQA_PORT" in os.environ:
            self.port = int(os.environ["ODQA_PORT"])
        if "ODQA_INDEX_DIR" in os.environ:
            self.index_dir = os.environ["ODQA_INDEX_DIR"]
        return self


def make_reader(kind: str, index: InvertedIndex, sidecar_target: str | None) -> Reader:
    if kind == "lexical":
        return LexicalReader(index)
    if kind == "sidecar":
        if not sidecar_target:
            raise ValueError("sidecar reader requires a sidecar target")
        return SidecarReader(sidecar_target)
    raise ValueError(f"unknown reader kind {kind!r}")


def _percentile(sorted_values: list[float], q: float) -> float:
    """Nearest-rank percentile over presorted values."""
    idx = max(0, math.ceil(q * len(sorted_values)) - 1)
    return sorted_values[idx]


class LatencyTracker:
    """Thread-safe rolling latency records for /metrics."""

    _FIELDS = ("retrieve_ms", "read_ms", "total_ms")

    def __init__(self):
        self._lock = threading.Lock()
        self._records: list[dict] = []

    def record(self, retrieve_ms: float, read_ms: float, total_ms: float) -> None:
        with self._lock:
            self._records.append(
                {
                    "retrieve_ms": retrieve_ms,
                    "read_ms": read_ms,
                    "total_ms": total_ms,
                }
            )

    def summary(self) -> dict:
        with self._lock:
            records = list(self._records)
        out: dict = {"count": len(records)}
        for field in self._FIELDS:
            key = field[: -len("_ms")]
            if not records:
                out[key] = None
                continue
            values = sorted(r[field] for r in records)
            out[key] = {
                "mean": sum(values) / len(values),
                "p50": _percentile(values, 0.50),
                "p95": _percentile(values, 0.95),
            }
        return out


def _sentence_of_span(segment: Segment, ans: RankedAnswer) -> tuple[str, int, int]:
    """The sentence containing the answer span, with highlight offsets.

    A span crossing a sentence boundary attaches to its start sentence;
    the returned text is extended to the sentence containing the span's
    end so the highlight always covers the full answer.
    """
    span = ans.span
    if segment.granularity is Granularity.SENTENCE:
        return segment.text, span.char_start, span.char_end
    spans = sentence_spans(segment.text) or [(0, len(segment.text))]
    start_sent = next(
        (s for s in spans if s[0] <= span.char_start < s[1]), spans[0]
    )
    end = max(start_sent[1], span.char_end)
    # Snap the end to a sentence boundary when the span crosses one.
    for s, e in spans:
        if s <= span.char_end <= e:
            end = max(start_sent[1], e)
            break
    text = segment.text[start_sent[0] : end]
    return text, span.char_start - start_sent[0], span.char_end - start_sent[0]


def _find_answer_segment(result: AnswerResult, top: RankedAnswer) -> Segment:
    """Segment object the top span points into.

    For article-granularity runs the span references an on-the-fly
    paragraph cut of the retrieved article, so re-derive it.
    """
    from odqa.corpus import Article, segment_article

    for hit in result.retrieved:
        if hit.segment.segment_id == top.span.segment_id:
            return hit.segment
    for hit in result.retrieved:
        if hit.segment.granularity is Granularity.ARTICLE:
            article = Article(id=hit.segment.article_id, title="", text=hit.segment.text)
            for para in segment_article(article, Granularity.PARAGRAPH):
                if para.segment_id == top.span.segment_id:
                    return para
    raise RuntimeError(f"answer segment {top.span.segment_id} not found")


def create_app(config: ServiceConfig) -> FastAPI:
    app = FastAPI(title="odqa")
    try:
        index = InvertedIndex.load(config.index_dir)
        reader = make_reader(config.reader, index, config.sidecar_target)
    except (OSError, ValueError):
        index = None
        reader = None
    tracker = LatencyTracker()
    log_lock = threading.Lock()

    app.state.index = index
    app.state.reader = reader
    app.state.tracker = tracker
    app.state.config = config

    def log_request(entry: dict) -> None:
        if not config.request_log:
            return
        with log_lock:
            with open(config.request_log, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, ensure_ascii=False) + "\n")

    @app.get("/health")
    def health():
        return {
            "status": "ok",
            "index_loaded": index is not None,
            "reader_kind": reader.kind if reader is not None else None,
            "n_segments": index.n_segments if index is not None else 0,
        }

    @app.get("/metrics")
    def metrics():
        return tracker.summary()

    @app.post("/ask")
    def ask(payload: dict = Body(...)):
        if index is None:
            raise HTTPException(503, "index not loaded")
        question = payload.get("question")
        if not isinstance(question, str) or not question.strip():
            raise HTTPException(400, "question must be a nonempty string")
        k = payload.get("k", config.k)
        if not isinstance(k, int) or isinstance(k, bool) or k < 1:
            raise HTTPException(400, "k must be an integer >= 1")
        mu = payload.get("mu", config.mu)
        if not isinstance(mu, (int, float)) or isinstance(mu, bool) or not 0 <= mu <= 1:
            raise HTTPException(400, "mu must be a number in [0, 1]")
        granularity = payload.get("granularity", index.granularity.value)
        try:
            granularity = Granularity(granularity)
        except ValueError:
            raise HTTPException(400, f"unknown granularity {granularity!r}")
        if granularity is not index.granularity:
            raise HTTPException(
                400,
                f"index is built at {index.granularity.value} granularity, "
                f"cannot serve {granularity.value}",
            )

        cfg = PipelineConfig(granularity=granularity, k=k, mu=float(mu))
        t0 = time.perf_counter()
        try:
            result = answer(question, index, reader, cfg)
        except ReaderTransportError as e:
            raise HTTPException(503, f"reader unavailable: {e}")
        total_ms = (time.perf_counter() - t0) * 1000.0

        latency = {
            "retrieve_ms": result.retrieve_ms,
            "read_ms": result.read_ms,
            "total_ms": total_ms,
        }
        tracker.record(result.retrieve_ms, result.read_ms, total_ms)
        base = {
            "k": k,
            "mu": float(mu),
            "granularity": granularity.value,
            "latency": latency,
        }
        top = result.top
        if top is None:
            status = (
                "empty_query"
                if result.status is SearchStatus.EMPTY_QUERY
                else "no_answer"
            )
            log_request(
                {"ts": time.time(), "question": question, "status": status, **base}
            )
            return {"answer": None, "status": status, **base}

        segment = _find_answer_segment(result, top)
        sentence, hl_start, hl_end = _sentence_of_span(segment, top)
        response = {
            "answer": top.span.text,
            "sentence": sentence,
            "highlight": {"start": hl_start, "end": hl_end},
            "fused_score": top.fused_score,
            "segment_id": top.span.segment_id,
            "status": "ok",
            **base,
        }
        log_request({"ts": time.time(), "question": question, "status": "ok", **base})
        return response

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def run(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host="0.0.0.0", port=config.port)
