"""Open-domain question answering over a text corpus.

BM25 retrieval at article/paragraph/sentence granularity, pluggable
answer-span readers, linear score fusion, SQuAD-style evaluation, and
an HTTP service with a bundled chat UI.
"""

from odqa.corpus import Article, Granularity, Segment, segment_article
from odqa.index import InvertedIndex, build_index
from odqa.pipeline import PipelineConfig, answer, fuse, tune_mu
from odqa.reader import LexicalReader, SpanCandidate
from odqa.scoring import BACKEND as SCORING_BACKEND

__version__ = "0.1.0"

__all__ = [
    "Article",
    "Granularity",
    "Segment",
    "segment_article",
    "InvertedIndex",
    "build_index",
    "PipelineConfig",
    "answer",
    "fuse",
    "tune_mu",
    "LexicalReader",
    "SpanCandidate",
    "SCORING_BACKEND",
    "__version__",
]
