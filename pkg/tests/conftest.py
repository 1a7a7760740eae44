import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fixtures import make_planted_corpus  # noqa: E402

from odqa.corpus import Granularity, segment_article  # noqa: E402
from odqa.index import build_index  # noqa: E402
from odqa.reader import LexicalReader  # noqa: E402

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def planted():
    """(articles, qa) mini-corpus with 50 planted QA pairs."""
    return make_planted_corpus(n_articles=200, n_qa=50, seed=7)


def _build(articles, granularity):
    segments = []
    for a in articles:
        segments.extend(segment_article(a, granularity))
    return build_index(iter(segments))


@pytest.fixture(scope="session")
def planted_para_index(planted):
    return _build(planted[0], Granularity.PARAGRAPH)


@pytest.fixture(scope="session")
def planted_article_index(planted):
    return _build(planted[0], Granularity.ARTICLE)


@pytest.fixture(scope="session")
def planted_reader(planted_para_index):
    return LexicalReader(planted_para_index)
