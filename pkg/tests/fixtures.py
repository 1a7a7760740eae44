"""Shared fixture builders and independent oracles.

The BM25 oracle here deliberately uses no inverted-index structures:
it tokenizes every document, counts frequencies with Counter, and
evaluates the scoring formula directly, so it can't share a bug with
the posting-list kernel it checks.
"""

from __future__ import annotations

import math
import random
from collections import Counter

from odqa.analysis import analyze
from odqa.corpus import Article


def bm25_oracle_scores(
    doc_texts: list[str], question: str, k1: float = 0.9, b: float = 0.4
) -> list[float]:
    """Brute-force BM25 scores for every document."""
    docs = [analyze(t) for t in doc_texts]
    counters = [Counter(d) for d in docs]
    n = len(docs)
    avgdl = sum(len(d) for d in docs) / n
    terms = list(dict.fromkeys(analyze(question)))
    scores = []
    for doc, counts in zip(docs, counters):
        dl = len(doc)
        score = 0.0
        for t in terms:
            tf = counts.get(t, 0)
            if tf == 0:
                continue
            df = sum(1 for c in counters if t in c)
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * dl / avgdl))
        scores.append(score)
    return scores


def bm25_oracle_rank(
    doc_texts: list[str], question: str, k: int, k1: float = 0.9, b: float = 0.4
) -> list[tuple[int, float]]:
    """(ordinal, score) for the top-k positive-scoring documents,
    sorted by score descending then ordinal ascending."""
    scores = bm25_oracle_scores(doc_texts, question, k1, b)
    ranked = sorted(
        ((i, s) for i, s in enumerate(scores) if s > 0.0),
        key=lambda x: (-x[1], x[0]),
    )
    return ranked[:k]


_FILLER = [f"walnut{i}" for i in range(400)]


def _filler_sentence(rng: random.Random) -> str:
    words = rng.sample(_FILLER, rng.randint(5, 9))
    return words[0].capitalize() + " " + " ".join(words[1:]) + "."


def make_planted_corpus(
    n_articles: int = 200, n_qa: int = 50, seed: int = 7
) -> tuple[list[Article], list[tuple[str, str, list[str]]]]:
    """Mini-corpus with uniquely answerable planted QA pairs.

    Article i (for i < n_qa) contains one paragraph starting with the
    planted sentence 'The subject<i>qq of object<i>qq was revealed by
    Answerion<i>.'; the question reuses that exact wording so the
    non-stopword question terms are unique to that paragraph.  All other
    paragraphs are filler distractors.

    Returns (articles, qa) with qa entries (qid, question, gold_answers).
    """
    rng = random.Random(seed)
    articles = []
    qa = []
    for i in range(n_articles):
        paragraphs = []
        n_paras = rng.randint(2, 4)
        planted_at = rng.randrange(n_paras) if i < n_qa else -1
        for p in range(n_paras):
            if p == planted_at:
                subj, obj, ans = f"subject{i}qq", f"object{i}qq", f"Answerion{i}"
                planted = f"The {subj} of {obj} was revealed by {ans}."
                paragraphs.append(planted + " " + _filler_sentence(rng))
                qa.append(
                    (
                        f"q{i}",
                        f"Who was the {subj} of {obj} revealed by?",
                        [ans],
                    )
                )
            else:
                sents = " ".join(_filler_sentence(rng) for _ in range(rng.randint(2, 4)))
                paragraphs.append(sents)
        articles.append(
            Article(id=f"art{i}", title=f"Article {i}", text="\n\n".join(paragraphs))
        )
    return articles, qa


def make_random_corpus(
    n_docs: int, seed: int = 3, vocab_size: int = 120
) -> list[str]:
    """Random bag-of-words documents for oracle-equivalence checks."""
    rng = random.Random(seed)
    vocab = [f"term{i}" for i in range(vocab_size)]
    docs = []
    for _ in range(n_docs):
        length = rng.randint(3, 40)
        docs.append(" ".join(rng.choice(vocab) for _ in range(length)))
    return docs


def random_questions(n: int, seed: int = 11, vocab_size: int = 120) -> list[str]:
    rng = random.Random(seed)
    vocab = [f"term{i}" for i in range(vocab_size)]
    out = []
    for _ in range(n):
        out.append(" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 5))))
    return out
