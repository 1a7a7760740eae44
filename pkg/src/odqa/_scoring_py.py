"""Pure-Python BM25 accumulation kernel (fallback for the compiled core).

Arithmetic here must stay expression-for-expression identical to
``_scoring_cy.pyx`` so both backends produce bit-equal scores.
"""

from __future__ import annotations

BACKEND = "python"


def accumulate_term(scores, ordinals, tfs, norms, idf: float, k1: float) -> None:
    """Add one query term's BM25 contribution into ``scores`` in place.

    scores: float64 array of length N
    ordinals, tfs: parallel posting arrays for the term
    norms: per-document k1 * (1 - b + b * dl / avgdl)
    """
    k1p1 = k1 + 1.0
    for i in range(len(ordinals)):
        d = ordinals[i]
        tf = float(tfs[i])
        scores[d] += idf * tf * k1p1 / (tf + norms[d])
