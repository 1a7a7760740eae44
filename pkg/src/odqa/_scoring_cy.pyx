# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled BM25 accumulation kernel.

Must stay expression-for-expression identical to ``_scoring_py.py`` so
both backends produce bit-equal scores.
"""

BACKEND = "cython"


def accumulate_term(double[::1] scores, int[::1] ordinals, int[::1] tfs,
                    double[::1] norms, double idf, double k1):
    cdef Py_ssize_t i, d
    cdef double tf
    cdef double k1p1 = k1 + 1.0
    for i in range(ordinals.shape[0]):
        d = ordinals[i]
        tf = <double> tfs[i]
        scores[d] += idf * tf * k1p1 / (tf + norms[d])
