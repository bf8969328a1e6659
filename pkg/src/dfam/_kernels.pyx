# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled signature-matching kernels.

Same contract as _kernels_py: signatures stacked int32 rows of s*g entries,
contiguous per-activity blocks given by act_starts. The inner comparison
early-exits on the first differing bin, which is where the speedup over the
vectorized fallback comes from.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef inline int _match_count(const int* test, const int* row, int s, int g) nogil:
    cdef int k, j, m = 0
    cdef bint same
    for k in range(s):
        same = True
        for j in range(g):
            if test[k * g + j] != row[k * g + j]:
                same = False
                break
        if same:
            m += 1
    return m


def aggregate_scores(cnp.ndarray[cnp.int32_t, ndim=1] test,
                     cnp.ndarray[cnp.int32_t, ndim=2] sigs,
                     cnp.ndarray[cnp.int32_t, ndim=1] act_starts,
                     int s, int g,
                     cnp.ndarray[cnp.float64_t, ndim=1] lut):
    cdef int n_act = act_starts.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(n_act)
    cdef int a, i
    cdef double acc
    cdef const int* tp = <const int*> test.data
    with nogil:
        for a in range(n_act):
            acc = 0.0
            for i in range(act_starts[a], act_starts[a + 1]):
                acc += lut[_match_count(tp, <const int*> sigs.data + i * sigs.shape[1], s, g)]
            out[a] = acc
    return out


def aggregate_scores_batch(cnp.ndarray[cnp.int32_t, ndim=2] tests,
                           cnp.ndarray[cnp.int32_t, ndim=2] sigs,
                           cnp.ndarray[cnp.int32_t, ndim=1] act_starts,
                           int s, int g,
                           cnp.ndarray[cnp.float64_t, ndim=1] lut):
    cdef int n_act = act_starts.shape[0] - 1
    cdef int t = tests.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((t, n_act))
    cdef int w, a, i
    cdef double acc
    cdef const int* tp
    with nogil:
        for w in range(t):
            tp = <const int*> tests.data + w * tests.shape[1]
            for a in range(n_act):
                acc = 0.0
                for i in range(act_starts[a], act_starts[a + 1]):
                    acc += lut[_match_count(tp, <const int*> sigs.data + i * sigs.shape[1], s, g)]
                out[w, a] = acc
    return out
