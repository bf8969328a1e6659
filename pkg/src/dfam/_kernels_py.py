"""NumPy implementation of the signature-matching kernels.

Fallback used when the compiled extension is unavailable; semantics are
identical. Signatures are stacked row-wise as int32 with one row per
training instance, s*g entries per row, grouped into contiguous per-activity
blocks described by ``act_starts`` (length n_activities + 1).
"""

import numpy as np

_CHUNK = 256  # test windows per block, bounds the boolean temp


def aggregate_scores(test, sigs, act_starts, s, g, lut):
    """Per-activity sums of lut[m], m = axes of sigs matching ``test`` exactly."""
    eq = (sigs.reshape(-1, s, g) == test.reshape(s, g)).all(axis=2)
    scores = lut[eq.sum(axis=1)]
    n_act = act_starts.shape[0] - 1
    out = np.empty(n_act)
    for a in range(n_act):
        out[a] = scores[act_starts[a]:act_starts[a + 1]].sum()
    return out


def aggregate_scores_batch(tests, sigs, act_starts, s, g, lut):
    """aggregate_scores for many test signatures at once; rows align with tests."""
    n_act = act_starts.shape[0] - 1
    t = tests.shape[0]
    sig3 = sigs.reshape(-1, s, g)
    out = np.empty((t, n_act))
    for i in range(0, t, _CHUNK):
        block = tests[i:i + _CHUNK].reshape(-1, 1, s, g)
        eq = (sig3[np.newaxis] == block).all(axis=3)
        scores = lut[eq.sum(axis=2)]
        for a in range(n_act):
            out[i:i + _CHUNK, a] = scores[:, act_starts[a]:act_starts[a + 1]].sum(axis=1)
    return out
