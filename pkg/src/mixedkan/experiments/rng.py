"""Counter-based random streams keyed by (seed, sample index).

Samples are drawn in blocks of BLOCK indices; block j of stream s uses the
Philox key (seed, s * 2**40 + j), so the draw for a given sample index does
not depend on how work is split between workers or on evaluation order.
"""

import os

import numpy as np

BLOCK = 1024
_MASK = (1 << 64) - 1


def _generator(seed, stream, block):
    key = np.array([int(seed) & _MASK, ((int(stream) << 40) + int(block)) & _MASK], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def uniforms(seed, indices, dim, stream=0):
    """Array (len(indices), dim) of U[0,1) draws; row i depends only on
    (seed, stream, indices[i])."""
    indices = np.asarray(indices, dtype=np.int64)
    out = np.empty((len(indices), dim))
    if len(indices) == 0:
        return out
    blocks = indices // BLOCK
    for b in np.unique(blocks):
        rows = blocks == b
        table = _generator(seed, stream, b).random((BLOCK, dim))
        out[rows] = table[indices[rows] % BLOCK]
    return out


def sample_range(seed, start, count, dim, stream=0):
    return uniforms(seed, np.arange(start, start + count), dim, stream)


def worker_count():
    """Worker processes for sample-parallel experiments (MIXEDKAN_WORKERS)."""
    raw = os.environ.get("MIXEDKAN_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
