"""Counter-based random number generation (Philox4x32-10).

Every random draw consumed anywhere in the simulation engine is a pure
function of ``(seed, path_index, step_index, lane)``.  Nothing here keeps
generator state, so results are independent of batch size, chunking, worker
count and replay: advancing the same path twice yields bit-identical
increments, which the engine exploits (e.g. second passes that re-read a
path instead of storing it).

Layout of the counter space for one path stream:

* lane 0                      Brownian increments, one normal per step.
                              Step ``k`` uses component ``k & 1`` of the
                              Box-Muller pair generated at counter ``k >> 1``.
* lanes 1 .. 1+ceil(d/2)      coordinate increments for d-dimensional
                              drivers (Bessel norms).  Step ``k``, coordinate
                              ``j`` uses component ``j & 1`` of the pair at
                              counter ``k``, lane ``1 + (j >> 1)``.
* lanes >= MARK_LANE          per-path scalar marks (independent uniform
                              levels, tail-completion draws), one per
                              purpose id, counter 0.

The per-path 64-bit Philox key is derived from (seed, path_index) with a
SplitMix64-style mix, so distinct paths get unrelated streams.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_PHILOX_M0 = np.uint64(0xD2511F53)
_PHILOX_M1 = np.uint64(0xCD9E8D57)
_PHILOX_W0 = np.uint32(0x9E3779B9)
_PHILOX_W1 = np.uint32(0xBB67AE85)
_LOW32 = np.uint64(0xFFFFFFFF)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53
_TWO_PI = 6.283185307179586

# Base lane for per-path scalar marks; far above any coordinate lane.
MARK_LANE = 0x40000000

# Purpose ids for per-path marks.
PURPOSE_UNIFORM_LEVEL = 0      # independent level for Cox / T_S constructions
PURPOSE_TAIL_RETURN = 1        # does the pruned path return? (tail completion)
PURPOSE_TAIL_VALUE = 2         # law of the completed extremum


@njit(cache=True, inline="always")
def _philox4(k0, k1, c0, c1, c2, c3):
    """One Philox4x32-10 block: 4 uint32 of counter -> 4 uint32 of output."""
    for _ in range(10):
        p0 = _PHILOX_M0 * np.uint64(c0)
        p1 = _PHILOX_M1 * np.uint64(c2)
        hi0 = np.uint32(p0 >> np.uint64(32))
        lo0 = np.uint32(p0 & _LOW32)
        hi1 = np.uint32(p1 >> np.uint64(32))
        lo1 = np.uint32(p1 & _LOW32)
        c0 = np.uint32(hi1 ^ c1 ^ k0)
        c1 = lo1
        c2 = np.uint32(hi0 ^ c3 ^ k1)
        c3 = lo0
        k0 = np.uint32(k0 + _PHILOX_W0)
        k1 = np.uint32(k1 + _PHILOX_W1)
    return c0, c1, c2, c3


def philox4x32(key2, counter4):
    """Raw block access, used by the known-answer tests."""
    k0 = np.uint32(key2[0])
    k1 = np.uint32(key2[1])
    c0, c1, c2, c3 = (np.uint32(c) for c in counter4)
    return _philox4(k0, k1, c0, c1, c2, c3)


@njit(cache=True, inline="always")
def _u01(a, b):
    """Two uint32 words -> one double, strictly inside (0, 1)."""
    m = (np.uint64(a) << np.uint64(32)) | np.uint64(b)
    return (np.float64(m >> np.uint64(11)) + 0.5) * _INV53


@njit(cache=True, inline="always")
def _block(key, counter, lane):
    k0 = np.uint32(key & _LOW32)
    k1 = np.uint32(key >> np.uint64(32))
    c0 = np.uint32(counter & _LOW32)
    c1 = np.uint32(counter >> np.uint64(32))
    return _philox4(k0, k1, c0, c1, np.uint32(lane), np.uint32(0))


@njit(cache=True, inline="always")
def normal_pair(key, counter, lane):
    """Box-Muller pair at (key, counter, lane)."""
    x0, x1, x2, x3 = _block(key, np.uint64(counter), lane)
    u1 = _u01(x0, x1)
    u2 = _u01(x2, x3)
    r = np.sqrt(-2.0 * np.log(u1))
    return r * np.cos(_TWO_PI * u2), r * np.sin(_TWO_PI * u2)


@njit(cache=True, inline="always")
def bm_increment(key, step):
    """Standard normal driving step ``step`` of a one-dimensional path."""
    z0, z1 = normal_pair(key, np.uint64(step >> 1), 0)
    if (step & 1) == 0:
        return z0
    return z1


@njit(cache=True, inline="always")
def coord_increment(key, step, coord):
    """Standard normal for coordinate ``coord`` at step ``step`` (d-dim drivers)."""
    z0, z1 = normal_pair(key, np.uint64(step), 1 + (coord >> 1))
    if (coord & 1) == 0:
        return z0
    return z1


@njit(cache=True, inline="always")
def uniform_mark(key, purpose):
    """Per-path uniform(0,1) mark, independent of all increment lanes."""
    x0, x1, _x2, _x3 = _block(key, np.uint64(0), MARK_LANE + purpose)
    return _u01(x0, x1)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True, inline="always")
def stream_key(seed, path_index):
    """64-bit Philox key for path ``path_index`` under ``seed``."""
    a = _mix64(np.uint64(seed) + np.uint64(0x9E3779B97F4A7C15))
    b = np.uint64(path_index) * np.uint64(0xD1B54A32D192ED03)
    return _mix64(a ^ b)


@njit(cache=True)
def normals(key, n, lane=0):
    """First ``n`` lane-0 increments of a stream, as an array (test helper)."""
    out = np.empty(n)
    for k in range(n):
        out[k] = bm_increment(key, k)
    return out
