"""Reference detectors for non-stopping random times on sampled paths.

These operate on whole value arrays and are deliberately plain: they are
the readable specification of what the streaming kernels compute with
O(1) state, and the unit tests check the two agree index for index.

Conventions, used consistently everywhere:

* a "touch" of a level from above means value <= level (from below,
  value >= level); index 0 counts when the path starts on the level,
* sup over an empty set of touch times is index 0,
* times of the form sup{t < L: condition} are resolved strictly before
  the index of L,
* crossings of a comparison curve are bracketed between consecutive
  indices and reported at the right endpoint; an exact tie is a crossing
  at its own index, and index 0 (where both curves start at 1) always is.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class InvalidDelta(ValueError):
    """Comparison curve is not a decreasing curve started at 1."""


class ClockIncomplete(RuntimeError):
    """An increasing clock never reaches the requested height."""


@dataclass(frozen=True)
class TimeDetection:
    """A detected random time: grid index plus the path value there."""

    index: int
    value: float

    def time(self, dt: float) -> float:
        return self.index * dt


def last_passage(values: np.ndarray, level: float, from_above: bool = True) -> TimeDetection:
    """Last index at which the path touches ``level``.

    ``from_above`` touches are value <= level; otherwise value >= level.
    Returns index 0 when the path never touches the level.
    """
    v = np.asarray(values, dtype=float)
    hits = np.nonzero(v <= level if from_above else v >= level)[0]
    if hits.size == 0:
        return TimeDetection(0, float(v[0]))
    k = int(hits[-1])
    return TimeDetection(k, float(v[k]))


def detect_inf_rho(z_values: np.ndarray, l_idx: int) -> TimeDetection:
    """Last attainment of the running infimum of Z strictly before ``l_idx``.

    For a decreasing Z this is ``l_idx - 1``; in general it is the last
    index k < l_idx with Z_k equal to min(Z_0..Z_k).
    """
    z = np.asarray(z_values, dtype=float)
    if l_idx <= 0:
        return TimeDetection(0, float(z[0]))
    head = z[:l_idx]
    attained = np.nonzero(head <= np.minimum.accumulate(head))[0]
    k = int(attained[-1])
    return TimeDetection(k, float(head[k]))


def detect_delta_rho(z_values: np.ndarray, delta_values: np.ndarray,
                     l_idx: int) -> TimeDetection:
    """Last crossing of Z with the decreasing curve delta, up to ``l_idx``.

    Raises InvalidDelta unless delta starts at 1 and is nonincreasing.
    Both curves start at 1, so index 0 is always a crossing.
    """
    z = np.asarray(z_values, dtype=float)
    d = np.asarray(delta_values, dtype=float)
    if d.shape[0] < z.shape[0]:
        raise InvalidDelta("comparison curve shorter than the path")
    if d[0] != 1.0:
        raise InvalidDelta("comparison curve must start at 1")
    if np.any(np.diff(d) > 0.0):
        raise InvalidDelta("comparison curve must be nonincreasing")
    last = 0
    f_prev = z[0] - d[0]
    for k in range(1, l_idx + 1):
        f = z[k] - d[k]
        if f == 0.0 or ((f > 0.0) != (f_prev > 0.0) and f_prev != 0.0):
            last = k
        f_prev = f
    return TimeDetection(last, float(z[last]))


def cox_time(values: np.ndarray, horizon_idx: int, level: float = 0.0,
             from_above: bool = True) -> TimeDetection:
    """Last touch of ``level`` before an independent horizon index."""
    cut = np.asarray(values, dtype=float)[: horizon_idx + 1]
    return last_passage(cut, level, from_above)


def alpha_inverse(clock_values: np.ndarray, height: float) -> TimeDetection:
    """First index at which a nondecreasing clock reaches ``height``."""
    a = np.asarray(clock_values, dtype=float)
    hits = np.nonzero(a >= height)[0]
    if hits.size == 0:
        raise ClockIncomplete(
            f"clock tops out at {a[-1]:.6g} < requested {height:.6g}")
    k = int(hits[0])
    return TimeDetection(k, float(a[k]))


@dataclass(frozen=True)
class AdditiveClock:
    """A continuous nondecreasing clock sampled on the grid.

    For the first-hit construction the clock is the running max stopped at
    the hit of 1, so its terminal value is 1 and its right inverse at a
    uniform height reproduces the random time of interest.
    """

    values: np.ndarray
    dt: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.size == 0:
            raise ValueError("empty clock")
        if np.any(np.diff(v) < 0.0):
            raise ValueError("clock must be nondecreasing")
        object.__setattr__(self, "values", v)

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    def inverse(self, height: float) -> TimeDetection:
        return alpha_inverse(self.values, height)


@dataclass(frozen=True)
class SupermartingaleTrack:
    """The decreasing projection Z = 1 - clock attached to a random time.

    Only sanity structure is enforced here (values in [0, 1], start at 1);
    the probabilistic content is what the checks verify.
    """

    z_values: np.ndarray
    dt: float

    def __post_init__(self):
        z = np.asarray(self.z_values, dtype=float)
        if z[0] != 1.0:
            raise ValueError("Z must start at 1")
        if np.any(z < -1e-12) or np.any(z > 1.0 + 1e-12):
            raise ValueError("Z must stay in [0, 1]")
        object.__setattr__(self, "z_values", z)

    def inf_time(self, l_idx: int) -> TimeDetection:
        return detect_inf_rho(self.z_values, l_idx)

    def curve_time(self, delta_values: np.ndarray, l_idx: int) -> TimeDetection:
        return detect_delta_rho(self.z_values, delta_values, l_idx)


def silly_time(b_half: float, b_full: float, dt: float, half_idx: int) -> int:
    """Grid index of 1 / (1 + |B_2T - B_T|), snapped to the nearest step.

    Built from the increment over the second half of the window, so it is
    independent of the path up to time T while taking values in (0, T].
    """
    rho = 1.0 / (1.0 + abs(b_full - b_half))
    snap = int(round(rho / dt))
    return min(snap, half_idx)


def enlarged_ratio_track(s_values: np.ndarray, b_values: np.ndarray,
                         l_idx: int) -> float:
    """Largest one-step increase of (1 - S) / (1 - B+) before ``l_idx``.

    The ratio is the candidate decreasing factorisation of the
    supermartingale attached to the last-max time; a strictly positive
    return value witnesses that it fails to be monotone.
    """
    s = np.asarray(s_values, dtype=float)[: l_idx + 1]
    bp = np.maximum(np.asarray(b_values, dtype=float)[: l_idx + 1], 0.0)
    ratio = (1.0 - s) / (1.0 - bp)
    if ratio.size < 2:
        return 0.0
    return float(np.max(np.diff(ratio), initial=0.0))
