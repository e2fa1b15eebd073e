"""Uniform-grid path generation and streaming extremum/zero tracking.

Continuous-time processes are simulated on a uniform grid of mesh ``dt``
with at most ``max_steps`` steps per path; every random-time detection in
this package is grid-valued.  Conventions used throughout:

* a *zero touch* of a path started at 0 is any grid index with value <= 0
  (index 0 itself counts);
* an *upward hit* of ``level`` is the first grid index with value >= level
  (downward: <= level);
* the running maximum is *attained* at index k when value_k >= current max
  (so every new maximum moves the attainment index).

Detection error is O(sqrt(dt)) for extremum-value marks and O(dt) for
crossing times; checks targeting continuous-time laws either run at a mesh
where this is negligible or apply the explicit undersampling correction
``extremum_undersampling(dt)`` (the sampled extremum of a unit-volatility
path undershoots the continuous one by about 0.5826*sqrt(dt) on average).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from numba import njit

from .rng import bm_increment, coord_increment, stream_key

# Mean undershoot of a discretely sampled extremum, in units of vol*sqrt(dt):
# the Asmussen-Glynn-Pitman constant -zeta(1/2)/sqrt(2*pi).
EXTREMUM_MISS_COEFF = 0.5826


def extremum_undersampling(dt: float, vol: float = 1.0) -> float:
    """Expected gap between the continuous extremum and its grid sample."""
    return EXTREMUM_MISS_COEFF * vol * math.sqrt(dt)


class ProcessKind(Enum):
    BROWNIAN = "brownian"
    BESSEL = "bessel"
    DRIFTED = "drifted"


@dataclass(frozen=True)
class TimeGrid:
    dt: float
    max_steps: int

    def __post_init__(self):
        if self.dt <= 0 or self.max_steps <= 0:
            raise ValueError("need dt > 0 and max_steps > 0")

    @property
    def sqrt_dt(self) -> float:
        return math.sqrt(self.dt)

    @property
    def horizon(self) -> float:
        return self.dt * self.max_steps

    def time(self, index: int) -> float:
        return index * self.dt


@dataclass(frozen=True)
class GridTime:
    """A grid-valued time: index on a specific grid."""

    index: int
    dt: float

    @property
    def time(self) -> float:
        return self.index * self.dt


@dataclass(frozen=True)
class StreamKey:
    """Identifies one path stream; the Philox key is derived, never stored state."""

    seed: int
    path_index: int

    @property
    def key(self) -> np.uint64:
        return stream_key(self.seed, self.path_index)


@dataclass
class PathCursor:
    """Streaming state of one path: current value plus O(1) detector state.

    No path history is kept; anything that needs to re-read a path replays
    the counter-based stream instead.
    """

    kind: ProcessKind
    value: float = 0.0
    step_index: int = 0
    running_max: float = 0.0
    running_min: float = 0.0
    last_max_attain_index: int = 0
    last_min_attain_index: int = 0
    last_nonpositive_index: int | None = None
    truncated: bool = False
    # process parameters
    mu: float = 0.0
    sigma: float = 1.0
    ndim: int = 3
    coords: np.ndarray | None = None

    def __post_init__(self):
        self.running_max = self.value
        self.running_min = self.value
        if self.value <= 0.0 and self.kind is not ProcessKind.BESSEL:
            self.last_nonpositive_index = 0
        if self.kind is ProcessKind.BESSEL and self.coords is None:
            c = np.zeros(self.ndim)
            c[0] = self.value
            self.coords = c


def inject_step(cursor: PathCursor, grid: TimeGrid, z) -> PathCursor:
    """Apply one step with externally supplied standard-normal increment(s).

    ``z`` is a scalar for one-dimensional kinds, an array of length ``ndim``
    for Bessel.  Used directly by tests (e.g. zero noise); ``advance`` draws
    from the stream and delegates here so there is a single arithmetic path.
    """
    if cursor.truncated:
        raise RuntimeError("cursor already truncated")
    sq = grid.sqrt_dt
    if cursor.kind is ProcessKind.BROWNIAN:
        cursor.value += sq * z
    elif cursor.kind is ProcessKind.DRIFTED:
        cursor.value += cursor.mu * grid.dt + cursor.sigma * sq * z
    else:
        acc = 0.0
        for j in range(cursor.ndim):
            cursor.coords[j] += sq * z[j]
            acc += cursor.coords[j] * cursor.coords[j]
        cursor.value = math.sqrt(acc)
    cursor.step_index += 1
    k = cursor.step_index
    if cursor.value >= cursor.running_max:
        cursor.running_max = cursor.value
        cursor.last_max_attain_index = k
    if cursor.value <= cursor.running_min:
        cursor.running_min = cursor.value
        cursor.last_min_attain_index = k
    if cursor.value <= 0.0 and cursor.kind is not ProcessKind.BESSEL:
        cursor.last_nonpositive_index = k
    if k >= grid.max_steps:
        cursor.truncated = True
    return cursor


def advance(cursor: PathCursor, grid: TimeGrid, key: StreamKey) -> PathCursor:
    """Advance one step, drawing the increment(s) for the current step index."""
    k = cursor.step_index
    if cursor.kind is ProcessKind.BESSEL:
        z = np.empty(cursor.ndim)
        for j in range(cursor.ndim):
            z[j] = coord_increment(key.key, k, j)
    else:
        z = bm_increment(key.key, k)
    return inject_step(cursor, grid, z)


def first_hit(values: np.ndarray, level: float, upward: bool = True) -> int | None:
    """First grid index at or beyond ``level`` (None if never reached)."""
    if upward:
        idx = np.nonzero(values >= level)[0]
    else:
        idx = np.nonzero(values <= level)[0]
    return int(idx[0]) if idx.size else None


def zero_and_max_tracker(values: np.ndarray):
    """Scan a path started at 0 up to its first hit of 1.

    Returns ``(sigma_idx, rho_idx, s_rho)``: the last zero touch before the
    hit, and, frozen at that touch, the most recent running-max attainment
    index with its max value.  ``sigma_idx`` is None when the path never
    touches <= 0 before hitting 1 (cannot happen for a path with value 0
    at index 0, by the touch convention).
    """
    t1 = first_hit(values, 1.0, upward=True)
    end = len(values) if t1 is None else t1
    running = -math.inf
    last_attain = 0
    sigma = None
    rho = 0
    s_rho = 0.0
    for k in range(end):
        v = values[k]
        if v >= running:
            running = v
            last_attain = k
        if v <= 0.0:
            sigma = k
            rho = last_attain
            s_rho = running
    return sigma, rho, s_rho


@njit(cache=True)
def bm_values(key, n_steps, dt):
    """Brownian path values on the grid, length n_steps+1, starting at 0."""
    sq = np.sqrt(dt)
    out = np.empty(n_steps + 1)
    out[0] = 0.0
    b = 0.0
    for k in range(n_steps):
        b += sq * bm_increment(key, k)
        out[k + 1] = b
    return out


@njit(cache=True)
def bessel_values(key, n_steps, dt, ndim, r0):
    """Bessel(ndim) radial path as the norm of ndim coordinate paths."""
    sq = np.sqrt(dt)
    out = np.empty(n_steps + 1)
    coords = np.zeros(ndim)
    coords[0] = r0
    out[0] = r0
    for k in range(n_steps):
        acc = 0.0
        for j in range(ndim):
            coords[j] += sq * coord_increment(key, k, j)
            acc += coords[j] * coords[j]
        out[k + 1] = np.sqrt(acc)
    return out


@njit(cache=True)
def drifted_values(key, n_steps, dt, mu, sigma, x0):
    """Drifted Brownian path mu*t + sigma*B_t + x0 on the grid."""
    sq = np.sqrt(dt)
    out = np.empty(n_steps + 1)
    out[0] = x0
    x = x0
    for k in range(n_steps):
        x += mu * dt + sigma * sq * bm_increment(key, k)
        out[k + 1] = x
    return out
