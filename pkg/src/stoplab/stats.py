"""Monte Carlo summaries and distribution tests.

Reductions use fixed-shape pairwise summation: the input array is padded
with zeros to the next power of two and halved repeatedly.  The result
depends only on the array contents in path-index order, never on how the
values were produced (chunking, worker scheduling), so repeated runs are
bit-identical.

The Kolmogorov-Smirnov p-values use the asymptotic series
``Q(x) = 2 * sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2)`` evaluated at
``x = D * (sqrt(n) + 0.12 + 0.11 / sqrt(n))`` with the effective size
``n*m/(n+m)`` in the two-sample case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MIN_SAMPLES = 50


class TooFewSamples(ValueError):
    """Fewer than MIN_SAMPLES usable values reached a statistic."""


def pairwise_sum(values: np.ndarray) -> float:
    """Sum with a fixed pairwise reduction tree (shape depends only on n)."""
    x = np.asarray(values, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("pairwise_sum expects a 1-d array")
    n = x.size
    if n == 0:
        return 0.0
    size = 1 << (n - 1).bit_length()
    if size != n:
        x = np.concatenate([x, np.zeros(size - n)])
    else:
        x = x.copy()
    while x.size > 1:
        x = x[0::2] + x[1::2]
    return float(x[0])


def mc_mean(values: np.ndarray) -> tuple[float, float]:
    """Mean and standard error of a sample, pairwise-summed.

    Raises TooFewSamples below MIN_SAMPLES: estimates from a handful of
    paths are not meaningful under the 3-sigma acceptance rule.
    """
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"{n} samples < {MIN_SAMPLES}")
    mean = pairwise_sum(x) / n
    var = pairwise_sum((x - mean) ** 2) / (n - 1)
    return mean, math.sqrt(var / n)


def kolmogorov_p(x: float) -> float:
    """Tail probability Q(x) of the Kolmogorov distribution."""
    if x <= 0.0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = math.exp(-2.0 * k * k * x * x)
        if term < 1e-18:
            break
        total += term if k % 2 == 1 else -term
    return min(1.0, max(0.0, 2.0 * total))


@dataclass(frozen=True)
class KSResult:
    statistic: float
    p_value: float
    n_effective: float


def _scaled_p(d: float, n_eff: float) -> float:
    root = math.sqrt(n_eff)
    return kolmogorov_p(d * (root + 0.12 + 0.11 / root))


def ks_one_sample(samples: np.ndarray, cdf) -> KSResult:
    """KS test of ``samples`` against the continuous CDF callable ``cdf``."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.size
    if n < MIN_SAMPLES:
        raise TooFewSamples(f"{n} samples < {MIN_SAMPLES}")
    f = np.asarray(cdf(x), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    d_plus = float(np.max(grid - f))
    d_minus = float(np.max(f - (grid - 1.0 / n)))
    d = max(d_plus, d_minus)
    return KSResult(d, _scaled_p(d, n), n)


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> KSResult:
    """Two-sample KS test with effective size n*m/(n+m)."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    n, m = a.size, b.size
    if min(n, m) < MIN_SAMPLES:
        raise TooFewSamples(f"{min(n, m)} samples < {MIN_SAMPLES}")
    both = np.concatenate([a, b])
    order = np.argsort(both, kind="mergesort")
    steps = np.where(order < n, 1.0 / n, -1.0 / m)
    gaps = np.cumsum(steps)
    d = float(np.max(np.abs(gaps)))
    n_eff = n * m / (n + m)
    return KSResult(d, _scaled_p(d, n_eff), n_eff)


@dataclass(frozen=True)
class MCEstimate:
    """One Monte Carlo estimate with its certified error budget.

    ``bias_bound`` is an analytic bound on systematic error (truncation,
    pruning), never estimated from the same sample.  The acceptance rule is
    |mean - target| <= 3 * stderr + bias_bound, or containment up to the
    same slack when the target is an interval.
    """

    mean: float
    stderr: float
    n: int
    bias_bound: float = 0.0
    target: float | tuple[float, float] | None = None

    @property
    def tolerance(self) -> float:
        return 3.0 * self.stderr + self.bias_bound

    @property
    def lo(self) -> float:
        return self.mean - self.tolerance

    @property
    def hi(self) -> float:
        return self.mean + self.tolerance

    @property
    def passed(self) -> bool | None:
        if self.target is None:
            return None
        if isinstance(self.target, tuple):
            lo, hi = self.target
            return lo - self.tolerance <= self.mean <= hi + self.tolerance
        return abs(self.mean - self.target) <= self.tolerance

    def separation(self, value: float) -> float:
        """|mean - value| in units of stderr (negative-control distances)."""
        if self.stderr == 0.0:
            return math.inf if self.mean != value else 0.0
        return abs(self.mean - value) / self.stderr


def estimate(values: np.ndarray, target=None, bias_bound: float = 0.0) -> MCEstimate:
    mean, se = mc_mean(values)
    return MCEstimate(mean=mean, stderr=se, n=int(np.asarray(values).size),
                      bias_bound=bias_bound, target=target)
