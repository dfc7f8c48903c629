"""Seeded random instances for verification runs and tests.

Every generator takes a numpy Generator so an experiment is reproducible from
its recorded seed alone; nothing here touches global RNG state.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from .gauges import (
    ConcaveGauge,
    PiecewiseLinearGauge,
    PowerGauge,
    SaturatingGauge,
    TruncationGauge,
)
from .metrics import FiniteMetricSpace, SemiMetric, shortest_path_closure
from .twisted import Joiner, TwistedUnionSpec


def _labels(n: int) -> list[str]:
    return [f"p{i}" for i in range(n)]


def random_metric(rng: np.random.Generator, n: int, low: float = 0.5,
                  high: float = 2.0) -> FiniteMetricSpace:
    """Shortest-path closure of uniform random symmetric edge weights; a
    generic metric with no special structure."""
    w = rng.uniform(low, high, size=(n, n))
    w = (w + w.T) / 2.0
    np.fill_diagonal(w, 0.0)
    return FiniteMetricSpace(_labels(n), shortest_path_closure(w))


def random_l1_metric(rng: np.random.Generator, n: int, dim: int = 3,
                     scale: float = 1.0) -> FiniteMetricSpace:
    """Metric of n random points in dim-dimensional l1 space (isometrically
    L1-embeddable by construction)."""
    while True:
        pts = rng.uniform(0.0, scale, size=(n, dim))
        d = cdist(pts, pts, metric="cityblock")
        off = d[~np.eye(n, dtype=bool)]
        if n < 2 or off.min() > 1e-6 * scale:
            return FiniteMetricSpace(_labels(n), d)


def random_semimetric_min(rng: np.random.Generator, n: int) -> SemiMetric:
    """Pointwise minimum of two independent random metrics."""
    a = random_metric(rng, n)
    b = random_metric(rng, n)
    return SemiMetric(a.labels, np.minimum(a.dist, b.dist))


def random_concave_gauge(rng: np.random.Generator, scale: float = 1.0) -> ConcaveGauge:
    """One of the gauge families with random admissible parameters."""
    kind = rng.integers(0, 4)
    if kind == 0:
        return PowerGauge(float(rng.uniform(0.3, 1.0)))
    if kind == 1:
        return TruncationGauge(float(rng.uniform(0.3, 1.5)) * scale)
    if kind == 2:
        return SaturatingGauge(float(rng.uniform(0.5, 2.0)) * scale,
                               float(rng.uniform(0.3, 1.5)) * scale)
    ts = np.concatenate([[0.0], np.cumsum(rng.uniform(0.2, 1.0, size=4)) * scale])
    slopes = np.sort(rng.uniform(0.1, 2.0, size=5))[::-1]
    vs = np.concatenate([[0.0], np.cumsum(slopes * np.diff(ts))])
    return PiecewiseLinearGauge(list(zip(ts, vs)))


def random_compatible_spec(rng: np.random.Generator, n: int,
                           constant: bool = False) -> TwistedUnionSpec:
    """Two random metrics with admissible joining weights.

    For a function joiner, r(x) = base + gap(x)/2 + jitter(x) where gap(x) is
    the largest |d0 - d1| seen from x.  The half-gap term makes the pair sums
    dominate |d0 - d1|, its 1-Lipschitz-ness (with respect to d0 + d1) keeps
    the variation admissible, and the jitter stays below half the smallest
    d0 + d1 so it cannot break that.
    """
    d0 = random_metric(rng, n)
    d1 = random_metric(rng, n)
    gap = np.abs(d0.dist - d1.dist)
    if constant:
        r = 0.5 * gap.max() + float(rng.uniform(0.1, 1.0))
        return TwistedUnionSpec(d0, d1, Joiner.fixed(r, n))
    base = float(rng.uniform(0.1, 0.5))
    jitter_cap = 0.5 * (d0.dist + d1.dist)[~np.eye(n, dtype=bool)].min() if n > 1 else 1.0
    jitter = rng.uniform(0.0, jitter_cap, size=n)
    r = base + 0.5 * gap.max(axis=1) + jitter
    return TwistedUnionSpec(d0, d1, Joiner.from_values(r))


def random_comparable_spec(rng: np.random.Generator, n: int,
                           constant: bool = True) -> TwistedUnionSpec:
    """Compatible spec whose d1 is a truncation of d0 (so d1 <= d0 holds with
    comparability constant 1 and the gap is controlled by the cut level)."""
    d0 = random_metric(rng, n)
    lam = float(rng.uniform(0.4, 0.9)) * d0.diameter
    d1 = FiniteMetricSpace(d0.labels, np.minimum(d0.dist, lam))
    if constant:
        r = 0.5 * (d0.diameter - lam) + float(rng.uniform(0.05, 0.5))
        return TwistedUnionSpec(d0, d1, Joiner.fixed(r, n))
    gap = np.abs(d0.dist - d1.dist)
    base = float(rng.uniform(0.1, 0.4))
    r = base + 0.5 * gap.max(axis=1)
    return TwistedUnionSpec(d0, d1, Joiner.from_values(r))
