"""Finite metric spaces, axiom validation, and pointwise metric transforms.

Everything here is a pure function of immutable inputs: distance matrices are
copied on construction and frozen, so instances can be shared freely across
threads or processes.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np

from .gauges import ConcaveGauge, PowerGauge

DEFAULT_TOL = 1e-9


@dataclasses.dataclass(frozen=True)
class Violation:
    """One failed metric axiom with the indices that witness it."""

    axiom: str  # "diagonal" | "symmetry" | "positivity" | "triangle"
    where: tuple[int, ...]
    amount: float

    def __str__(self) -> str:
        return f"{self.axiom}{self.where} by {self.amount:.3g}"


class MetricError(ValueError):
    """A distance matrix failed one or more metric axioms."""

    def __init__(self, violations: Sequence[Violation]):
        self.violations = list(violations)
        shown = ", ".join(str(v) for v in self.violations[:4])
        extra = len(self.violations) - 4
        if extra > 0:
            shown += f", +{extra} more"
        super().__init__(f"not a metric: {shown}")


class ChainBoundError(RuntimeError):
    """The chain metric dropped below the guaranteed quarter of h**beta."""

    def __init__(self, pair: tuple[int, int], gamma: float, floor: float):
        self.pair = pair
        self.gamma = gamma
        self.floor = floor
        super().__init__(
            f"chain metric {gamma:.12g} < quarter bound {floor:.12g} at pair "
            f"{pair}; instance retained for inspection"
        )


def _square(dist) -> np.ndarray:
    a = np.asarray(dist, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("distance matrix must have finite entries")
    return a


def validate_metric(dist, tol: float = DEFAULT_TOL) -> list[Violation]:
    """Check the metric axioms; the report is empty iff ``dist`` is a metric.

    Each violation carries the axiom name and witness indices; triangle
    witnesses come as (i, k, j) for d(i,k) > d(i,j) + d(j,k).  Non-square or
    non-finite input raises ValueError instead of being reported.
    """
    d = _square(dist)
    n = d.shape[0]
    out: list[Violation] = []
    for i in np.nonzero(np.abs(np.diagonal(d)) > tol)[0]:
        out.append(Violation("diagonal", (int(i),), float(abs(d[i, i]))))
    gap = np.abs(d - d.T)
    for i, j in zip(*np.nonzero(np.triu(gap > tol, 1))):
        out.append(Violation("symmetry", (int(i), int(j)), float(gap[i, j])))
    small = d <= tol
    np.fill_diagonal(small, False)
    for i, j in zip(*np.nonzero(np.triu(small, 1))):
        out.append(Violation("positivity", (int(i), int(j)), float(d[i, j])))
    for j in range(n):
        excess = d - (d[:, j][:, None] + d[j, :][None, :])
        bad = excess > tol
        bad[j, :] = False
        bad[:, j] = False
        for i, k in zip(*np.nonzero(np.triu(bad))):
            out.append(Violation("triangle", (int(i), int(k), int(j)), float(excess[i, k])))
    return out


class FiniteMetricSpace:
    """n labeled points with a symmetric positive distance matrix.

    The constructor validates all axioms at absolute tolerance ``tol`` and
    raises :class:`MetricError` otherwise.  Pass ``validate=False`` only for
    matrices produced by an operation that provably preserves the axioms
    (e.g. a shortest-path closure on a large point set).
    """

    __slots__ = ("labels", "dist", "_index")

    def __init__(self, labels: Sequence[str], dist, *, tol: float = DEFAULT_TOL,
                 validate: bool = True):
        d = _square(dist).copy()
        labels = tuple(str(x) for x in labels)
        if len(labels) != d.shape[0]:
            raise ValueError(f"{len(labels)} labels for a {d.shape[0]}-point matrix")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        if validate:
            violations = validate_metric(d, tol)
            if violations:
                raise MetricError(violations)
        d.flags.writeable = False
        self.labels = labels
        self.dist = d
        self._index = {lab: i for i, lab in enumerate(labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"FiniteMetricSpace({len(self)} points, diameter {self.diameter:.6g})"

    def index(self, label: str) -> int:
        return self._index[label]

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) if len(self) else 0.0

    def distance(self, a: str, b: str) -> float:
        return float(self.dist[self._index[a], self._index[b]])

    def subspace(self, keep: Sequence[str] | Sequence[int]) -> "FiniteMetricSpace":
        """Restriction to the given labels (or indices), in the given order."""
        idx = [k if isinstance(k, (int, np.integer)) else self._index[k] for k in keep]
        labels = [self.labels[i] for i in idx]
        return FiniteMetricSpace(labels, self.dist[np.ix_(idx, idx)], validate=False)

    def rescale(self, factor: float) -> "FiniteMetricSpace":
        if factor <= 0:
            raise ValueError("scale factor must be positive")
        return FiniteMetricSpace(self.labels, self.dist * factor, validate=False)


class SemiMetric:
    """Symmetric, separating dissimilarity that may violate the triangle
    inequality; carries its quasi-triangle constant K, the smallest constant
    with h(x,y) <= K*(h(x,z) + h(z,y)) over distinct triples."""

    __slots__ = ("labels", "dist", "quasi_triangle")

    def __init__(self, labels: Sequence[str], dist, *, tol: float = DEFAULT_TOL):
        d = _square(dist).copy()
        labels = tuple(str(x) for x in labels)
        if len(labels) != d.shape[0]:
            raise ValueError(f"{len(labels)} labels for a {d.shape[0]}-point matrix")
        if np.abs(np.diagonal(d)).max(initial=0.0) > tol:
            raise ValueError("semimetric must vanish on the diagonal")
        if np.abs(d - d.T).max(initial=0.0) > tol:
            raise ValueError("semimetric must be symmetric")
        off = ~np.eye(d.shape[0], dtype=bool)
        if d.shape[0] > 1 and d[off].min() <= tol:
            raise ValueError("semimetric must be positive off the diagonal")
        d.flags.writeable = False
        self.labels = labels
        self.dist = d
        self.quasi_triangle = quasi_triangle_constant(d)

    def __len__(self) -> int:
        return len(self.labels)

    def is_metric(self, tol: float = DEFAULT_TOL) -> bool:
        return not validate_metric(self.dist, tol)


def quasi_triangle_constant(dist) -> float:
    """Smallest K with h(x,y) <= K*(h(x,z)+h(z,y)) over triples of distinct
    points; 1/2 by convention when fewer than 3 points constrain it.

    K <= 1 exactly when h satisfies the triangle inequality, and K >= 1/2
    always (take the pair realizing the maximum of h as x, y).
    """
    d = _square(dist)
    n = d.shape[0]
    if n < 3:
        return 0.5
    best = 0.0
    for j in range(n):
        denom = d[:, j][:, None] + d[j, :][None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = d / denom
        ratio[j, :] = 0.0
        ratio[:, j] = 0.0
        np.fill_diagonal(ratio, 0.0)
        best = max(best, float(np.nanmax(ratio)))
    return best


def shortest_path_closure(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths by Floyd-Warshall; np.inf marks a missing edge.

    Deterministic cubic dynamic programming, exact up to float rounding.
    """
    d = np.array(weights, dtype=float)
    if (d < 0).any():
        raise ValueError("edge weights must be nonnegative")
    np.fill_diagonal(d, 0.0)
    for k in range(d.shape[0]):
        np.minimum(d, d[:, [k]] + d[[k], :], out=d)
    return d


# ---------------------------------------------------------------------------
# transforms


def truncate(space: FiniteMetricSpace, lam: float) -> FiniteMetricSpace:
    """Cap all distances at lam: d'(x,y) = min(d(x,y), lam)."""
    if lam <= 0:
        raise ValueError(f"truncation level must be positive, got {lam}")
    return FiniteMetricSpace(space.labels, np.minimum(space.dist, lam))


def apply_concave(space: FiniteMetricSpace, gauge: ConcaveGauge) -> FiniteMetricSpace:
    """Transform d into gauge(d) pointwise.

    A concave nondecreasing gauge vanishing at 0 is subadditive, so the
    triangle inequality survives; the result is validated regardless.
    """
    if not isinstance(gauge, ConcaveGauge):
        raise TypeError(f"expected a ConcaveGauge, got {type(gauge).__name__}")
    return FiniteMetricSpace(space.labels, gauge(space.dist))


def snowflake(space: FiniteMetricSpace, alpha: float) -> FiniteMetricSpace:
    """The alpha-snowflake d -> d**alpha for alpha in (0, 1]."""
    return apply_concave(space, PowerGauge(alpha))


def min_of_metrics(d0: FiniteMetricSpace, d1: FiniteMetricSpace) -> SemiMetric:
    """Pointwise minimum of two metrics on the same labels.

    The result is a SemiMetric even when it happens to satisfy the triangle
    inequality; query .is_metric() or validate_metric for metric status.
    """
    if d0.labels != d1.labels:
        raise ValueError("metrics must live on identical label sequences")
    return SemiMetric(d0.labels, np.minimum(d0.dist, d1.dist))


@dataclasses.dataclass(frozen=True)
class ChainMetrization:
    """Chain metric gamma for a quasimetric h, with the exponent used."""

    space: FiniteMetricSpace
    beta: float
    quasi_constant: float
    clamped: bool  # True when K < 1 forced beta down to 1


def chain_metrization(h: SemiMetric | FiniteMetricSpace, beta: float | None = None,
                      tol: float = DEFAULT_TOL) -> ChainMetrization:
    """Metrize h by chains: gamma(x,y) = min over chains of sum h(z_i,z_{i+1})**beta.

    With K the quasi-triangle constant of h and beta solving 2**(1/beta) = 2K
    (beta = 1 when K <= 1), the chain metric satisfies

        (1/4) * h(x,y)**beta  <=  gamma(x,y)  <=  h(x,y)**beta

    for every pair.  The upper bound is the one-step chain; the quarter lower
    bound is asserted pair by pair and any counterexample raises
    :class:`ChainBoundError` rather than being silently accepted.
    """
    if isinstance(h, FiniteMetricSpace):
        h = SemiMetric(h.labels, h.dist)
    K = h.quasi_triangle
    clamped = K < 1.0
    if beta is None:
        beta = 1.0 if K <= 1.0 else 1.0 / math.log2(2.0 * K)
    if not 0 < beta <= 1:
        raise ValueError(f"chain exponent must lie in (0, 1], got {beta}")
    powered = h.dist ** beta
    gamma = shortest_path_closure(powered)
    floor = powered / 4.0
    slack = gamma - floor
    if slack.min() < -tol:
        i, j = np.unravel_index(int(np.argmin(slack)), slack.shape)
        raise ChainBoundError((int(i), int(j)), float(gamma[i, j]), float(floor[i, j]))
    space = FiniteMetricSpace(h.labels, gamma)
    return ChainMetrization(space, float(beta), K, clamped)
