"""Twisted unions of two metrics on a common point set.

Two copies of M carry metrics d0 and d1; copy-0 and copy-1 points with the
same base label are joined by an edge of weight r (a constant or a per-point
function), and the union metric is the shortest-path metric of that weighted
graph.  The joining weights are admissible when

    |d0(x,y) - d1(x,y)| <= 2r                     (constant joiner)
    |d0(x,y) - d1(x,y)| <= r(x) + r(y)            (function joiner)
    |r(x) - r(y)|       <= d0(x,y) + d1(x,y)      (function joiner)

which is exactly what makes every edge weight equal to the graph distance of
its ends, so the union restricts to d0 and d1 on the two copies and to r on
the joining pairs.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Sequence

import numpy as np

from .gauges import ConcaveGauge
from .metrics import (
    DEFAULT_TOL,
    FiniteMetricSpace,
    min_of_metrics,
    shortest_path_closure,
    validate_metric,
)


class IncompatibleSpecError(ValueError):
    """The joining weights violate an admissibility condition."""

    def __init__(self, report: "CompatibilityReport"):
        self.report = report
        failed = [c.name for c in report.conditions if not c.satisfied]
        super().__init__(f"incompatible twisted-union spec: {', '.join(failed)} failed")


@dataclasses.dataclass(frozen=True)
class Joiner:
    """Positive joining weights, either one shared constant or one value per
    base point."""

    values: np.ndarray
    constant: bool

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("joiner needs a nonempty vector of weights")
        if not np.all(np.isfinite(v)) or v.min() <= 0:
            raise ValueError("joining weights must be positive and finite")
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def fixed(cls, r: float, n: int) -> "Joiner":
        return cls(np.full(n, float(r)), constant=True)

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "Joiner":
        return cls(np.asarray(values, dtype=float), constant=False)

    @classmethod
    def from_function(cls, fn: Callable[[str], float], labels: Sequence[str]) -> "Joiner":
        return cls.from_values([fn(lab) for lab in labels])


@dataclasses.dataclass(frozen=True)
class TwistedUnionSpec:
    """Two metrics on the same labels plus joining weights.

    Construction does not enforce admissibility; check_compatibility reports
    it and build_twisted_union refuses specs that fail.
    """

    d0: FiniteMetricSpace
    d1: FiniteMetricSpace
    joiner: Joiner

    def __post_init__(self):
        if self.d0.labels != self.d1.labels:
            raise ValueError("d0 and d1 must share one label sequence")
        if self.joiner.values.size != len(self.d0.labels):
            raise ValueError("joiner length must match the point count")

    @property
    def labels(self) -> tuple[str, ...]:
        return self.d0.labels

    @property
    def n(self) -> int:
        return len(self.d0.labels)


@dataclasses.dataclass(frozen=True)
class ConditionCheck:
    name: str
    satisfied: bool
    worst_pair: tuple[str, str] | None
    slack: float  # min over pairs of (rhs - lhs); negative when violated


@dataclasses.dataclass(frozen=True)
class CompatibilityReport:
    conditions: tuple[ConditionCheck, ...]

    @property
    def all_ok(self) -> bool:
        return all(c.satisfied for c in self.conditions)


def _worst(slack: np.ndarray, labels: Sequence[str], tol: float, name: str) -> ConditionCheck:
    n = slack.shape[0]
    if n < 2:
        return ConditionCheck(name, True, None, float("inf"))
    iu, ju = np.triu_indices(n, 1)
    flat = slack[iu, ju]
    k = int(np.argmin(flat))
    return ConditionCheck(name, bool(flat[k] >= -tol),
                          (labels[iu[k]], labels[ju[k]]), float(flat[k]))


def check_compatibility(spec: TwistedUnionSpec, tol: float = DEFAULT_TOL) -> CompatibilityReport:
    """Admissibility report: each condition with its worst pair and slack."""
    gap = np.abs(spec.d0.dist - spec.d1.dist)
    r = spec.joiner.values
    checks = []
    if spec.joiner.constant:
        checks.append(_worst(2 * r[0] - gap, spec.labels, tol, "gap_le_2r"))
    else:
        checks.append(_worst(r[:, None] + r[None, :] - gap, spec.labels, tol,
                             "gap_le_r_sum"))
        variation = np.abs(r[:, None] - r[None, :])
        checks.append(_worst(spec.d0.dist + spec.d1.dist - variation, spec.labels,
                             tol, "r_variation_le_d_sum"))
    return CompatibilityReport(tuple(checks))


@dataclasses.dataclass(frozen=True)
class DerivedConstants:
    """Instance-optimal constants of a built union.

    lipschitz: smallest L with |r(x)-r(y)| <= L*min(d0,d1) (0 for constant r).
    comparability: smallest C with d1 <= C*d0.
    min_is_metric: whether min(d0,d1) satisfies the triangle inequality.
    """

    lipschitz: float
    comparability: float
    min_is_metric: bool


@dataclasses.dataclass(frozen=True)
class TwistedUnionSpace:
    """The union metric on 2n points: copy-0 block first, then copy-1.

    Point (x, a) sits at index a*n + index(x); its label is "<x>|<a>".
    """

    spec: TwistedUnionSpec
    labels: tuple[str, ...]
    dist: np.ndarray
    derived: DerivedConstants

    @property
    def n(self) -> int:
        return self.spec.n

    def index(self, label: str, copy: int) -> int:
        if copy not in (0, 1):
            raise ValueError("copy must be 0 or 1")
        return copy * self.n + self.spec.d0.index(label)

    def cross_distance(self, i: int, j: int) -> float:
        """Distance from (point i, copy 0) to (point j, copy 1)."""
        return float(self.dist[i, self.n + j])

    def cross_block(self) -> np.ndarray:
        return self.dist[: self.n, self.n:]

    def as_metric_space(self) -> FiniteMetricSpace:
        return FiniteMetricSpace(self.labels, self.dist, validate=False)


def lipschitz_constant(spec: TwistedUnionSpec) -> float:
    """Smallest L with |r(x)-r(y)| <= L*min(d0,d1)(x,y); 0 for a constant
    joiner or fewer than 2 points."""
    if spec.joiner.constant or spec.n < 2:
        return 0.0
    r = spec.joiner.values
    h = np.minimum(spec.d0.dist, spec.d1.dist)
    iu, ju = np.triu_indices(spec.n, 1)
    return float(np.max(np.abs(r[iu] - r[ju]) / h[iu, ju]))


def comparability_constant(spec: TwistedUnionSpec) -> float:
    """Smallest C with d1 <= C*d0 on this instance."""
    if spec.n < 2:
        return 1.0
    iu, ju = np.triu_indices(spec.n, 1)
    return float(np.max(spec.d1.dist[iu, ju] / spec.d0.dist[iu, ju]))


def build_twisted_union(spec: TwistedUnionSpec, tol: float = DEFAULT_TOL) -> TwistedUnionSpace:
    """Assemble the weighted graph and take its shortest-path closure.

    Refuses incompatible specs (the restriction identities would fail).  The
    defined edges (same-copy pairs and joining pairs) are reset to their
    exact input weights after the closure: admissibility makes each edge
    weight equal to the graph distance of its ends, so this only undoes
    float drift from path re-summation, never a real shortcut.
    """
    report = check_compatibility(spec, tol)
    if not report.all_ok:
        raise IncompatibleSpecError(report)
    n = spec.n
    r = spec.joiner.values
    w = np.full((2 * n, 2 * n), np.inf)
    w[:n, :n] = spec.d0.dist
    w[n:, n:] = spec.d1.dist
    idx = np.arange(n)
    w[idx, n + idx] = r
    w[n + idx, idx] = r
    np.fill_diagonal(w, 0.0)
    dist = shortest_path_closure(w)
    edges = np.isfinite(w)
    dist[edges] = np.maximum(dist[edges], w[edges])
    labels = tuple(f"{lab}|0" for lab in spec.labels) + tuple(f"{lab}|1" for lab in spec.labels)
    violations = validate_metric(dist, tol)
    if violations:
        raise AssertionError(f"union closure failed metric axioms: {violations[:3]}")
    derived = DerivedConstants(
        lipschitz=lipschitz_constant(spec),
        comparability=comparability_constant(spec),
        min_is_metric=min_of_metrics(spec.d0, spec.d1).is_metric(tol),
    )
    dist.flags.writeable = False
    return TwistedUnionSpace(spec, labels, dist, derived)


def cross_distance_oracle(space: TwistedUnionSpace | TwistedUnionSpec,
                          i: int, j: int) -> tuple[float, int]:
    """Cross distance by the single-crossing reduction:

        d((i,0),(j,1)) = min over z of d0(i,z) + d1(z,j) + r(z),

    valid whenever the admissibility conditions hold (a shortest path then
    never needs to switch copies twice).  Returns (value, witness z); ties
    break to the lowest index.
    """
    spec = space.spec if isinstance(space, TwistedUnionSpace) else space
    totals = spec.d0.dist[i, :] + spec.d1.dist[:, j] + spec.joiner.values
    z = int(np.argmin(totals))
    return float(totals[z]), z


# ---------------------------------------------------------------------------
# closed forms for the twisted-cube families


def closed_form_power(x: Sequence[int] | str, a: int, y: Sequence[int] | str,
                      b: int, alpha: float, r: float) -> float:
    """Distance between cube points (x,a), (y,b) in the power/linear twisted
    cube: copy 0 carries t**(1/(2*alpha)), copy 1 carries t/r**(2*alpha-1)
    (t the Hamming distance), and the closed form is

        t**(1/(2a))                                  a = b = 0
        min(t/r**(2a-1), 2r + t**(1/(2a)))           a = b = 1
        r                                            x = y, a != b
        r + min(t/r**(2a-1), t**(1/(2a)))            x != y, a != b
    """
    if not 0.5 < alpha <= 1:
        raise ValueError(f"alpha must lie in (1/2, 1], got {alpha}")
    if r <= 0:
        raise ValueError(f"joining weight must be positive, got {r}")
    xb = _bits(x)
    yb = _bits(y)
    if len(xb) != len(yb):
        raise ValueError("cube points must have equal dimension")
    t = float(sum(1 for u, v in zip(xb, yb) if u != v))
    root = t ** (1.0 / (2.0 * alpha))
    linear = t / r ** (2.0 * alpha - 1.0)
    if a == b:
        return root if a == 0 else min(linear, 2.0 * r + root)
    if t == 0:
        return r
    return r + min(linear, root)


def closed_form_concave(t: float, a: int, b: int, w0: ConcaveGauge,
                        w1: ConcaveGauge, r: float) -> float:
    """Distance between (x,a), (y,b) at base distance t = ||x-y|| in the
    twisted union of two concave transforms of one metric:

        min(w0(t), 2r + w1(t))       a = b = 0
        min(w1(t), 2r + w0(t))       a = b = 1
        r                            t = 0, a != b
        r + min(w0(t), w1(t))        t > 0, a != b
    """
    if r <= 0:
        raise ValueError(f"joining weight must be positive, got {r}")
    if t < 0:
        raise ValueError("base distance must be nonnegative")
    v0 = float(w0(t))
    v1 = float(w1(t))
    if a == b:
        return min(v0, 2.0 * r + v1) if a == 0 else min(v1, 2.0 * r + v0)
    if t == 0:
        return r
    return r + min(v0, v1)


def _bits(x) -> tuple[int, ...]:
    if isinstance(x, str):
        return tuple(int(c) for c in x)
    return tuple(int(v) for v in x)


# ---------------------------------------------------------------------------
# two-sided cross-distance bounds


@dataclasses.dataclass(frozen=True)
class CrossBounds:
    lower: float
    upper: float
    exact: float | None = None  # known exact value, when available


def cross_bounds_lipschitz(space: TwistedUnionSpace, i: int, j: int) -> CrossBounds:
    """Bounds on d((i,0),(j,1)) from the Lipschitz behaviour of the joiner:

        (h + max(r_i, r_j)) / A  <=  d  <=  h + max(r_i, r_j),

    with h = min(d0,d1)(i,j) and A = max(2L+1, 3) for the instance constant
    L (constant joiners have L = 0, hence A = 3).  When the joiner is
    constant and min(d0,d1) is a metric the value is exactly r + h.
    """
    spec = space.spec
    h = float(min(spec.d0.dist[i, j], spec.d1.dist[i, j]))
    r = spec.joiner.values
    m = float(max(r[i], r[j]))
    a = max(2.0 * space.derived.lipschitz + 1.0, 3.0)
    exact = None
    if spec.joiner.constant and space.derived.min_is_metric:
        exact = float(r[0]) + h
    return CrossBounds((h + m) / a, h + m, exact)


def cross_bounds_comparable(space: TwistedUnionSpace, i: int, j: int) -> CrossBounds:
    """Bounds on d((i,0),(j,1)) when d1 <= C*d0:

        (d1(i,j) + r_i) / (2C+1)  <=  d  <=  d1(i,j) + r_i,

    with divisor C+1 instead of 2C+1 for a constant joiner.  Note the r_i of
    the copy-0 endpoint: r_j, max, or min would all be wrong here.
    """
    spec = space.spec
    c = space.derived.comparability
    v = float(spec.d1.dist[i, j] + spec.joiner.values[i])
    divisor = (c + 1.0) if spec.joiner.constant else (2.0 * c + 1.0)
    return CrossBounds(v / divisor, v)
