"""Exact minimal L1 distortion of small finite metrics via the cut cone.

A finite pseudometric embeds isometrically into L1 exactly when it is a
nonnegative combination of cut pseudometrics delta_S (distance 1 across the
cut S, 0 otherwise).  Minimizing t subject to

    d(x,y) <= sum_S mu_S * delta_S(x,y) <= t * d(x,y),   mu >= 0,

over all nontrivial cuts therefore computes the exact minimal distortion of
an embedding into L1, and the optimal mu converts to explicit coordinates one
cut per coordinate.  Cuts are canonicalized with point 0 on the complement
side (delta_S = delta_complement), leaving 2**(n-1) - 1 variables; the hard
cap n <= 16 keeps that below 32768.

All solves go through a deterministic dual-simplex run with fixed row/column
ordering, so certificates are reproducible across runs.
"""

from __future__ import annotations

import dataclasses
import math
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from .metrics import DEFAULT_TOL, FiniteMetricSpace, _square

MAX_EXACT_POINTS = 16

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-9,
    "dual_feasibility_tolerance": 1e-9,
}
_LP_METHOD = "highs-ds"
_WEIGHT_FLOOR = 1e-13  # measure entries below this are dropped as solver noise


class CutSizeError(ValueError):
    """Point count exceeds the exhaustive-cut cap."""

    def __init__(self, n: int):
        super().__init__(
            f"{n} points exceed the exact-mode cap of {MAX_EXACT_POINTS}; "
            "use sampled_c1_upper_bound for an UPPER_BOUND_ONLY certificate"
        )


class SolverError(RuntimeError):
    """The LP backend failed for a reason other than genuine infeasibility."""


def canonical_cut(s: Iterable[int], n: int) -> frozenset[int]:
    """Canonical representative of the cut {S, complement}: 0 goes to the
    complement side.  Trivial cuts are rejected."""
    cut = frozenset(int(i) for i in s)
    if not cut <= frozenset(range(n)):
        raise ValueError(f"cut {sorted(cut)} not a subset of 0..{n - 1}")
    if 0 in cut:
        cut = frozenset(range(n)) - cut
    if not cut or len(cut) == n:
        raise ValueError("trivial cut")
    return cut


def enumerate_cuts(n: int) -> list[frozenset[int]]:
    """All 2**(n-1) - 1 canonical nontrivial cuts of {0..n-1}, in a fixed
    order (ascending bitmask over elements 1..n-1)."""
    if n < 2:
        raise ValueError("cuts need at least two points")
    if n > MAX_EXACT_POINTS:
        raise CutSizeError(n)
    return [_mask_to_cut(m) for m in range(1, 2 ** (n - 1))]


def _mask_to_cut(mask: int) -> frozenset[int]:
    out = []
    j = 1
    while mask:
        if mask & 1:
            out.append(j)
        mask >>= 1
        j += 1
    return frozenset(out)


def _cut_to_mask(cut: frozenset[int]) -> int:
    mask = 0
    for j in cut:
        mask |= 1 << (j - 1)
    return mask


@lru_cache(maxsize=8)
def _pair_delta_matrix(n: int) -> np.ndarray:
    """delta_S(i,j) for every canonical cut (rows) and pair i<j (columns,
    row-major order of np.triu_indices)."""
    masks = np.arange(1, 2 ** (n - 1), dtype=np.uint32)
    mem = np.zeros((masks.size, n), dtype=bool)
    for j in range(1, n):
        mem[:, j] = (masks >> (j - 1)) & 1
    iu, ju = np.triu_indices(n, 1)
    return (mem[:, iu] ^ mem[:, ju]).astype(np.float64)


def _pair_vector(d: np.ndarray) -> np.ndarray:
    iu, ju = np.triu_indices(d.shape[0], 1)
    return d[iu, ju]


@dataclasses.dataclass(frozen=True)
class CutMeasure:
    """Nonnegative weights on canonical nontrivial cuts of {0..n-1}."""

    n: int
    weights: dict[frozenset[int], float]

    @classmethod
    def from_items(cls, n: int, items: Iterable[tuple[Iterable[int], float]]) -> "CutMeasure":
        weights: dict[frozenset[int], float] = {}
        for s, w in items:
            w = float(w)
            if w < 0:
                raise ValueError(f"cut weight must be nonnegative, got {w}")
            cut = canonical_cut(s, n)
            weights[cut] = weights.get(cut, 0.0) + w
        return cls(n, weights)

    def sorted_items(self) -> list[tuple[frozenset[int], float]]:
        return sorted(self.weights.items(), key=lambda kv: _cut_to_mask(kv[0]))

    @property
    def support_size(self) -> int:
        return sum(1 for w in self.weights.values() if w > 0)

    def induced_matrix(self) -> np.ndarray:
        """The pseudometric sum_S mu_S * delta_S as a full matrix."""
        d = np.zeros((self.n, self.n))
        for cut, w in self.sorted_items():
            side = np.zeros(self.n, dtype=bool)
            side[list(cut)] = True
            gap = side[:, None] ^ side[None, :]
            d[gap] += w
        return d


@dataclasses.dataclass(frozen=True)
class L1Embedding:
    """Labeled points with finite coordinate vectors under the l1 distance."""

    labels: tuple[str, ...]
    coords: np.ndarray  # (n, dim)

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[0] != len(self.labels):
            raise ValueError("coords must be one row of equal length per label")
        if not np.all(np.isfinite(coords)):
            raise ValueError("coordinates must be finite")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def pairwise(self) -> np.ndarray:
        if self.dim == 0:
            return np.zeros((len(self.labels), len(self.labels)))
        return cdist(self.coords, self.coords, metric="cityblock")

    def rescale(self, factor: float) -> "L1Embedding":
        return L1Embedding(self.labels, self.coords * factor)


@dataclasses.dataclass(frozen=True)
class DistortionCertificate:
    """Two-sided scaling window of an embedding against a reference metric.

    value = upper_scale / lower_scale; for LP certificates it equals the LP
    optimum and the measure realizes it.  mode is "EXACT" unless produced by
    the sampled-cut fallback, which can only certify an upper bound.
    """

    value: float
    lower_scale: float
    upper_scale: float
    witness_low: tuple[str, str] | None
    witness_high: tuple[str, str] | None
    measure: CutMeasure | None = None
    mode: str = "EXACT"


@dataclasses.dataclass(frozen=True)
class NotInCutCone:
    """Separating certificate: pair coefficients y with y.delta_S <= 0 for
    every cut S but y.d > 0, witnessing that d is not in the cut cone."""

    labels: tuple[str, ...]
    pair_coefficients: np.ndarray  # over pairs in triu order
    violation: float
    max_over_cuts: float


def _require_small(n: int):
    if n > MAX_EXACT_POINTS:
        raise CutSizeError(n)


def _gauge_matrix(obj) -> tuple[tuple[str, ...], np.ndarray]:
    if isinstance(obj, FiniteMetricSpace):
        return obj.labels, obj.dist
    d = _square(obj)
    return tuple(f"p{i}" for i in range(d.shape[0])), d


def _check_gauge(d: np.ndarray, tol: float = DEFAULT_TOL):
    if np.abs(np.diagonal(d)).max(initial=0.0) > tol:
        raise ValueError("dissimilarity must vanish on the diagonal")
    if np.abs(d - d.T).max(initial=0.0) > tol:
        raise ValueError("dissimilarity must be symmetric")
    off = ~np.eye(d.shape[0], dtype=bool)
    if d.shape[0] > 1 and d[off].min() <= 0:
        raise ValueError("dissimilarity must be positive off the diagonal")


def _solve_c1(labels: tuple[str, ...], d: np.ndarray) -> DistortionCertificate:
    n = d.shape[0]
    _require_small(n)
    if n < 2:
        return DistortionCertificate(1.0, 1.0, 1.0, None, None, CutMeasure(n, {}))
    delta = _pair_delta_matrix(n)
    ncuts, npairs = delta.shape
    dvec = _pair_vector(d)
    cost = np.zeros(ncuts + 1)
    cost[-1] = 1.0
    a_ub = np.vstack([
        np.hstack([delta.T, -dvec[:, None]]),          # L(mu) - t*d <= 0
        np.hstack([-delta.T, np.zeros((npairs, 1))]),  # -L(mu) <= -d
    ])
    b_ub = np.concatenate([np.zeros(npairs), -dvec])
    bounds = [(0, None)] * ncuts + [(1, None)]
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=bounds,
                  method=_LP_METHOD, options=_LP_OPTIONS)
    if res.status != 0:
        raise SolverError(f"distortion LP failed (status {res.status}): {res.message}")
    mu = res.x[:ncuts]
    value = float(res.x[-1])
    realized = delta.T @ mu
    ratios = realized / dvec
    lo, hi = int(np.argmin(ratios)), int(np.argmax(ratios))
    iu, ju = np.triu_indices(n, 1)
    cuts = enumerate_cuts(n)
    measure = CutMeasure(n, {cuts[k]: float(mu[k]) for k in range(ncuts)
                             if mu[k] > _WEIGHT_FLOOR})
    return DistortionCertificate(
        value=value,
        lower_scale=float(ratios[lo]),
        upper_scale=float(ratios[hi]),
        witness_low=(labels[iu[lo]], labels[ju[lo]]),
        witness_high=(labels[iu[hi]], labels[ju[hi]]),
        measure=measure,
    )


def exact_c1(space: FiniteMetricSpace) -> DistortionCertificate:
    """Exact minimal L1 distortion of a finite metric, with a realizing cut
    measure.  value = 1 iff the metric lies in the cut cone (up to LP
    tolerance ~1e-7); the LP cannot be infeasible, so any solver failure is
    surfaced as SolverError."""
    if not isinstance(space, FiniteMetricSpace):
        raise TypeError("exact_c1 expects a FiniteMetricSpace; "
                        "use exact_c1_gauge for general dissimilarities")
    return _solve_c1(space.labels, space.dist)


def exact_c1_gauge(obj) -> DistortionCertificate:
    """exact_c1 for a general symmetric dissimilarity (zero diagonal,
    positive off it) that need not satisfy the triangle inequality: the
    optimal two-sided factor K with g <= ||psi(x)-psi(y)|| <= K*g."""
    labels, d = _gauge_matrix(obj)
    _check_gauge(d)
    return _solve_c1(labels, d)


def feasible_with_distortion(space: FiniteMetricSpace, target: float) -> bool:
    """Whether some cut measure satisfies d <= L(mu) <= target*d."""
    if target < 1:
        raise ValueError(f"target distortion must be >= 1, got {target}")
    d = space.dist
    n = d.shape[0]
    _require_small(n)
    if n < 2:
        return True
    delta = _pair_delta_matrix(n)
    ncuts, npairs = delta.shape
    dvec = _pair_vector(d)
    a_ub = np.vstack([delta.T, -delta.T])
    b_ub = np.concatenate([target * dvec, -dvec])
    res = linprog(np.zeros(ncuts), A_ub=a_ub, b_ub=b_ub,
                  bounds=[(0, None)] * ncuts, method=_LP_METHOD, options=_LP_OPTIONS)
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    raise SolverError(f"feasibility LP failed (status {res.status}): {res.message}")


def embed_isometric(space: FiniteMetricSpace):
    """Cut measure reproducing d exactly, or a NotInCutCone separation.

    Feasible measures are checked to reproduce d within 1e-8 at every pair.
    On infeasibility the separating inequality is found by maximizing y.d
    over the polytope {y : y.delta_S <= 0 for all S, |y| <= 1}.
    """
    d = space.dist
    n = d.shape[0]
    _require_small(n)
    if n < 2:
        return CutMeasure(n, {})
    delta = _pair_delta_matrix(n)
    ncuts, npairs = delta.shape
    dvec = _pair_vector(d)
    res = linprog(np.ones(ncuts), A_eq=delta.T, b_eq=dvec,
                  bounds=[(0, None)] * ncuts, method=_LP_METHOD, options=_LP_OPTIONS)
    if res.status == 0:
        mu = res.x
        gap = np.abs(delta.T @ mu - dvec).max()
        if gap > 1e-8:
            raise SolverError(f"isometric measure off by {gap:.3g} > 1e-8")
        cuts = enumerate_cuts(n)
        return CutMeasure(n, {cuts[k]: float(mu[k]) for k in range(ncuts)
                              if mu[k] > _WEIGHT_FLOOR})
    if res.status != 2:
        raise SolverError(f"isometric LP failed (status {res.status}): {res.message}")
    sep = linprog(-dvec, A_ub=delta, b_ub=np.zeros(ncuts),
                  bounds=[(-1, 1)] * npairs, method=_LP_METHOD, options=_LP_OPTIONS)
    if sep.status != 0:
        raise SolverError(f"separation LP failed (status {sep.status}): {sep.message}")
    y = sep.x
    return NotInCutCone(
        labels=space.labels,
        pair_coefficients=y,
        violation=float(dvec @ y),
        max_over_cuts=float((delta @ y).max()),
    )


def cut_measure_to_embedding(measure: CutMeasure,
                             labels: Sequence[str] | None = None) -> L1Embedding:
    """One coordinate per positive-weight cut: coord_S(x) = mu_S * [x in S].

    The induced l1 distance reproduces sum_S mu_S * delta_S exactly.
    """
    n = measure.n
    if labels is None:
        labels = tuple(f"p{i}" for i in range(n))
    labels = tuple(labels)
    if len(labels) != n:
        raise ValueError(f"{len(labels)} labels for a measure on {n} points")
    items = [(cut, w) for cut, w in measure.sorted_items() if w > 0]
    coords = np.zeros((n, len(items)))
    for col, (cut, w) in enumerate(items):
        coords[list(cut), col] = w
    return L1Embedding(labels, coords)


def measure_distortion(embedding: L1Embedding, target) -> DistortionCertificate:
    """Distortion of an embedding against a reference metric: the ratio of
    the extremal pair scalings.  A collapsed distinct pair yields an
    infinite-distortion report naming that pair."""
    if isinstance(target, FiniteMetricSpace):
        if embedding.labels != target.labels:
            raise ValueError("embedding and metric must share the label sequence")
        d = target.dist
    else:
        d = _square(target)
        if d.shape[0] != len(embedding.labels):
            raise ValueError("embedding and matrix sizes differ")
    n = d.shape[0]
    if n < 2:
        return DistortionCertificate(1.0, 1.0, 1.0, None, None)
    e = _pair_vector(embedding.pairwise())
    dvec = _pair_vector(d)
    iu, ju = np.triu_indices(n, 1)
    collapsed = np.nonzero(e <= 0)[0]
    if collapsed.size:
        k = int(collapsed[0])
        return DistortionCertificate(
            value=math.inf, lower_scale=0.0,
            upper_scale=float(np.max(e / dvec)),
            witness_low=(embedding.labels[iu[k]], embedding.labels[ju[k]]),
            witness_high=None,
        )
    ratios = e / dvec
    lo, hi = int(np.argmin(ratios)), int(np.argmax(ratios))
    return DistortionCertificate(
        value=float(ratios[hi] / ratios[lo]),
        lower_scale=float(ratios[lo]),
        upper_scale=float(ratios[hi]),
        witness_low=(embedding.labels[iu[lo]], embedding.labels[ju[lo]]),
        witness_high=(embedding.labels[iu[hi]], embedding.labels[ju[hi]]),
    )


def sampled_c1_upper_bound(space: FiniteMetricSpace, num_cuts: int,
                           seed: int) -> DistortionCertificate:
    """Upper bound on exact_c1 from a random cut subset (UPPER_BOUND_ONLY).

    All singleton cuts are always included, which keeps the LP feasible; the
    remaining cuts are sampled without replacement from a seeded generator.
    This is the documented fallback beyond the n <= 16 exact cap.
    """
    d = space.dist
    n = d.shape[0]
    if n > 64:
        raise ValueError("sampled mode supports at most 64 points")
    if n < 2:
        return DistortionCertificate(1.0, 1.0, 1.0, None, None,
                                     CutMeasure(n, {}), mode="UPPER_BOUND_ONLY")
    rng = np.random.default_rng(seed)
    full = (1 << (n - 1)) - 1
    masks = {1 << (j - 1) for j in range(1, n)}
    masks.add(full)  # the singleton {0} canonicalizes to the full complement
    while len(masks) < min(num_cuts, full) :
        draw = int(rng.integers(1, full + 1))
        masks.add(draw)
    mask_list = sorted(masks)
    mem = np.zeros((len(mask_list), n), dtype=bool)
    for row, m in enumerate(mask_list):
        for j in range(1, n):
            mem[row, j] = (m >> (j - 1)) & 1
    iu, ju = np.triu_indices(n, 1)
    delta = (mem[:, iu] ^ mem[:, ju]).astype(float)
    ncuts, npairs = delta.shape
    dvec = _pair_vector(d)
    cost = np.zeros(ncuts + 1)
    cost[-1] = 1.0
    a_ub = np.vstack([
        np.hstack([delta.T, -dvec[:, None]]),
        np.hstack([-delta.T, np.zeros((npairs, 1))]),
    ])
    b_ub = np.concatenate([np.zeros(npairs), -dvec])
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub,
                  bounds=[(0, None)] * ncuts + [(1, None)],
                  method=_LP_METHOD, options=_LP_OPTIONS)
    if res.status != 0:
        raise SolverError(f"sampled LP failed (status {res.status}): {res.message}")
    mu = res.x[:ncuts]
    realized = delta.T @ mu
    ratios = realized / dvec
    lo, hi = int(np.argmin(ratios)), int(np.argmax(ratios))
    measure = CutMeasure.from_items(
        n, [(_mask_to_cut(mask_list[k]), float(mu[k])) for k in range(ncuts)
            if mu[k] > _WEIGHT_FLOOR])
    return DistortionCertificate(
        value=float(res.x[-1]),
        lower_scale=float(ratios[lo]),
        upper_scale=float(ratios[hi]),
        witness_low=(space.labels[iu[lo]], space.labels[ju[lo]]),
        witness_high=(space.labels[iu[hi]], space.labels[ju[hi]]),
        measure=measure,
        mode="UPPER_BOUND_ONLY",
    )
