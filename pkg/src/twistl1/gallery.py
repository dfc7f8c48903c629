"""Generators for the named instance families.

Twisted Hamming cubes (power/linear and general concave weights), the stable
union whose L1 distortion grows toward 3, its double-limit tableau, and exact
equilateral embeddings.
"""

from __future__ import annotations

import dataclasses
import itertools
from collections import deque
from typing import Sequence

import numpy as np

from .cutcone import (
    DistortionCertificate,
    L1Embedding,
    MAX_EXACT_POINTS,
    exact_c1,
)
from .gauges import CappedGauge, ConcaveGauge, PowerGauge
from .metrics import FiniteMetricSpace, apply_concave
from .tableau import DoubleLimitTableau
from .twisted import Joiner, TwistedUnionSpec

MAX_CUBE_DIM = 10


def hamming_cube(n: int) -> FiniteMetricSpace:
    """The n-cube {0,1}**n under the Hamming distance, labels in
    lexicographic bitstring order."""
    if not 1 <= n <= MAX_CUBE_DIM:
        raise ValueError(f"cube dimension must lie in 1..{MAX_CUBE_DIM}, got {n}")
    labels = ["".join(bits) for bits in itertools.product("01", repeat=n)]
    codes = np.array([[int(c) for c in lab] for lab in labels], dtype=np.int8)
    dist = (codes[:, None, :] != codes[None, :, :]).sum(axis=2).astype(float)
    return FiniteMetricSpace(labels, dist, validate=False)


def _cube_base(n: int, points: Sequence[str] | None) -> FiniteMetricSpace:
    cube = hamming_cube(n)
    if points is None:
        return cube
    return cube.subspace(list(points))


def power_twisted_cube(n: int, alpha: float, r: float,
                       points: Sequence[str] | None = None) -> TwistedUnionSpec:
    """Twisted cube with copy-0 weight t**(1/(2*alpha)) and copy-1 weight
    t/r**(2*alpha-1), both capped at 2r plus the other (the caps never bite
    on copy 0 and keep the gap below 2r everywhere).

    ``points`` restricts the base to a subset of the cube's bitstrings.
    """
    if not 0.5 < alpha <= 1:
        raise ValueError(f"alpha must lie in (1/2, 1], got {alpha}")
    if r <= 0:
        raise ValueError(f"joining weight must be positive, got {r}")
    w0 = PowerGauge(1.0 / (2.0 * alpha))
    w1 = PowerGauge(1.0, scale=r ** (1.0 - 2.0 * alpha))
    return concave_twisted_cube(n, w0, w1, r, points)


def concave_twisted_cube(n: int, w0: ConcaveGauge, w1: ConcaveGauge, r: float,
                         points: Sequence[str] | None = None) -> TwistedUnionSpec:
    """Twisted cube with arbitrary concave gauge weights w0, w1 of the
    Hamming distance, each capped at 2r plus the other so the admissibility
    gap |d0 - d1| <= 2r holds by construction."""
    if r <= 0:
        raise ValueError(f"joining weight must be positive, got {r}")
    base = _cube_base(n, points)
    v0 = CappedGauge(w0, 2.0 * r, w1)
    v1 = CappedGauge(w1, 2.0 * r, w0)
    d0 = apply_concave(base, v0)
    d1 = apply_concave(base, v1)
    return TwistedUnionSpec(d0, d1, Joiner.fixed(r, len(base)))


@dataclasses.dataclass(frozen=True)
class StableUnion:
    """Two equilateral halves low1..lowk and up1..upk joined by the edges
    low_i ~ up_j exactly when j >= i, under the unweighted shortest-path
    metric:

        d(low_i, low_j) = d(up_i, up_j) = 2   (i != j)
        d(low_i, up_j)  = 1 if j >= i else 3
    """

    k: int
    space: FiniteMetricSpace
    adjacency: np.ndarray

    @property
    def low_labels(self) -> tuple[str, ...]:
        return self.space.labels[: self.k]

    @property
    def up_labels(self) -> tuple[str, ...]:
        return self.space.labels[self.k:]

    def half(self, which: str) -> FiniteMetricSpace:
        if which == "low":
            return self.space.subspace(range(self.k))
        if which == "up":
            return self.space.subspace(range(self.k, 2 * self.k))
        raise ValueError("which must be 'low' or 'up'")


def stable_union_space(k: int) -> StableUnion:
    """Build the k-truncated stable union; the closed-form matrix is checked
    against breadth-first distances on the defining graph before returning."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    labels = [f"low{i}" for i in range(1, k + 1)] + [f"up{i}" for i in range(1, k + 1)]
    size = 2 * k
    dist = np.zeros((size, size))
    adj = np.zeros((size, size), dtype=bool)
    for i in range(k):
        for j in range(k):
            if i != j:
                dist[i, j] = 2.0
                dist[k + i, k + j] = 2.0
            dist[i, k + j] = 1.0 if j >= i else 3.0
            dist[k + j, i] = dist[i, k + j]
            if j >= i:
                adj[i, k + j] = adj[k + j, i] = True
    bfs = _bfs_distances(adj)
    if not np.array_equal(bfs, dist):
        raise AssertionError("closed-form stable-union distances disagree with BFS")
    return StableUnion(k, FiniteMetricSpace(labels, dist), adj)


def _bfs_distances(adj: np.ndarray) -> np.ndarray:
    size = adj.shape[0]
    out = np.full((size, size), np.inf)
    for s in range(size):
        out[s, s] = 0.0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in np.nonzero(adj[u])[0]:
                if out[s, v] == np.inf:
                    out[s, v] = out[s, u] + 1.0
                    queue.append(int(v))
    return out


def equilateral_embedding(k: int, c: float,
                          labels: Sequence[str] | None = None) -> L1Embedding:
    """k points pairwise at distance c: point i sits at (c/2) times the i-th
    unit vector, so each pair differs by c/2 in exactly two coordinates."""
    if k < 1:
        raise ValueError(f"need k >= 1, got {k}")
    if c <= 0:
        raise ValueError(f"pairwise distance must be positive, got {c}")
    if labels is None:
        labels = [f"p{i}" for i in range(k)]
    return L1Embedding(tuple(labels), (c / 2.0) * np.eye(k))


def stable_union_tableau(k: int) -> DoubleLimitTableau:
    """Tableau d(low_n, up_m) of the stable union: rows settle at 1 (from
    column n on), columns settle at 3 (from row m+1 on; the last column's
    tail lies beyond the window and is declared), so S = 3 and L = 1 and the
    stability bound S <= 3L holds with equality."""
    if k < 3:
        raise ValueError(f"need k >= 3 so the tails are realized, got {k}")
    rows = np.arange(1, k + 1)[:, None]
    cols = np.arange(1, k + 1)[None, :]
    entries = np.where(cols >= rows, 1.0, 3.0)
    return DoubleLimitTableau(
        entries,
        row_tail_index=tuple(n - 1 for n in range(1, k + 1)),
        row_tail_value=tuple(1.0 for _ in range(k)),
        col_tail_index=tuple(m for m in range(1, k + 1)),
        col_tail_value=tuple(3.0 for _ in range(k)),
        row_limit=1.0,
        col_limit=3.0,
    )


MAX_SCAN_K = 8  # 2k points must stay within the exact-cut cap


def c1_growth_scan(kmax: int) -> list[tuple[int, DistortionCertificate]]:
    """Exact minimal L1 distortion of the stable union for k = 2..kmax.

    The k-th space embeds isometrically into the (k+1)-st, so the values are
    nondecreasing; they stay strictly below the infinite-space floor of 3.
    """
    if kmax < 2:
        raise ValueError(f"need kmax >= 2, got {kmax}")
    if kmax > MAX_SCAN_K:
        raise ValueError(f"kmax {kmax} exceeds {MAX_SCAN_K} "
                         f"(2k points above the {MAX_EXACT_POINTS}-point cut cap)")
    out = []
    for k in range(2, kmax + 1):
        out.append((k, exact_c1(stable_union_space(k).space)))
    return out
