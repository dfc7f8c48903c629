"""Eventually-constant double-limit tableaux.

A finite model of iterated distance limits along two bounded sequences: the
tableau holds d(x_n, y_m), every row and column is declared eventually
constant, S_m is the column-m tail, L_n the row-n tail, and S, L are the
tails of those sequences in turn.  For sequences in a stable space the two
iterated limits agree; in general the triangle inequality still forces
S <= 3L, which is the bound checked here.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .metrics import DEFAULT_TOL, FiniteMetricSpace


class TableauError(ValueError):
    """Declared tails do not match the trailing entries."""


@dataclasses.dataclass(frozen=True)
class DoubleLimitTableau:
    """Entries d[n][m] plus declared row/column tails.

    row_tail_index[n] is the first column from which row n equals
    row_tail_value[n] (the row limit L_n); likewise for columns and S_m.  A
    tail index equal to the table size declares a limit that the finite
    window never reaches; such declarations are accepted but recorded in
    vacuous_rows / vacuous_cols.  row_limit (L) and col_limit (S) are the
    tails of the L_n and S_m sequences themselves.
    """

    entries: np.ndarray
    row_tail_index: tuple[int, ...]
    row_tail_value: tuple[float, ...]
    col_tail_index: tuple[int, ...]
    col_tail_value: tuple[float, ...]
    row_limit: float
    col_limit: float

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=float)
        if e.ndim != 2 or e.size == 0:
            raise TableauError("entries must form a nonempty 2-d array")
        if not np.all(np.isfinite(e)) or e.min() < 0:
            raise TableauError("entries must be finite and nonnegative")
        rows, cols = e.shape
        if len(self.row_tail_index) != rows or len(self.col_tail_index) != cols:
            raise TableauError("one tail declaration per row and per column required")
        for n in range(rows):
            k = self.row_tail_index[n]
            if not 0 <= k <= cols:
                raise TableauError(f"row {n} tail index {k} out of range")
            tail = e[n, k:]
            if tail.size and np.abs(tail - self.row_tail_value[n]).max() > DEFAULT_TOL:
                raise TableauError(f"row {n} trailing entries differ from declared "
                                   f"tail {self.row_tail_value[n]}")
        for m in range(cols):
            k = self.col_tail_index[m]
            if not 0 <= k <= rows:
                raise TableauError(f"column {m} tail index {k} out of range")
            tail = e[self.col_tail_index[m]:, m]
            if tail.size and np.abs(tail - self.col_tail_value[m]).max() > DEFAULT_TOL:
                raise TableauError(f"column {m} trailing entries differ from declared "
                                   f"tail {self.col_tail_value[m]}")
        e = e.copy()
        e.flags.writeable = False
        object.__setattr__(self, "entries", e)

    @property
    def vacuous_rows(self) -> tuple[int, ...]:
        return tuple(n for n, k in enumerate(self.row_tail_index)
                     if k >= self.entries.shape[1])

    @property
    def vacuous_cols(self) -> tuple[int, ...]:
        return tuple(m for m, k in enumerate(self.col_tail_index)
                     if k >= self.entries.shape[0])

    def iterated_limits(self) -> tuple[float, float]:
        """(S, L): column-then-row limit and row-then-column limit."""
        return self.col_limit, self.row_limit

    def stability_gap(self) -> float:
        """3L - S; nonnegative for tableaux of distances in a metric space."""
        return 3.0 * self.row_limit - self.col_limit

    def satisfies_stability_bound(self, tol: float = DEFAULT_TOL) -> bool:
        return self.stability_gap() >= -tol

    @classmethod
    def from_point_sequences(cls, space: FiniteMetricSpace, x_seq, y_seq,
                             tol: float = DEFAULT_TOL) -> "DoubleLimitTableau":
        """Tableau d(x_n, y_m) for two point sequences given by labels.

        Both sequences must be eventually constant (the finite stand-in for
        a convergent subsequence); the tails are detected from the data and
        every declared limit is realized inside the window.
        """
        xi = [space.index(x) for x in x_seq]
        yi = [space.index(y) for y in y_seq]
        if not xi or not yi:
            raise TableauError("both sequences must be nonempty")
        if xi[-1] != xi[_run_start(xi)] or yi[-1] != yi[_run_start(yi)]:
            raise AssertionError("unreachable: run detection broke")
        entries = space.dist[np.ix_(xi, yi)]
        row_idx, row_val = [], []
        for n in range(len(xi)):
            k = _tail_start(entries[n, :], tol)
            row_idx.append(k)
            row_val.append(float(entries[n, -1]))
        col_idx, col_val = [], []
        for m in range(len(yi)):
            k = _tail_start(entries[:, m], tol)
            col_idx.append(k)
            col_val.append(float(entries[-1, m]))
        return cls(entries, tuple(row_idx), tuple(row_val), tuple(col_idx),
                   tuple(col_val),
                   row_limit=float(row_val[-1]), col_limit=float(col_val[-1]))


def _tail_start(values: np.ndarray, tol: float) -> int:
    """First index from which the vector is constant (equal to its last entry)."""
    k = values.size - 1
    while k > 0 and abs(values[k - 1] - values[-1]) <= tol:
        k -= 1
    return k


def _run_start(seq) -> int:
    k = len(seq) - 1
    while k > 0 and seq[k - 1] == seq[-1]:
        k -= 1
    return k
