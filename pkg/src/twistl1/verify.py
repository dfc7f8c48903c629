"""Formula-verification harness: closed forms against the shortest-path
oracle, restriction identities, the single-crossing reduction, and the
two-sided cross-distance bounds, over a parameter grid plus seeded
generalized instances.

Deterministic given (config, seed); the report embeds both so a run can be
reproduced exactly.
"""

from __future__ import annotations

import dataclasses
import time

import numpy as np

from .gallery import power_twisted_cube
from .metrics import DEFAULT_TOL
from .randgen import random_comparable_spec, random_compatible_spec
from .twisted import (
    TwistedUnionSpace,
    build_twisted_union,
    closed_form_concave,
    closed_form_power,
    cross_bounds_comparable,
    cross_bounds_lipschitz,
    cross_distance_oracle,
)

ORACLE_TOL = 1e-12  # float-roundoff allowance for two summation orders


@dataclasses.dataclass(frozen=True)
class CheckResult:
    check: str
    instance: str
    ok: bool
    worst: float  # signed slack; negative means violated
    witness: tuple[str, str] | None

    def to_json(self) -> dict:
        return {
            "check": self.check, "instance": self.instance, "ok": self.ok,
            "worst": self.worst,
            "witness": list(self.witness) if self.witness else None,
        }


@dataclasses.dataclass
class RunReport:
    config: dict
    results: list[CheckResult]
    elapsed_s: float

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def failures(self) -> list[CheckResult]:
        return [r for r in self.results if not r.ok]

    def to_json(self) -> dict:
        from .io import SCHEMA_VERSION
        return {
            "schema_version": SCHEMA_VERSION,
            "config": self.config,
            "ok": self.ok,
            "elapsed_s": self.elapsed_s,
            "results": [r.to_json() for r in self.results],
        }


def _result(check: str, instance: str, slack: np.ndarray, labels,
            tol: float) -> CheckResult:
    """Summarize a slack matrix over index pairs; slack >= -tol everywhere passes."""
    flat = slack.reshape(-1)
    k = int(np.argmin(flat))
    i, j = np.unravel_index(k, slack.shape)
    return CheckResult(check, instance, bool(flat[k] >= -tol), float(flat[k]),
                       (str(labels[i]), str(labels[j])))


def check_cube_instance(n: int, alpha: float, r: float, tol: float = DEFAULT_TOL,
                        inject_error: bool = False) -> list[CheckResult]:
    """All formula checks for one power twisted cube."""
    spec = power_twisted_cube(n, alpha, r)
    space = build_twisted_union(spec)
    name = f"cube(n={n},alpha={alpha},r={r})"
    labels = spec.labels
    size = spec.n
    out = []

    closed = np.zeros((2 * size, 2 * size))
    for a in (0, 1):
        for b in (0, 1):
            for i in range(size):
                for j in range(size):
                    closed[a * size + i, b * size + j] = closed_form_power(
                        labels[i], a, labels[j], b, alpha, r)
    if inject_error:
        closed[0, size] += 0.5  # harness sanity probe: must be caught below
    gap = np.abs(closed - space.dist)
    out.append(_result("closed-form-power", name, tol - gap, space.labels, 0.0))

    codes = np.array([[int(c) for c in lab] for lab in labels])
    base = (codes[:, None, :] != codes[None, :, :]).sum(axis=2).astype(float)
    concave = np.zeros((2 * size, 2 * size))
    g0 = PowerGauge(1.0 / (2.0 * alpha))
    g1 = PowerGauge(1.0, scale=r ** (1.0 - 2.0 * alpha))
    for a in (0, 1):
        for b in (0, 1):
            for i in range(size):
                for j in range(size):
                    concave[a * size + i, b * size + j] = closed_form_concave(
                        base[i, j], a, b, g0, g1, r)
    gap = np.abs(concave - space.dist)
    out.append(_result("closed-form-concave", name, tol - gap, space.labels, 0.0))

    out.extend(restriction_checks(space, name))
    out.append(oracle_check(space, name))
    out.extend(bound_checks(space, name, tol))
    return out


def restriction_checks(space: TwistedUnionSpace, name: str) -> list[CheckResult]:
    """The union must restrict to d0, d1, and the joining weights exactly."""
    spec = space.spec
    n = spec.n
    out = []
    for block, want, check in (
        (space.dist[:n, :n], spec.d0.dist, "restriction-copy0"),
        (space.dist[n:, n:], spec.d1.dist, "restriction-copy1"),
    ):
        gap = np.abs(block - want)
        out.append(_result(check, name, -gap, spec.labels, 0.0))
    joins = space.dist[np.arange(n), n + np.arange(n)]
    gap = np.abs(joins - spec.joiner.values)[:, None]
    out.append(_result("restriction-joining", name, -gap, spec.labels, 0.0))
    return out


def oracle_check(space: TwistedUnionSpace, name: str) -> CheckResult:
    """Single-crossing reduction against the shortest-path cross block."""
    n = space.n
    gap = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            value, _ = cross_distance_oracle(space, i, j)
            gap[i, j] = abs(value - space.cross_distance(i, j))
    return _result("cross-oracle", name, ORACLE_TOL - gap, space.spec.labels, 0.0)


def bound_checks(space: TwistedUnionSpace, name: str,
                 tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Two-sided cross bounds at every cross pair, plus the exact r + h value
    whenever it applies (constant joiner, min of the metrics a metric)."""
    n = space.n
    labels = space.spec.labels
    lip_low = np.zeros((n, n))
    lip_up = np.zeros((n, n))
    cmp_low = np.zeros((n, n))
    cmp_up = np.zeros((n, n))
    exact = np.zeros((n, n))
    has_exact = False
    for i in range(n):
        for j in range(n):
            d = space.cross_distance(i, j)
            lb = cross_bounds_lipschitz(space, i, j)
            lip_low[i, j] = d - lb.lower
            lip_up[i, j] = lb.upper - d
            cb = cross_bounds_comparable(space, i, j)
            cmp_low[i, j] = d - cb.lower
            cmp_up[i, j] = cb.upper - d
            if lb.exact is not None:
                has_exact = True
                exact[i, j] = abs(d - lb.exact)
    out = [
        _result("cross-bounds-joiner-lower", name, lip_low, labels, tol),
        _result("cross-bounds-joiner-upper", name, lip_up, labels, tol),
        _result("cross-bounds-comparable-lower", name, cmp_low, labels, tol),
        _result("cross-bounds-comparable-upper", name, cmp_up, labels, tol),
    ]
    if has_exact:
        out.append(_result("cross-exact-r-plus-h", name, tol - exact, labels, 0.0))
    return out


def check_generalized_instance(seed: int, size: int,
                               tol: float = DEFAULT_TOL) -> list[CheckResult]:
    """Restriction, oracle, and bound checks on one seeded function-joiner
    union plus one seeded comparable union."""
    rng = np.random.default_rng(seed)
    out = []
    for kind, spec in (("generalized", random_compatible_spec(rng, size)),
                       ("comparable", random_comparable_spec(rng, size, constant=False))):
        space = build_twisted_union(spec)
        name = f"{kind}(seed={seed},n={size})"
        out.extend(restriction_checks(space, name))
        out.append(oracle_check(space, name))
        out.extend(bound_checks(space, name, tol))
    return out


def run_verification(dims=(1, 2, 3, 4, 5), alphas=(0.6, 0.75, 1.0),
                     rs=(0.5, 1.0, 2.0), generalized: int = 25,
                     sizes=(4, 8, 12), seed: int = 0, tol: float = DEFAULT_TOL,
                     inject_error: bool = False) -> RunReport:
    if not dims or not alphas or not rs:
        raise ValueError("parameter grid must be nonempty")
    t0 = time.time()
    results = []
    first = True
    for n in dims:
        for alpha in alphas:
            for r in rs:
                results.extend(check_cube_instance(
                    n, alpha, r, tol, inject_error=inject_error and first))
                first = False
    for k in range(generalized):
        size = sizes[k % len(sizes)]
        results.extend(check_generalized_instance(seed * 100003 + k, size, tol))
    config = {
        "dims": list(dims), "alphas": list(alphas), "rs": list(rs),
        "generalized": generalized, "sizes": list(sizes), "seed": seed,
        "tolerance": tol, "inject_error": inject_error,
    }
    return RunReport(config, results, time.time() - t0)
