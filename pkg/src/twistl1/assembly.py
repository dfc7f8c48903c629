"""Explicit L1 embeddings of twisted unions, assembled from component
embeddings of derived gauges on the base set.

Three assembly routes share one shape: place copy 0 at
(phi0(x), phi1(m0), psi(x), r-channel) and copy 1 at
(phi0(m0), phi1(x), psi(x), 0), so that within a copy the foreign block and
the scalar channel cancel, while across copies the psi block and the scalar
channel alone already dominate the union distance from below.  The routes
differ in which gauges the components embed:

  constant joiner   phi_i for min(d_i, 2r),           psi for min(d0, d1)
  lipschitz joiner  phi_i for min(d_i, r(x)+r(y)),    psi for min(d0, d1)
  pair gauge        phi1 for d1,                      psi for min(f, r(x)+r(y))

(the pair-gauge route drops phi0 and keeps phi1 in both copies).  Components
come from the exact cut-cone LP, normalized so the lower factor is 1; each
route's closed-form distortion bound is derived from the block windows and
the two-sided cross-distance bounds, and is re-validated against the measured
distortion on every instance.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .cutcone import (
    DistortionCertificate,
    L1Embedding,
    cut_measure_to_embedding,
    exact_c1,
    exact_c1_gauge,
    measure_distortion,
)
from .metrics import FiniteMetricSpace
from .twisted import TwistedUnionSpace

_E_FACTOR = math.e / (math.e - 1.0)  # distortion cost of truncating an L1 metric
DEFAULT_VERIFY_TOL = 1e-7


class AssemblyError(ValueError):
    """A component factor or sandwich precondition failed; carries the witness."""

    def __init__(self, message: str, witness: tuple[str, str] | None = None):
        self.witness = witness
        if witness is not None:
            message = f"{message} (witness pair {witness[0]!r}, {witness[1]!r})"
        super().__init__(message)


@dataclasses.dataclass(frozen=True)
class Component:
    """An embedding verified to satisfy lower*g <= ||e(x)-e(y)|| <= upper*g
    against its target gauge g."""

    embedding: L1Embedding
    gauge: np.ndarray
    lower: float
    upper: float

    def rescaled(self, factor: float) -> "Component":
        return Component(self.embedding.rescale(factor), self.gauge,
                         self.lower * factor, self.upper * factor)


def lp_component(labels: Sequence[str], gauge: np.ndarray) -> Component:
    """Optimal-factor component from the cut-cone LP, normalized so the lower
    factor is exactly 1 (coordinates divided by the realized minimum ratio)."""
    cert = exact_c1_gauge(gauge)
    emb = cut_measure_to_embedding(cert.measure, labels)
    if cert.lower_scale <= 0:
        raise AssemblyError("LP component collapsed a pair")
    emb = emb.rescale(1.0 / cert.lower_scale)
    return Component(emb, np.asarray(gauge, dtype=float), 1.0,
                     cert.upper_scale / cert.lower_scale)


class AssembledEmbedding(L1Embedding):
    """L1 embedding with named coordinate blocks.

    Pairwise distances are computed block by block and summed in block
    order, so the distance is exactly the sum of its block distances and the
    same-copy cancellation identities hold bit for bit.
    """

    def __init__(self, labels, coords, block_slices):
        super().__init__(tuple(labels), coords)
        self.block_slices = tuple(block_slices)  # (name, start, stop)

    def pairwise(self) -> np.ndarray:
        total = np.zeros((len(self.labels), len(self.labels)))
        for _, start, stop in self.block_slices:
            total += cdist(self.coords[:, start:stop], self.coords[:, start:stop],
                           metric="cityblock")
        return total

    def block_distance(self, name: str) -> np.ndarray:
        for blk, start, stop in self.block_slices:
            if blk == name:
                return cdist(self.coords[:, start:stop], self.coords[:, start:stop],
                             metric="cityblock")
        raise KeyError(name)


def direct_sum(parts: Sequence[L1Embedding],
               scalars: Sequence[float] | None = None) -> AssembledEmbedding:
    """Coordinate concatenation; the l1 distance of the sum is the sum of the
    parts' distances plus the absolute scalar difference."""
    if not parts:
        raise ValueError("need at least one part")
    labels = parts[0].labels
    for p in parts[1:]:
        if p.labels != labels:
            raise ValueError("direct summands must share one label sequence")
    blocks = [np.asarray(p.coords, dtype=float) for p in parts]
    names = [f"part{i}" for i in range(len(parts))]
    if scalars is not None:
        s = np.asarray(scalars, dtype=float)
        if s.shape != (len(labels),):
            raise ValueError("one scalar per point required")
        blocks.append(s[:, None])
        names.append("scalar")
    slices = []
    start = 0
    for name, blk in zip(names, blocks):
        slices.append((name, start, start + blk.shape[1]))
        start += blk.shape[1]
    return AssembledEmbedding(labels, np.hstack(blocks), slices)


@dataclasses.dataclass(frozen=True)
class AssemblyReport:
    """Outcome of one assembly route on one union instance."""

    route: str
    factors: dict
    derived_bound: float | None
    certificate: DistortionCertificate
    embedding: AssembledEmbedding

    @property
    def bound_satisfied(self) -> bool | None:
        if self.derived_bound is None:
            return None
        return self.certificate.value <= self.derived_bound + 1e-9


# ---------------------------------------------------------------------------
# closed-form distortion bounds, one per route


def constant_joiner_bound(d0_factor: float, d1_factor: float, min_factor: float) -> float:
    """Distortion bound for the constant-joiner assembly with component
    factors F_i = e/(e-1) * D_i on the truncations and K on the minimum:
    copy blocks stay within [d_i, 2*max(F_i, K)*d_i] because
    d_i <= min(d_i,2r) + min(d0,d1) <= 2*d_i, and the cross block within
    [d, 3*max(2F0+2F1+1, K)*d] because r + h is a 3-approximation of d."""
    f0 = _E_FACTOR * d0_factor
    f1 = _E_FACTOR * d1_factor
    return 3.0 * max(2.0 * f0 + 2.0 * f1 + 1.0, min_factor,
                     2.0 * f0, 2.0 * f1, 2.0 * min_factor)


def lipschitz_joiner_bound(c0: float, c1: float, c2: float, lipschitz: float) -> float:
    """Distortion bound for the function-joiner assembly.

    With g_i = min(d_i, r(x)+r(y)), h = min(d0,d1), component factors
    (C0, C1, C2) and |r(x)-r(y)| <= L*h:

      copy 0:  embeddings lie in [d0, 2*max(C0, C2+L)*d0]
      copy 1:  [d1, 2*max(C1, C2)*d1]
      cross:   [d/(1+L), A*max(2C0+2C1+1, C2)*d],  A = max(2L+1, 3)

    using g_i(x,m0) <= 2r(x) at the minimizing basepoint, h + r(x) >=
    (h + max r)/(1+L), and the two-sided cross bounds with constant A.
    """
    a = max(2.0 * lipschitz + 1.0, 3.0)
    upper = max(2.0 * max(c0, c2 + lipschitz),
                2.0 * max(c1, c2),
                a * max(2.0 * c0 + 2.0 * c1 + 1.0, c2))
    return (1.0 + lipschitz) * upper


def pair_gauge_bound(c1: float, c2: float, c3: float, c4: float) -> float:
    """Distortion bound for the pair-gauge assembly.

    With m = min(f, r(x)+r(y)), phi1 factor C1, psi factor C2, and the
    verified sandwich d0/C3 <= d1 + m <= C4*d0 (C3 >= 1):

      copy 0:  [d0/C3, (C4*(max(C1,C2)+1) + 1)*d0]
      copy 1:  [d1, C1*d1]
      cross:   [d, (2*C4+1)*max(C1, 2*C2+1)*d]

    where the cross window uses d <= d1 + r(x) <= (2C+1)*d with the
    comparability constant C <= C4.
    """
    c3 = max(c3, 1.0)
    upper = max(c4 * (max(c1, c2) + 1.0) + 1.0,
                c1,
                (2.0 * c4 + 1.0) * max(c1, 2.0 * c2 + 1.0))
    return c3 * upper


# ---------------------------------------------------------------------------
# assembly internals


def _pairs(n: int):
    return np.triu_indices(n, 1)


def _verify_window(emb: L1Embedding, gauge: np.ndarray, lower: float, upper: float,
                   what: str, tol: float):
    n = len(emb.labels)
    if n < 2:
        return
    iu, ju = _pairs(n)
    e = emb.pairwise()[iu, ju]
    g = np.asarray(gauge)[iu, ju]
    scale = max(float(np.max(g)), 1.0)
    low_slack = e - lower * g
    k = int(np.argmin(low_slack))
    if low_slack[k] < -tol * scale:
        raise AssemblyError(f"{what}: lower factor {lower:.6g} fails",
                            (emb.labels[iu[k]], emb.labels[ju[k]]))
    up_slack = upper * g - e
    k = int(np.argmin(up_slack))
    if up_slack[k] < -tol * scale:
        raise AssemblyError(f"{what}: upper factor {upper:.6g} fails",
                            (emb.labels[iu[k]], emb.labels[ju[k]]))


def _check_labels(space: TwistedUnionSpace, *components: Component):
    for comp in components:
        if comp.embedding.labels != space.spec.labels:
            raise AssemblyError("component labels must match the base point set")


def _basepoint(space: TwistedUnionSpace, m0: int | None) -> int:
    r = space.spec.joiner.values
    best = int(np.argmin(r))
    if m0 is None:
        return best
    if r[m0] > r[best]:
        raise AssemblyError(f"basepoint {space.spec.labels[m0]!r} does not minimize "
                            "the joining weights")
    return int(m0)


def _stack_two_copies(space: TwistedUnionSpace, names, blocks0, blocks1) -> AssembledEmbedding:
    coords = np.vstack([np.hstack(blocks0), np.hstack(blocks1)])
    slices = []
    start = 0
    for name, blk in zip(names, blocks0):
        slices.append((name, start, start + blk.shape[1]))
        start += blk.shape[1]
    return AssembledEmbedding(space.labels, coords, slices)


def _pinned_pair_coords(space: TwistedUnionSpace, phi0: L1Embedding,
                        phi1: L1Embedding, psi: L1Embedding, m0: int,
                        scalar0: np.ndarray, scalar1: np.ndarray) -> AssembledEmbedding:
    """Copy 0 carries phi0(x) with phi1 pinned at the basepoint, copy 1 the
    reverse; psi rides along in both, so it alone survives across copies."""
    n = space.n
    c0 = np.asarray(phi0.coords)
    c1 = np.asarray(phi1.coords)
    cp = np.asarray(psi.coords)
    blocks0 = [c0, np.tile(c1[m0], (n, 1)), cp, scalar0[:, None]]
    blocks1 = [np.tile(c0[m0], (n, 1)), c1, cp, scalar1[:, None]]
    return _stack_two_copies(space, ["phi0", "phi1", "psi", "scalar"], blocks0, blocks1)


def _shared_phi1_coords(space: TwistedUnionSpace, phi1: L1Embedding,
                        psi: L1Embedding, m0: int, scalar0: np.ndarray,
                        scalar1: np.ndarray) -> AssembledEmbedding:
    """phi1 appears identically in both copies (it cancels on copy-1 pairs
    only against itself), while psi is pinned at the basepoint on copy 1."""
    n = space.n
    c1 = np.asarray(phi1.coords)
    cp = np.asarray(psi.coords)
    blocks0 = [c1, cp, scalar0[:, None]]
    blocks1 = [c1, np.tile(cp[m0], (n, 1)), scalar1[:, None]]
    return _stack_two_copies(space, ["phi1", "psi", "scalar"], blocks0, blocks1)


# ---------------------------------------------------------------------------
# the three routes


def assemble_constant_joiner(space: TwistedUnionSpace, phi0: Component,
                             phi1: Component, psi: Component,
                             d0_c1: float, d1_c1: float, m0: int | None = None,
                             component_scale: float = 1.0,
                             tol: float = DEFAULT_VERIFY_TOL) -> AssemblyReport:
    """Constant-joiner assembly: G(x,0) = (phi0(x), phi1(m0), psi(x), r),
    G(x,1) = (phi0(m0), phi1(x), psi(x), 0).

    phi_i must embed min(d_i, 2r) within [1, e/(e-1)*D_i] where D_i is the
    minimal distortion of d_i itself (truncation costs at most e/(e-1));
    psi must embed min(d0, d1) within [1, K].  The measured distortion is
    compared against constant_joiner_bound(D0, D1, K).  component_scale != 1
    shifts both phi windows by that factor and drops the derived bound (the
    scaled variant is only used to probe alternative normalizations).
    """
    spec = space.spec
    if not spec.joiner.constant:
        raise AssemblyError("this route requires a constant joiner")
    _check_labels(space, phi0, phi1, psi)
    r = float(spec.joiner.values[0])
    rho0 = np.minimum(spec.d0.dist, 2.0 * r)
    rho1 = np.minimum(spec.d1.dist, 2.0 * r)
    h = np.minimum(spec.d0.dist, spec.d1.dist)
    if component_scale != 1.0:
        phi0 = phi0.rescaled(component_scale)
        phi1 = phi1.rescaled(component_scale)
    s = component_scale
    f0 = _E_FACTOR * d0_c1
    f1 = _E_FACTOR * d1_c1
    _verify_window(phi0.embedding, rho0, s * 1.0, s * f0, "phi0 vs min(d0,2r)", tol)
    _verify_window(phi1.embedding, rho1, s * 1.0, s * f1, "phi1 vs min(d1,2r)", tol)
    k_factor = psi.upper
    _verify_window(psi.embedding, h, 1.0, k_factor, "psi vs min(d0,d1)", tol)
    m0 = _basepoint(space, m0)
    n = space.n
    emb = _pinned_pair_coords(space, phi0.embedding, phi1.embedding, psi.embedding,
                              m0, np.full(n, r), np.zeros(n))
    cert = measure_distortion(emb, space.dist)
    bound = None
    if component_scale == 1.0:
        bound = constant_joiner_bound(d0_c1, d1_c1, k_factor)
    factors = {
        "d0_c1": d0_c1, "d1_c1": d1_c1,
        "phi0_upper": phi0.upper, "phi1_upper": phi1.upper,
        "min_factor": k_factor, "truncation_factor": _E_FACTOR,
        "component_scale": component_scale, "basepoint": spec.labels[m0],
    }
    return AssemblyReport("constant-joiner", factors, bound, cert, emb)


def assemble_lipschitz_joiner(space: TwistedUnionSpace, phi0: Component,
                              phi1: Component, psi: Component,
                              m0: int | None = None,
                              tol: float = DEFAULT_VERIFY_TOL) -> AssemblyReport:
    """Function-joiner assembly: the same shape with scalar channel r(x) on
    copy 0, requiring phi_i to embed g_i = min(d_i, r(x)+r(y)) and psi to
    embed min(d0, d1), and the basepoint to minimize r."""
    spec = space.spec
    _check_labels(space, phi0, phi1, psi)
    r = spec.joiner.values
    rsum = r[:, None] + r[None, :]
    g0 = np.minimum(spec.d0.dist, rsum)
    g1 = np.minimum(spec.d1.dist, rsum)
    np.fill_diagonal(g0, 0.0)
    np.fill_diagonal(g1, 0.0)
    h = np.minimum(spec.d0.dist, spec.d1.dist)
    c0, c1, c2 = phi0.upper, phi1.upper, psi.upper
    _verify_window(phi0.embedding, g0, 1.0, c0, "phi0 vs min(d0, r+r)", tol)
    _verify_window(phi1.embedding, g1, 1.0, c1, "phi1 vs min(d1, r+r)", tol)
    _verify_window(psi.embedding, h, 1.0, c2, "psi vs min(d0,d1)", tol)
    m0 = _basepoint(space, m0)
    lip = space.derived.lipschitz
    emb = _pinned_pair_coords(space, phi0.embedding, phi1.embedding, psi.embedding,
                              m0, r.copy(), np.zeros(space.n))
    cert = measure_distortion(emb, space.dist)
    bound = lipschitz_joiner_bound(c0, c1, c2, lip)
    factors = {
        "g0_factor": c0, "g1_factor": c1, "min_factor": c2,
        "lipschitz": lip, "basepoint": spec.labels[m0],
    }
    return AssemblyReport("lipschitz-joiner", factors, bound, cert, emb)


def assemble_pair_gauge(space: TwistedUnionSpace, f: np.ndarray, phi1: Component,
                        psi: Component, m0: int | None = None,
                        expected_c3: float | None = None,
                        expected_c4: float | None = None,
                        tol: float = DEFAULT_VERIFY_TOL) -> AssemblyReport:
    """Pair-gauge assembly: F(x,0) = (phi1(x), psi(x), r(x)),
    F(x,1) = (phi1(x), psi(m0), 0).

    f is a nonnegative symmetric pair function with d0/C3 <= d1 + f <= C4*d0;
    psi embeds min(f, r(x)+r(y)) and phi1 embeds d1.  The sandwich constants
    are measured on the instance, checked against the caller's expectations
    when given (refusing with a witness otherwise), and the truncated
    sandwich d0/max(C3,1) <= d1 + min(f, r+r) <= C4*d0 is re-verified
    pairwise before assembling.
    """
    spec = space.spec
    _check_labels(space, phi1, psi)
    f = np.asarray(f, dtype=float)
    n = space.n
    if f.shape != (n, n):
        raise AssemblyError("pair function must be an n-by-n matrix")
    if (f < 0).any() or np.abs(f - f.T).max(initial=0.0) > tol:
        raise AssemblyError("pair function must be nonnegative and symmetric")
    iu, ju = _pairs(n)
    total = spec.d1.dist + f
    c4 = float(np.max(total[iu, ju] / spec.d0.dist[iu, ju])) if n > 1 else 1.0
    c3 = float(np.max(spec.d0.dist[iu, ju] / total[iu, ju])) if n > 1 else 1.0
    if expected_c4 is not None:
        slack = expected_c4 * spec.d0.dist[iu, ju] - total[iu, ju]
        k = int(np.argmin(slack))
        if slack[k] < -tol * max(1.0, float(spec.d0.diameter)):
            raise AssemblyError(f"d1 + f exceeds {expected_c4:.6g}*d0",
                                (spec.labels[iu[k]], spec.labels[ju[k]]))
        c4 = float(expected_c4)
    if expected_c3 is not None:
        slack = total[iu, ju] - spec.d0.dist[iu, ju] / expected_c3
        k = int(np.argmin(slack))
        if slack[k] < -tol * max(1.0, float(spec.d0.diameter)):
            raise AssemblyError(f"d1 + f falls below d0/{expected_c3:.6g}",
                                (spec.labels[iu[k]], spec.labels[ju[k]]))
        c3 = float(expected_c3)
    c3_eff = max(c3, 1.0)
    r = spec.joiner.values
    trunc = np.minimum(f, r[:, None] + r[None, :])
    np.fill_diagonal(trunc, 0.0)
    sandwich = spec.d1.dist + trunc
    lo_slack = sandwich[iu, ju] - spec.d0.dist[iu, ju] / c3_eff
    hi_slack = c4 * spec.d0.dist[iu, ju] - sandwich[iu, ju]
    for slack, side in ((lo_slack, "lower"), (hi_slack, "upper")):
        if slack.size:
            k = int(np.argmin(slack))
            if slack[k] < -tol * max(1.0, float(spec.d0.diameter)):
                raise AssemblyError(f"truncated sandwich fails on the {side} side",
                                    (spec.labels[iu[k]], spec.labels[ju[k]]))
    cf1, cf2 = phi1.upper, psi.upper
    _verify_window(phi1.embedding, spec.d1.dist, 1.0, cf1, "phi1 vs d1", tol)
    _verify_window(psi.embedding, trunc, 1.0, cf2, "psi vs min(f, r+r)", tol)
    m0 = _basepoint(space, m0)
    emb = _shared_phi1_coords(space, phi1.embedding, psi.embedding, m0,
                              r.copy(), np.zeros(n))
    cert = measure_distortion(emb, space.dist)
    bound = pair_gauge_bound(cf1, cf2, c3_eff, c4)
    factors = {
        "d1_factor": cf1, "pair_factor": cf2,
        "c3": c3, "c4": c4, "basepoint": spec.labels[m0],
    }
    return AssemblyReport("pair-gauge", factors, bound, cert, emb)


# ---------------------------------------------------------------------------
# LP-backed pipelines


def constant_joiner_pipeline(space: TwistedUnionSpace,
                             component_scale: float = 1.0) -> AssemblyReport:
    spec = space.spec
    if not spec.joiner.constant:
        raise AssemblyError("constant-joiner pipeline needs a constant joiner")
    r = float(spec.joiner.values[0])
    d0_c1 = exact_c1(spec.d0).value
    d1_c1 = exact_c1(spec.d1).value
    phi0 = lp_component(spec.labels, np.minimum(spec.d0.dist, 2.0 * r))
    phi1 = lp_component(spec.labels, np.minimum(spec.d1.dist, 2.0 * r))
    psi = lp_component(spec.labels, np.minimum(spec.d0.dist, spec.d1.dist))
    return assemble_constant_joiner(space, phi0, phi1, psi, d0_c1, d1_c1,
                                    component_scale=component_scale)


def lipschitz_joiner_pipeline(space: TwistedUnionSpace) -> AssemblyReport:
    spec = space.spec
    r = spec.joiner.values
    rsum = r[:, None] + r[None, :]
    g0 = np.minimum(spec.d0.dist, rsum)
    g1 = np.minimum(spec.d1.dist, rsum)
    np.fill_diagonal(g0, 0.0)
    np.fill_diagonal(g1, 0.0)
    phi0 = lp_component(spec.labels, g0)
    phi1 = lp_component(spec.labels, g1)
    psi = lp_component(spec.labels, np.minimum(spec.d0.dist, spec.d1.dist))
    return assemble_lipschitz_joiner(space, phi0, phi1, psi)


def pair_gauge_pipeline(space: TwistedUnionSpace, f: np.ndarray | None = None,
                        expected_c3: float | None = None,
                        expected_c4: float | None = None) -> AssemblyReport:
    spec = space.spec
    if f is None:
        f = spec.d0.dist
        if expected_c3 is None and expected_c4 is None:
            expected_c3 = 1.0
            expected_c4 = space.derived.comparability + 1.0
    r = spec.joiner.values
    trunc = np.minimum(np.asarray(f, dtype=float), r[:, None] + r[None, :])
    np.fill_diagonal(trunc, 0.0)
    phi1 = lp_component(spec.labels, spec.d1.dist)
    psi = lp_component(spec.labels, trunc)
    return assemble_pair_gauge(space, f, phi1, psi,
                               expected_c3=expected_c3, expected_c4=expected_c4)


def all_route_certificates(space: TwistedUnionSpace,
                           f: np.ndarray | None = None) -> dict[str, AssemblyReport]:
    """Run the three assembly routes on a constant-joiner union and return
    their reports keyed by route name."""
    if not space.spec.joiner.constant:
        raise AssemblyError("the three-route comparison needs a constant joiner")
    return {
        "constant-joiner": constant_joiner_pipeline(space),
        "lipschitz-joiner": lipschitz_joiner_pipeline(space),
        "pair-gauge": pair_gauge_pipeline(space, f),
    }
