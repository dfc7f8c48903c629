"""Concave gauges: nondecreasing concave functions on [0, inf) vanishing at 0.

Closed forms cover the named transforms used by the twisted-cube examples
(powers, truncation, saturation, linear-capped minima); arbitrary concave
gauges are represented by piecewise-linear interpolants whose concavity is
checked on the breakpoints only.
"""

from __future__ import annotations

import numpy as np


class GaugeError(ValueError):
    """A gauge parameter violates the concave-gauge invariants."""


class ConcaveGauge:
    """Base class; subclasses evaluate on scalars or numpy arrays."""

    name = "gauge"

    def _eval(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, t):
        out = self._eval(np.asarray(t, dtype=float))
        return out.item() if out.ndim == 0 else out

    def describe(self) -> dict:
        """JSON-friendly description used in provenance blocks."""
        raise NotImplementedError


class PowerGauge(ConcaveGauge):
    """scale * t**alpha with alpha in (0, 1]; alpha = 1 is a scaled identity."""

    name = "power"

    def __init__(self, alpha: float, scale: float = 1.0):
        if not 0 < alpha <= 1:
            raise GaugeError(f"power exponent must lie in (0, 1], got {alpha}")
        if scale <= 0:
            raise GaugeError(f"scale must be positive, got {scale}")
        self.alpha = float(alpha)
        self.scale = float(scale)

    def _eval(self, t):
        return self.scale * np.power(t, self.alpha)

    def describe(self):
        return {"family": "power", "alpha": self.alpha, "scale": self.scale}


class TruncationGauge(ConcaveGauge):
    """min(t, lam): the lam-truncation."""

    name = "truncation"

    def __init__(self, lam: float):
        if lam <= 0:
            raise GaugeError(f"truncation level must be positive, got {lam}")
        self.lam = float(lam)

    def _eval(self, t):
        return np.minimum(t, self.lam)

    def describe(self):
        return {"family": "truncation", "lam": self.lam}


class SaturatingGauge(ConcaveGauge):
    """scale * (1 - exp(-t/lam)), saturating at scale."""

    name = "saturating"

    def __init__(self, scale: float, lam: float):
        if scale <= 0 or lam <= 0:
            raise GaugeError("saturating gauge needs positive scale and lam")
        self.scale = float(scale)
        self.lam = float(lam)

    def _eval(self, t):
        return self.scale * -np.expm1(-t / self.lam)

    def describe(self):
        return {"family": "saturating", "scale": self.scale, "lam": self.lam}


class CappedGauge(ConcaveGauge):
    """min(primary(t), shift + alternative(t)) for two gauges and shift >= 0.

    The minimum of concave nondecreasing functions is again one, and the
    shift keeps the value at 0 equal to min(0, shift) = 0.
    """

    name = "capped"

    def __init__(self, primary: ConcaveGauge, shift: float, alternative: ConcaveGauge):
        if shift < 0:
            raise GaugeError(f"cap shift must be nonnegative, got {shift}")
        if not isinstance(primary, ConcaveGauge) or not isinstance(alternative, ConcaveGauge):
            raise GaugeError("capped gauge needs two ConcaveGauge components")
        self.primary = primary
        self.shift = float(shift)
        self.alternative = alternative

    def _eval(self, t):
        return np.minimum(self.primary._eval(t), self.shift + self.alternative._eval(t))

    def describe(self):
        return {
            "family": "capped",
            "primary": self.primary.describe(),
            "shift": self.shift,
            "alternative": self.alternative.describe(),
        }


class PiecewiseLinearGauge(ConcaveGauge):
    """Concave interpolant through breakpoints (t_i, v_i), extended beyond the
    last breakpoint with its final slope.

    Requires t_0 = 0, v_0 = 0, strictly increasing t_i, nondecreasing v_i,
    nonincreasing slopes, and a positive first slope (so the gauge is positive
    away from 0).
    """

    name = "piecewise-linear"

    def __init__(self, breakpoints):
        pts = [(float(t), float(v)) for t, v in breakpoints]
        if len(pts) < 2:
            raise GaugeError("need at least two breakpoints")
        ts = np.array([p[0] for p in pts])
        vs = np.array([p[1] for p in pts])
        if ts[0] != 0.0 or vs[0] != 0.0:
            raise GaugeError("first breakpoint must be (0, 0)")
        if not np.all(np.diff(ts) > 0):
            raise GaugeError("breakpoint abscissae must be strictly increasing")
        slopes = np.diff(vs) / np.diff(ts)
        if slopes[0] <= 0:
            raise GaugeError("first slope must be positive (gauge must separate points)")
        if np.any(slopes < -1e-15):
            raise GaugeError("breakpoint values must be nondecreasing")
        if np.any(np.diff(slopes) > 1e-12):
            raise GaugeError("slopes must be nonincreasing (concavity fails)")
        self.ts = ts
        self.vs = vs
        self.final_slope = float(slopes[-1])

    def _eval(self, t):
        base = np.interp(t, self.ts, self.vs)
        beyond = t > self.ts[-1]
        if np.any(beyond):
            base = np.where(beyond, self.vs[-1] + self.final_slope * (t - self.ts[-1]), base)
        return base

    def describe(self):
        return {
            "family": "piecewise-linear",
            "breakpoints": [[float(t), float(v)] for t, v in zip(self.ts, self.vs)],
        }


def identity_gauge() -> PowerGauge:
    return PowerGauge(1.0)
