"""Analytic boundary curves (segments and circular arcs) with a [0, 1]
parametrization, used to let boundary nodes slide along the domain edge."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class CurveError(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    id: int
    p0: tuple[float, float]
    p1: tuple[float, float]

    def __post_init__(self):
        if tuple(self.p0) == tuple(self.p1):
            raise CurveError(f"segment {self.id} has coincident endpoints")

    kind = "SEG"

    def eval(self, t: float) -> np.ndarray:
        _check_param(t)
        x0, y0 = self.p0
        x1, y1 = self.p1
        return np.array([x0 + t * (x1 - x0), y0 + t * (y1 - y0)])

    def tangent(self, t: float) -> np.ndarray:
        return np.array([self.p1[0] - self.p0[0], self.p1[1] - self.p0[1]])

    def project(self, p) -> float:
        d = np.subtract(self.p1, self.p0)
        t = float(np.dot(np.subtract(p, self.p0), d) / np.dot(d, d))
        return min(max(t, 0.0), 1.0)

    def params(self) -> tuple[float, ...]:
        return (*self.p0, *self.p1)


@dataclass(frozen=True)
class Arc:
    """Circular arc ``center + radius * (cos θ, sin θ)``, θ running linearly
    from ``theta0`` to ``theta1``."""

    id: int
    center: tuple[float, float]
    radius: float
    theta0: float
    theta1: float

    kind = "ARC"

    def __post_init__(self):
        if not self.radius > 0:
            raise CurveError(f"arc {self.id} needs a positive radius")
        if self.theta0 == self.theta1:
            raise CurveError(f"arc {self.id} has zero angular span")

    def angle(self, t: float) -> float:
        return self.theta0 + t * (self.theta1 - self.theta0)

    def eval(self, t: float) -> np.ndarray:
        _check_param(t)
        th = self.angle(t)
        return np.array([self.center[0] + self.radius * math.cos(th),
                         self.center[1] + self.radius * math.sin(th)])

    def tangent(self, t: float) -> np.ndarray:
        th = self.angle(t)
        s = self.radius * (self.theta1 - self.theta0)
        return np.array([-s * math.sin(th), s * math.cos(th)])

    def project(self, p) -> float:
        span = self.theta1 - self.theta0
        phi = math.atan2(p[1] - self.center[1], p[0] - self.center[0])
        # unwrap the polar angle to the branch closest to the arc midpoint
        mid = self.theta0 + 0.5 * span
        phi = mid + math.remainder(phi - mid, 2.0 * math.pi)
        t = (phi - self.theta0) / span
        if 0.0 <= t <= 1.0:
            return t
        # outside the arc: nearest endpoint
        d0 = np.hypot(*(self.eval(0.0) - p))
        d1 = np.hypot(*(self.eval(1.0) - p))
        return 0.0 if d0 <= d1 else 1.0

    def params(self) -> tuple[float, ...]:
        return (*self.center, self.radius, self.theta0, self.theta1)


BoundaryCurve = Segment | Arc


def _check_param(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise CurveError(f"curve parameter {t!r} outside [0, 1]")


def curve_eval(curve: BoundaryCurve, t: float) -> np.ndarray:
    return curve.eval(t)


def curve_project(curve: BoundaryCurve, p) -> float:
    """Parameter of the closest curve point to ``p``, clamped to [0, 1]."""
    return curve.project(p)


def curve_table(curves) -> tuple[np.ndarray, np.ndarray]:
    """Pack curves into (kind, data) arrays for compiled kernels.

    kind is 0 for segments and 1 for arcs; data rows hold the five
    defining parameters in ``params()`` order (segments pad with 0).
    """
    n = max((c.id for c in curves), default=-1) + 1
    kind = np.full(n, -1, dtype=np.int64)
    data = np.zeros((n, 5))
    for c in curves:
        kind[c.id] = 0 if isinstance(c, Segment) else 1
        vals = c.params()
        data[c.id, : len(vals)] = vals
    return kind, data
