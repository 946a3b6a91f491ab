"""Metric tensors and analytic metric fields.

The ring field shrinks elements radially around a circle: the radial
scale ``r(d)`` is a Gaussian dip in the distance ``d`` from a centre, and
the tensor scales by ``r`` along the radial direction and by 1 along the
tangential one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class MetricTensor:
    m11: float
    m12: float
    m22: float

    def __post_init__(self):
        if not (self.m11 > 0 and self.det > 0):
            raise MetricError(f"metric {self} is not positive definite")

    @property
    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m12

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])


IDENTITY = MetricTensor(1.0, 0.0, 1.0)


def isotropic_metric(r: float) -> MetricTensor:
    return MetricTensor(r, 0.0, r)


def compose_radial_metric(r: float, alpha: float) -> MetricTensor:
    """Scale by ``r`` along direction ``alpha``, by 1 perpendicular to it.

    Equal to R(alpha) diag(r, 1) R(alpha)^T, written in closed form.
    """
    if not r > 0:
        raise MetricError(f"radial scale must be positive, got {r}")
    c = math.cos(alpha)
    s = math.sin(alpha)
    k = r - 1.0
    return MetricTensor(1.0 + k * c * c, k * s * c, 1.0 + k * s * s)


@dataclass(frozen=True)
class GaussianRingProfile:
    """Gaussian radial-scale profile ``r(d) = 1 - A/sqrt(2 pi sigma^2) exp(-(d - mean)^2 / (2 sigma^2))``.

    Give either ``amplitude`` (A) or ``min_r``, the scale reached on the
    ring; the two are tied by ``min_r = 1 - A/sqrt(2 pi sigma^2)``. The
    default is a ring of unit diameter centred in the unit square with
    ``min_r = 0.1``.
    """

    mean_d: float = 0.5
    sigma: float = 0.05
    amplitude: float | None = None
    center: tuple[float, float] = (0.5, 0.5)
    min_r: float | None = None

    def __post_init__(self):
        if not self.sigma > 0:
            raise MetricError("sigma must be positive")
        if self.amplitude is None:
            min_r = 0.1 if self.min_r is None else self.min_r
            object.__setattr__(self, "min_r", min_r)
            object.__setattr__(self, "amplitude", (1.0 - min_r) * self.norm)
        elif self.min_r is None:
            object.__setattr__(self, "min_r", 1.0 - self.amplitude / self.norm)
        elif not math.isclose(self.min_r, 1.0 - self.amplitude / self.norm, rel_tol=1e-12):
            raise MetricError("amplitude and min_r disagree")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not 0.0 < self.depth < 1.0:
            raise MetricError(
                f"peak depth A/sqrt(2 pi sigma^2) = {self.depth} must lie in (0, 1)"
            )

    @property
    def norm(self) -> float:
        return math.sqrt(2.0 * math.pi * self.sigma**2)

    @property
    def depth(self) -> float:
        return 1.0 - self.min_r


def gaussian_r(d: float, profile: GaussianRingProfile) -> float:
    if d < 0:
        raise MetricError("distance must be non-negative")
    z = (d - profile.mean_d) / profile.sigma
    # min_r + (1 - min_r)(1 - e) is exact at the ring, unlike 1 - depth * e
    return profile.min_r + profile.depth * -math.expm1(-0.5 * z * z)


def ring_metric_eval(x: float, y: float, profile: GaussianRingProfile) -> MetricTensor:
    dx = x - profile.center[0]
    dy = y - profile.center[1]
    d = math.hypot(dx, dy)
    r = gaussian_r(d, profile)
    if d == 0.0:
        return isotropic_metric(r)
    return compose_radial_metric(r, math.atan2(dy, dx))


class MetricField:
    """Callable ``(x, y) -> MetricTensor``."""

    def __call__(self, x: float, y: float) -> MetricTensor:
        raise NotImplementedError


class IdentityField(MetricField):
    def __call__(self, x, y):
        return IDENTITY

    def __repr__(self):
        return "IdentityField()"


class IsotropicField(MetricField):
    def __init__(self, r: Callable[[float, float], float]):
        self.r = r

    @classmethod
    def from_profile(cls, profile: GaussianRingProfile) -> "IsotropicField":
        cx, cy = profile.center
        return cls(lambda x, y: gaussian_r(math.hypot(x - cx, y - cy), profile))

    def scale(self, x, y) -> float:
        return self.r(x, y)

    def __call__(self, x, y):
        return isotropic_metric(self.r(x, y))


class RingField(MetricField):
    """Ring-refinement field; ``isotropic=True`` uses r(d) I instead of the
    radial-only tensor."""

    def __init__(self, profile: GaussianRingProfile | None = None, isotropic: bool = False):
        self.profile = profile or GaussianRingProfile()
        self.isotropic = isotropic
        if isotropic:
            self.scale = self._scale

    def _scale(self, x, y) -> float:
        p = self.profile
        return gaussian_r(math.hypot(x - p.center[0], y - p.center[1]), p)

    def __call__(self, x, y):
        if self.isotropic:
            return isotropic_metric(self._scale(x, y))
        return ring_metric_eval(x, y, self.profile)

    def __repr__(self):
        return f"RingField({self.profile!r}, isotropic={self.isotropic})"
