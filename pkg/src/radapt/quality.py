"""Directional size measures of adapted elements around a ring."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, barycentres


@dataclass(frozen=True)
class AnnulusStats:
    n_elements: int
    radial_before: float
    radial_after: float
    tangential_before: float
    tangential_after: float

    @property
    def radial_ratio(self) -> float:
        return self.radial_after / self.radial_before

    @property
    def tangential_ratio(self) -> float:
        return self.tangential_after / self.tangential_before


def directional_extents(points: np.ndarray, center, bary: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Radial and tangential extent of each element's node cloud.

    ``points`` is (n_elem, n_nodes, 2). Directions come from each
    element's barycentre relative to ``center``: the extent is the span of
    the node projections on the unit radial vector and its perpendicular.
    """
    u = bary - np.asarray(center)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = np.column_stack([-u[:, 1], u[:, 0]])
    pr = np.einsum("eia,ea->ei", points, u)
    pt = np.einsum("eia,ea->ei", points, v)
    return np.ptp(pr, axis=1), np.ptp(pt, axis=1)


def annulus_stats(mesh: Mesh, initial_nodes: np.ndarray, center=(0.5, 0.5), d_min=0.45, d_max=0.55) -> AnnulusStats:
    """Mean radial/tangential extents, before and after adaptation, of the
    elements whose initial barycentre satisfies ``d_min <= d <= d_max``."""
    bary = barycentres(mesh)
    d = np.hypot(*(bary - np.asarray(center)).T)
    sel = np.flatnonzero((d >= d_min) & (d <= d_max))
    if len(sel) == 0:
        raise ValueError("no element barycentre lies in the annulus")
    conn = mesh.conn[sel]
    r0, t0 = directional_extents(initial_nodes[conn], center, bary[sel])
    r1, t1 = directional_extents(mesh.nodes[conn], center, bary[sel])
    return AnnulusStats(len(sel), r0.mean(), r1.mean(), t0.mean(), t1.mean())
