"""Jacobians of the reference->current, reference->ideal and
reference->target maps, and the deformation gradient between target and
current configurations.

Convention: ``J[a, b] = d x_a / d xi_b``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, barycentres
from .reference import ReferenceElement, build_reference_element

REG_FLOOR = 1e-8


class DegenerateElementError(ValueError):
    pass


def det2(J: np.ndarray) -> np.ndarray:
    return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]


def inv2(J: np.ndarray) -> np.ndarray:
    d = det2(J)
    out = np.empty_like(J)
    out[..., 0, 0] = J[..., 1, 1]
    out[..., 1, 1] = J[..., 0, 0]
    out[..., 0, 1] = -J[..., 0, 1]
    out[..., 1, 0] = -J[..., 1, 0]
    return out / d[..., None, None]


def eval_current_jacobian(mesh: Mesh, element: int, ref: ReferenceElement) -> np.ndarray:
    """J_M at every quadrature point, shape (n_q, 2, 2)."""
    X = mesh.nodes[mesh.conn[element]]
    return np.einsum("ia,qib->qab", X, ref.basis_grad)


def current_jacobians(mesh: Mesh, ref: ReferenceElement) -> np.ndarray:
    """J_M for all elements, shape (n_elem, n_q, 2, 2)."""
    X = mesh.nodes[mesh.conn]
    return np.einsum("eia,qib->eqab", X, ref.basis_grad)


def eval_ideal_jacobian(initial_vertices: np.ndarray, element: int, ref: ReferenceElement) -> np.ndarray:
    """Jacobian of the straight-sided vertex map of the initial element.

    Affine for triangles, bilinear (varying in space) for quads.
    """
    J = np.einsum("ia,qib->qab", initial_vertices[element], ref.vertex_grad)
    if np.any(det2(J) <= 0):
        raise DegenerateElementError(f"ideal element {element} is degenerate or inverted")
    return J


def build_target_jacobian(J_I: np.ndarray, M) -> tuple[np.ndarray, np.ndarray]:
    """J_T = M . J_I with one metric for the whole element; returns (J_T, det J_T)."""
    M = np.asarray(getattr(M, "matrix", M), dtype=float)
    J_T = np.einsum("ab,...bc->...ac", M, J_I)
    return J_T, det2(J_T)


def deformation_gradient(J_M: np.ndarray, J_T: np.ndarray) -> np.ndarray:
    """F = J_M . J_T^-1."""
    d = det2(J_T)
    if np.any(d == 0):
        raise DegenerateElementError("singular target Jacobian")
    return J_M @ inv2(J_T)


@dataclass(frozen=True)
class TargetCache:
    """Per-element target data, fixed for a whole optimization run.

    ``wdet[e, q]`` is the quadrature weight times |det J_T| and ``delta[e]``
    the log-regularization floor of the element.
    """

    metrics: np.ndarray  # (n_elem, 2, 2)
    J_I: np.ndarray
    J_T: np.ndarray
    J_T_inv: np.ndarray
    det_JT: np.ndarray
    wdet: np.ndarray
    delta: np.ndarray

    @property
    def target_areas(self) -> np.ndarray:
        return self.wdet.sum(axis=1)


def build_target_cache(mesh: Mesh, metric_field, ref: ReferenceElement | None = None, *,
                       scalar_path: bool = True) -> TargetCache:
    """Sample the metric once per element at the initial barycentre and
    tabulate J_T, its inverse and the integration weights.

    Fields with a ``scale(x, y)`` method are isotropic; for them J_T = r J_I
    is formed by scalar scaling unless ``scalar_path`` is False, in which
    case the general tensor product M J_I is used.
    """
    if ref is None:
        ref = build_reference_element(mesh.shape, mesh.order)
    J_I = np.einsum("eia,qib->eqab", mesh.initial_vertices, ref.vertex_grad)
    bad = np.flatnonzero(np.any(det2(J_I) <= 0, axis=1))
    if len(bad):
        raise DegenerateElementError(f"ideal element {bad[0]} is degenerate or inverted")
    bary = barycentres(mesh)
    scale = getattr(metric_field, "scale", None) if scalar_path else None
    if scale is not None:
        r = np.array([scale(x, y) for x, y in bary])
        metrics = r[:, None, None] * np.eye(2)
        J_T = r[:, None, None, None] * J_I
    else:
        metrics = np.array([metric_field(x, y).matrix for x, y in bary])
        J_T = np.einsum("eab,eqbc->eqac", metrics, J_I)
    det_JT = det2(J_T)
    if np.any(det_JT <= 0):
        raise DegenerateElementError("metric produced a non-positive target element")
    wdet = ref.quad_weights[None, :] * np.abs(det_JT)
    delta = REG_FLOOR * wdet.sum(axis=1)
    arrays = (metrics, J_I, J_T, inv2(J_T), det_JT, wdet, delta)
    for a in arrays:
        a.setflags(write=False)
    return TargetCache(*arrays)


@dataclass(frozen=True)
class MappingJacobians:
    J_M: np.ndarray
    J_I: np.ndarray
    J_T: np.ndarray
    F: np.ndarray
    detJT: np.ndarray


def element_jacobians(mesh: Mesh, element: int, ref: ReferenceElement, cache: TargetCache) -> MappingJacobians:
    J_M = eval_current_jacobian(mesh, element, ref)
    F = J_M @ cache.J_T_inv[element]
    return MappingJacobians(J_M, cache.J_I[element], cache.J_T[element], F, cache.det_JT[element])
