"""Hyperelastic deformation energy of the mesh relative to its target
elements, and its gradient with respect to node coordinates.

    W(F) = mu/2 (tr(F^T F) - 2) - mu ln J + lam/2 (ln J)^2,   J = det F

``J`` enters the logarithms through the smooth surrogate
``J_delta = (J + sqrt(J^2 + 4 delta^2)) / 2``, which equals ``J`` to
rounding for ``J >> delta`` and stays positive for inverted trial states.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mapping import REG_FLOOR, TargetCache, build_target_cache, current_jacobians, det2, eval_current_jacobian
from .mesh import Mesh
from .reference import ReferenceElement, build_reference_element

DIM = 2
# quadrature points with J below this multiple of delta count as regularized
REG_REPORT_FACTOR = 10.0


@dataclass(frozen=True)
class MaterialConstants:
    mu: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError("mu must be positive")
        if not self.lam >= 0:
            raise ValueError("lambda must be non-negative")


@dataclass
class EnergyBreakdown:
    total: float
    per_element: np.ndarray = field(repr=False)
    min_detF: float
    regularized_count: int


def regularized_det(J, delta=REG_FLOOR):
    """Return ``J_delta`` and ``d J_delta / d J``."""
    J = np.asarray(J, dtype=float)
    root = np.sqrt(J * J + 4.0 * delta * delta)
    # the second branch avoids cancellation for J << 0
    with np.errstate(divide="ignore", invalid="ignore"):
        Jd = np.where(J >= 0, 0.5 * (J + root), 2.0 * delta * delta / (root - J))
    return Jd, Jd / root


def _cofactor(F):
    C = np.empty_like(F)
    C[..., 0, 0] = F[..., 1, 1]
    C[..., 0, 1] = -F[..., 1, 0]
    C[..., 1, 0] = -F[..., 0, 1]
    C[..., 1, 1] = F[..., 0, 0]
    return C


def strain_energy_density(F, constants: MaterialConstants = MaterialConstants(), delta=REG_FLOOR):
    """W at one or many 2x2 deformation gradients (leading axes broadcast)."""
    F = np.asarray(F, dtype=float)
    I1 = np.einsum("...ab,...ab->...", F, F)
    Jd, _ = regularized_det(det2(F), delta)
    logJ = np.log(Jd)
    mu, lam = constants.mu, constants.lam
    return 0.5 * mu * (I1 - DIM) - mu * logJ + 0.5 * lam * logJ * logJ


def strain_energy_density_dF(F, constants: MaterialConstants = MaterialConstants(), delta=REG_FLOOR):
    """First Piola stress dW/dF.

    With ``J_delta = J`` this is ``mu F + (lam ln J - mu) F^-T``; the
    cofactor form used here stays defined for ``J <= 0``.
    """
    F = np.asarray(F, dtype=float)
    Jd, dJd = regularized_det(det2(F), delta)
    coef = (constants.lam * np.log(Jd) - constants.mu) / Jd * dJd
    return constants.mu * F + coef[..., None, None] * _cofactor(F)


def element_energy(mesh: Mesh, element: int, cache: TargetCache, ref: ReferenceElement,
                   constants: MaterialConstants) -> float:
    """Quadrature of W over the target element: sum_q w_q |det J_T| W(F_q)."""
    F = eval_current_jacobian(mesh, element, ref) @ cache.J_T_inv[element]
    W = strain_energy_density(F, constants, cache.delta[element])
    return float(np.dot(cache.wdet[element], W))


def _all_F(mesh, cache, ref):
    return current_jacobians(mesh, ref) @ cache.J_T_inv


def total_energy(mesh: Mesh, metric_field=None, constants: MaterialConstants = MaterialConstants(), *,
                 ref: ReferenceElement | None = None, cache: TargetCache | None = None) -> EnergyBreakdown:
    """Energy of the whole mesh with diagnostics.

    Pass either ``metric_field`` or a prebuilt ``cache``.
    """
    if ref is None:
        ref = build_reference_element(mesh.shape, mesh.order)
    if cache is None:
        cache = build_target_cache(mesh, metric_field, ref)
    F = _all_F(mesh, cache, ref)
    delta = cache.delta[:, None]
    W = strain_energy_density(F, constants, delta)
    per_element = np.einsum("eq,eq->e", cache.wdet, W)
    detF = det2(F)
    return EnergyBreakdown(
        total=float(per_element.sum()),
        per_element=per_element,
        min_detF=float(detF.min()),
        regularized_count=int(np.count_nonzero(detF < REG_REPORT_FACTOR * delta)),
    )


def energy_gradient(mesh: Mesh, cache: TargetCache, ref: ReferenceElement,
                    constants: MaterialConstants) -> np.ndarray:
    """dE/dx for every node, shape (n_nodes, 2), ignoring constraints."""
    F = _all_F(mesh, cache, ref)
    P = strain_energy_density_dF(F, constants, cache.delta[:, None])
    # physical-to-target gradient of each basis function: J_T^-T grad(l)
    G = np.einsum("qib,eqbc->eqic", ref.basis_grad, cache.J_T_inv)
    local = np.einsum("eq,eqac,eqic->eia", cache.wdet, P, G)
    grad = np.zeros_like(mesh.nodes)
    np.add.at(grad, mesh.conn, local)
    return grad


def node_energy_gradient(mesh: Mesh, node: int, adjacency, cache: TargetCache, ref: ReferenceElement,
                         constants: MaterialConstants) -> np.ndarray:
    """dE/d(x_n, y_n) from the elements around ``node`` only."""
    if not 0 <= node < mesh.n_nodes:
        raise IndexError(f"unknown node {node}")
    g = np.zeros(2)
    for e in adjacency[node]:
        loc = int(np.flatnonzero(mesh.conn[e] == node)[0])
        F = eval_current_jacobian(mesh, e, ref) @ cache.J_T_inv[e]
        P = strain_energy_density_dF(F, constants, cache.delta[e])
        Gn = np.einsum("qb,qbc->qc", ref.basis_grad[:, loc, :], cache.J_T_inv[e])
        g += np.einsum("q,qac,qc->a", cache.wdet[e], P, Gn)
    return g
