"""Reference elements: nodal Lagrange bases and quadrature on [-1,1]^2 and
the triangle (-1,-1), (1,-1), (-1,1).

Local node ordering is shared by both shapes: vertices first, then the
interior nodes of each edge (edges traversed v0->v1, v1->v2, ...), then
element-interior nodes.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre
from scipy.special import roots_jacobi

MAX_TRI_ORDER = 8


class Shape(enum.Enum):
    QUAD = "QUAD"
    TRI = "TRI"

    @property
    def n_vertices(self) -> int:
        return 4 if self is Shape.QUAD else 3

    def n_nodes(self, order: int) -> int:
        if self is Shape.QUAD:
            return (order + 1) ** 2
        return (order + 1) * (order + 2) // 2

    @property
    def area(self) -> float:
        return 4.0 if self is Shape.QUAD else 2.0


class UnsupportedElementError(ValueError):
    pass


def gll_points(order: int) -> np.ndarray:
    """Gauss-Lobatto-Legendre points on [-1, 1]: the endpoints plus the
    roots of P'_order."""
    if order == 1:
        return np.array([-1.0, 1.0])
    coeffs = np.zeros(order + 1)
    coeffs[-1] = 1.0
    inner = np.sort(legendre.legroots(legendre.legder(coeffs)).real)
    pts = np.concatenate([[-1.0], inner, [1.0]])
    # enforce exact symmetry
    return 0.5 * (pts - pts[::-1])


def lagrange_1d(nodes: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Values and derivatives of the 1D Lagrange polynomials through `nodes`.

    Returns arrays of shape (len(x), len(nodes)).
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = len(nodes)
    val = np.ones((len(x), n))
    der = np.zeros((len(x), n))
    for j in range(n):
        others = [k for k in range(n) if k != j]
        denom = np.prod([nodes[j] - nodes[k] for k in others])
        for k in others:
            val[:, j] *= x - nodes[k]
        # derivative by the product rule
        for m in others:
            term = np.ones(len(x))
            for k in others:
                if k != m:
                    term *= x - nodes[k]
            der[:, j] += term
        val[:, j] /= denom
        der[:, j] /= denom
    return val, der


def _quad_lattice(order: int) -> list[tuple[int, int]]:
    P = order
    idx = [(0, 0), (P, 0), (P, P), (0, P)]
    idx += [(i, 0) for i in range(1, P)]
    idx += [(P, j) for j in range(1, P)]
    idx += [(i, P) for i in range(P - 1, 0, -1)]
    idx += [(0, j) for j in range(P - 1, 0, -1)]
    idx += [(i, j) for j in range(1, P) for i in range(1, P)]
    return idx


def _tri_lattice(order: int) -> list[tuple[int, int]]:
    P = order
    idx = [(0, 0), (P, 0), (0, P)]
    idx += [(i, 0) for i in range(1, P)]
    idx += [(P - k, k) for k in range(1, P)]
    idx += [(0, P - k) for k in range(1, P)]
    idx += [(i, j) for j in range(1, P) for i in range(1, P) if i + j <= P - 1]
    return idx


def edge_local_nodes(shape: Shape, order: int) -> list[list[int]]:
    """Local node indices along each edge, endpoints included, in edge
    direction."""
    nv = shape.n_vertices
    n_in = order - 1
    edges = []
    for k in range(nv):
        interior = list(range(nv + k * n_in, nv + (k + 1) * n_in))
        edges.append([k] + interior + [(k + 1) % nv])
    return edges


def edge_fractions(shape: Shape, order: int) -> np.ndarray:
    """Positions in [0, 1] of the nodes along any edge (endpoints included)."""
    if shape is Shape.QUAD:
        return 0.5 * (gll_points(order) + 1.0)
    return np.linspace(0.0, 1.0, order + 1)


def reference_vertices(shape: Shape) -> np.ndarray:
    if shape is Shape.QUAD:
        return np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    return np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])


def quad_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre rule with n points per direction."""
    x, w = legendre.leggauss(n)
    X, Y = np.meshgrid(x, x)
    W = np.outer(w, w)
    return np.column_stack([X.ravel(), Y.ravel()]), W.ravel()


def tri_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed (Duffy) Gauss rule on the reference triangle.

    Gauss-Legendre in the collapsed direction times Gauss-Jacobi(1, 0) in
    the other; exact for polynomials of total degree 2n - 1.
    """
    a, wa = legendre.leggauss(n)
    b, wb = roots_jacobi(n, 1.0, 0.0)
    pts = []
    wts = []
    for bj, wbj in zip(b, wb):
        for ai, wai in zip(a, wa):
            pts.append((0.5 * (1.0 + ai) * (1.0 - bj) - 1.0, bj))
            wts.append(0.5 * wai * wbj)
    return np.array(pts), np.array(wts)


def _tri_monomials(order: int) -> list[tuple[int, int]]:
    return [(total - b, b) for total in range(order + 1) for b in range(total + 1)]


def _tri_vandermonde(pts: np.ndarray, order: int):
    # monomials in the shifted coordinates (xi+1)/2, (eta+1)/2 keep the
    # matrix well conditioned at the orders supported here
    u = 0.5 * (pts[:, 0] + 1.0)
    v = 0.5 * (pts[:, 1] + 1.0)
    mons = _tri_monomials(order)
    V = np.empty((len(pts), len(mons)))
    Vu = np.zeros_like(V)
    Vv = np.zeros_like(V)
    for k, (a, b) in enumerate(mons):
        V[:, k] = u**a * v**b
        if a > 0:
            Vu[:, k] = a * u ** (a - 1) * v**b
        if b > 0:
            Vv[:, k] = b * u**a * v ** (b - 1)
    # chain rule for d/dxi = 0.5 d/du
    return V, 0.5 * Vu, 0.5 * Vv


@dataclass(frozen=True, eq=False)
class ReferenceElement:
    """Nodal basis and quadrature tables for one shape and order.

    ``basis_grad[q, i, :]`` holds the reference gradient of basis function
    ``i`` at quadrature point ``q``; ``vertex_grad`` is the same table for
    the linear (vertex) basis, which defines the ideal element map.
    """

    shape: Shape
    order: int
    ref_nodes: np.ndarray
    quad_points: np.ndarray
    quad_weights: np.ndarray
    basis: np.ndarray
    basis_grad: np.ndarray
    vertex_grad: np.ndarray
    _tri_coeffs: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.ref_nodes)

    @property
    def n_qpoints(self) -> int:
        return len(self.quad_weights)

    def eval_basis(self, pts) -> tuple[np.ndarray, np.ndarray]:
        """Basis values (n_pts, n_nodes) and gradients (n_pts, n_nodes, 2)
        at arbitrary reference points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.shape is Shape.QUAD:
            x1d = gll_points(self.order)
            lat = _quad_lattice(self.order)
            vx, dx = lagrange_1d(x1d, pts[:, 0])
            vy, dy = lagrange_1d(x1d, pts[:, 1])
            ii = np.array([i for i, _ in lat])
            jj = np.array([j for _, j in lat])
            val = vx[:, ii] * vy[:, jj]
            grad = np.stack([dx[:, ii] * vy[:, jj], vx[:, ii] * dy[:, jj]], axis=-1)
            return val, grad
        V, Vx, Vy = _tri_vandermonde(pts, self.order)
        C = self._tri_coeffs
        return V @ C, np.stack([Vx @ C, Vy @ C], axis=-1)

    def eval_vertex_basis(self, pts) -> tuple[np.ndarray, np.ndarray]:
        """Linear vertex basis (bilinear for quads) at reference points."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        xi, eta = pts[:, 0], pts[:, 1]
        if self.shape is Shape.QUAD:
            sx = np.array([-1.0, 1.0, 1.0, -1.0])
            sy = np.array([-1.0, -1.0, 1.0, 1.0])
            val = 0.25 * (1 + sx * xi[:, None]) * (1 + sy * eta[:, None])
            gx = 0.25 * sx * (1 + sy * eta[:, None])
            gy = 0.25 * sy * (1 + sx * xi[:, None])
            return val, np.stack([gx, gy], axis=-1)
        val = np.column_stack([-(xi + eta) / 2, (1 + xi) / 2, (1 + eta) / 2])
        g = np.array([[-0.5, -0.5], [0.5, 0.0], [0.0, 0.5]])
        return val, np.broadcast_to(g, (len(pts), 3, 2)).copy()


@lru_cache(maxsize=None)
def build_reference_element(shape: Shape, order: int, n_quad: int | None = None) -> ReferenceElement:
    """Build the basis/quadrature tables for ``shape`` at polynomial ``order``.

    ``n_quad`` is the number of Gauss points per direction (default
    ``order + 2``). Quads use GLL tensor nodes; triangles use equispaced
    nodes, supported up to order 8.
    """
    shape = Shape(shape)
    if order < 1:
        raise UnsupportedElementError(f"order must be >= 1, got {order}")
    if shape is Shape.TRI and order > MAX_TRI_ORDER:
        raise UnsupportedElementError(
            f"equispaced triangles are limited to order <= {MAX_TRI_ORDER}, got {order}"
        )
    if n_quad is None:
        n_quad = order + 2
    if n_quad < order + 1:
        raise UnsupportedElementError(f"n_quad={n_quad} must be >= order + 1 = {order + 1}")

    if shape is Shape.QUAD:
        x1d = gll_points(order)
        nodes = np.array([(x1d[i], x1d[j]) for i, j in _quad_lattice(order)])
        qp, qw = quad_rule(n_quad)
        coeffs = None
    else:
        lat = _tri_lattice(order)
        nodes = np.array([(-1.0 + 2.0 * i / order, -1.0 + 2.0 * j / order) for i, j in lat])
        qp, qw = tri_rule(n_quad)
        V, _, _ = _tri_vandermonde(nodes, order)
        coeffs = np.linalg.inv(V)
    proto = ReferenceElement(shape, order, nodes, qp, qw, np.empty(0), np.empty(0), np.empty(0), coeffs)
    basis, grad = proto.eval_basis(qp)
    _, vgrad = proto.eval_vertex_basis(qp)
    ref = ReferenceElement(shape, order, nodes, qp, qw, basis, grad, vgrad, coeffs)
    for arr in (nodes, qp, qw, basis, grad, vgrad):
        arr.setflags(write=False)
    return ref
