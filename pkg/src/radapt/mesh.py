"""High-order 2D mesh container and generators for the two test domains."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Arc, BoundaryCurve, Segment
from .reference import Shape, edge_fractions, edge_local_nodes

BINDING_TOL = 1e-10


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Element:
    shape: Shape
    node_ids: tuple[int, ...]


class Mesh:
    """Nodes, single-shape high-order connectivity and boundary constraints.

    ``initial_vertices[e]`` holds the vertex coordinates of element ``e``
    at construction time. It is read-only and defines the ideal elements,
    so barycentres and target shapes do not drift while nodes move.

    Bound nodes are moved with :meth:`slide` (curve parameter), free nodes
    with :meth:`move`; frozen nodes cannot be moved at all.
    """

    def __init__(self, nodes, conn, shape: Shape, order: int, curves=(), bindings=None, frozen=()):
        self.nodes = np.array(nodes, dtype=float).reshape(-1, 2)
        self.conn = np.array(conn, dtype=np.int64)
        self.shape = Shape(shape)
        self.order = int(order)
        self.curves: dict[int, BoundaryCurve] = {c.id: c for c in curves}
        n = len(self.nodes)
        self.bind_curve = np.full(n, -1, dtype=np.int64)
        self.bind_t = np.zeros(n)
        for node, (cid, t) in (bindings or {}).items():
            self.bind_curve[node] = cid
            self.bind_t[node] = t
        self.frozen = frozenset(int(i) for i in frozen)
        self._validate()
        nv = self.shape.n_vertices
        self.initial_vertices = self.nodes[self.conn[:, :nv]].copy()
        self.initial_vertices.setflags(write=False)

    def _validate(self):
        n = len(self.nodes)
        if not np.all(np.isfinite(self.nodes)):
            raise MeshError("node coordinates must be finite")
        nn = self.shape.n_nodes(self.order)
        if self.conn.ndim != 2 or self.conn.shape[1] != nn:
            raise MeshError(f"{self.shape.value} order {self.order} elements need {nn} nodes each")
        if self.conn.size and (self.conn.min() < 0 or self.conn.max() >= n):
            raise MeshError("element references a node id outside the node table")
        for e, row in enumerate(self.conn):
            if len(set(row.tolist())) != nn:
                raise MeshError(f"element {e} repeats a node id")
        for node in np.flatnonzero(self.bind_curve >= 0):
            cid = int(self.bind_curve[node])
            if cid not in self.curves:
                raise MeshError(f"node {node} bound to unknown curve {cid}")
            if node in self.frozen:
                raise MeshError(f"node {node} is both frozen and bound")
            gap = np.hypot(*(self.curves[cid].eval(self.bind_t[node]) - self.nodes[node]))
            if gap >= BINDING_TOL:
                raise MeshError(f"node {node} is {gap:.3e} away from curve {cid}")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_elements(self) -> int:
        return len(self.conn)

    @property
    def elements(self) -> list[Element]:
        return [Element(self.shape, tuple(int(i) for i in row)) for row in self.conn]

    @property
    def bindings(self) -> dict[int, tuple[int, float]]:
        return {int(i): (int(self.bind_curve[i]), float(self.bind_t[i]))
                for i in np.flatnonzero(self.bind_curve >= 0)}

    def is_bound(self, node: int) -> bool:
        return self.bind_curve[node] >= 0

    def slide(self, node: int, t: float) -> None:
        if not self.is_bound(node):
            raise MeshError(f"node {node} is not bound to a curve")
        self.nodes[node] = self.curves[int(self.bind_curve[node])].eval(t)
        self.bind_t[node] = t

    def move(self, node: int, xy) -> None:
        if node in self.frozen:
            raise MeshError(f"node {node} is frozen")
        if self.is_bound(node):
            raise MeshError(f"node {node} is bound; use slide()")
        self.nodes[node] = xy

    def vertex_ids(self) -> np.ndarray:
        return np.unique(self.conn[:, : self.shape.n_vertices])

    def copy(self) -> "Mesh":
        # keeps the original ideal elements, unlike rebuilding from nodes
        other = Mesh.__new__(Mesh)
        other.nodes = self.nodes.copy()
        other.conn = self.conn.copy()
        other.shape = self.shape
        other.order = self.order
        other.curves = dict(self.curves)
        other.bind_curve = self.bind_curve.copy()
        other.bind_t = self.bind_t.copy()
        other.frozen = self.frozen
        other.initial_vertices = self.initial_vertices
        return other


def barycentre(mesh: Mesh, element: int) -> np.ndarray:
    """Mean of the element's vertex positions in the initial (ideal) mesh."""
    return mesh.initial_vertices[element].mean(axis=0)


def barycentres(mesh: Mesh) -> np.ndarray:
    return mesh.initial_vertices.mean(axis=1)


def node_to_elements(mesh: Mesh) -> list[list[int]]:
    adj: list[list[int]] = [[] for _ in range(mesh.n_nodes)]
    for e, row in enumerate(mesh.conn):
        for i in row:
            adj[i].append(e)
    return adj


def adjacency_csr(mesh: Mesh) -> tuple[np.ndarray, np.ndarray]:
    """Node-to-element adjacency as (ptr, elems) arrays."""
    counts = np.bincount(mesh.conn.ravel(), minlength=mesh.n_nodes)
    ptr = np.zeros(mesh.n_nodes + 1, dtype=np.int64)
    np.cumsum(counts, out=ptr[1:])
    order = np.argsort(mesh.conn.ravel(), kind="stable")
    elems = (order // mesh.conn.shape[1]).astype(np.int64)
    return ptr, elems


def boundary_edges(conn: np.ndarray, shape: Shape) -> list[tuple[int, int]]:
    """(element, local edge) pairs whose edge belongs to a single element."""
    nv = shape.n_vertices
    seen: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for e, row in enumerate(conn):
        for k in range(nv):
            key = tuple(sorted((int(row[k]), int(row[(k + 1) % nv]))))
            seen.setdefault(key, []).append((e, k))
    return [uses[0] for uses in seen.values() if len(uses) == 1]


def build_high_order_mesh(vertices, lin_conn, shape: Shape, order: int, curves,
                          edge_curves: dict, frozen) -> Mesh:
    """Lift a linear mesh to ``order`` by adding edge and interior nodes.

    ``edge_curves`` maps a sorted vertex pair to the id of the boundary
    curve carrying that edge. Nodes on such edges (vertices included,
    except ``frozen`` corners) are bound and placed on the curve by
    parameter; all other high-order nodes follow the straight vertex map.
    """
    from .reference import build_reference_element

    shape = Shape(shape)
    vertices = np.asarray(vertices, dtype=float)
    lin_conn = np.asarray(lin_conn, dtype=np.int64)
    curves_by_id = {c.id: c for c in curves}
    ref = build_reference_element(shape, order)
    nv = shape.n_vertices
    frac = edge_fractions(shape, order)
    edges_local = edge_local_nodes(shape, order)
    interior_local = list(range(nv + nv * (order - 1), ref.n_nodes))
    vbasis_interior, _ = ref.eval_vertex_basis(ref.ref_nodes[interior_local]) if interior_local else (None, None)

    coords = [tuple(v) for v in vertices]
    bindings: dict[int, tuple[int, float]] = {}
    frozen = set(int(i) for i in frozen)

    # vertices on boundary curves
    for (a, b), cid in edge_curves.items():
        c = curves_by_id[cid]
        for v in (a, b):
            if v not in frozen and v not in bindings:
                bindings[v] = (cid, c.project(vertices[v]))

    edge_nodes: dict[tuple[int, int], list[int]] = {}
    conn = np.empty((len(lin_conn), ref.n_nodes), dtype=np.int64)
    for e, row in enumerate(lin_conn):
        conn[e, :nv] = row
        for k in range(nv):
            a, b = int(row[k]), int(row[(k + 1) % nv])
            key = (min(a, b), max(a, b))
            if key not in edge_nodes:
                ids = []
                p, q = vertices[key[0]], vertices[key[1]]
                cid = edge_curves.get(key)
                if cid is not None:
                    c = curves_by_id[cid]
                    ta, tb = c.project(p), c.project(q)
                for f in frac[1:-1]:
                    ids.append(len(coords))
                    if cid is None:
                        coords.append(tuple(p + f * (q - p)))
                    else:
                        t = ta + f * (tb - ta)
                        coords.append(tuple(c.eval(t)))
                        bindings[ids[-1]] = (cid, t)
                edge_nodes[key] = ids
            ids = edge_nodes[key] if a < b else edge_nodes[key][::-1]
            conn[e, edges_local[k][1:-1]] = ids
        if interior_local:
            pts = vbasis_interior @ vertices[row]
            conn[e, interior_local] = np.arange(len(coords), len(coords) + len(pts))
            coords.extend(tuple(p) for p in pts)

    coords = np.array(coords)
    for node, (cid, t) in bindings.items():
        coords[node] = curves_by_id[cid].eval(t)
    return Mesh(coords, conn, shape, order, curves, bindings, frozen)


def generate_unit_square_quad_mesh(n_per_side: int, order: int) -> Mesh:
    """Uniform ``n_per_side`` x ``n_per_side`` quad mesh of [0, 1]^2.

    Edges are bound to four segment curves (0 bottom, 1 right, 2 top,
    3 left); the four corners are frozen.
    """
    n = int(n_per_side)
    if n < 2:
        raise MeshError("n_per_side must be >= 2")
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    lin = [[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]
           for j in range(n) for i in range(n)]
    curves = [Segment(0, (0.0, 0.0), (1.0, 0.0)), Segment(1, (1.0, 0.0), (1.0, 1.0)),
              Segment(2, (0.0, 1.0), (1.0, 1.0)), Segment(3, (0.0, 0.0), (0.0, 1.0))]
    edge_curves = {}
    for i in range(n):
        edge_curves[(vid(i, 0), vid(i + 1, 0))] = 0
        edge_curves[(vid(i, n), vid(i + 1, n))] = 2
        edge_curves[(vid(0, i), vid(0, i + 1))] = 3
        edge_curves[(vid(n, i), vid(n, i + 1))] = 1
    corners = [vid(0, 0), vid(n, 0), vid(n, n), vid(0, n)]
    return build_high_order_mesh(vertices, lin, Shape.QUAD, order, curves, edge_curves, corners)


QUADRANT_CENTER = (0.5, 0.5)
QUADRANT_RADIUS = 0.75


def generate_quadrant_tri_mesh(order: int, h_target: float, center=QUADRANT_CENTER,
                               radius: float = QUADRANT_RADIUS) -> Mesh:
    """Triangulated quarter disc ``{d <= radius, x >= cx, y >= cy}``.

    The domain has two straight edges meeting at ``center`` (curves 0 and
    2) and an outer arc (curve 1). A transfinite map of an n x n grid is
    split along the (i, j)-(i+1, j+1) diagonals, which keeps cells next
    to the flat arc midpoint well shaped.
    """
    if not h_target > 0:
        raise MeshError("h_target must be positive")
    n = max(2, math.ceil(radius / h_target))
    if n > 2000:
        raise MeshError(f"h_target={h_target} yields an unreasonably fine mesh")
    cx, cy = center
    R = radius
    arc = Arc(1, (cx, cy), R, 0.0, 0.5 * math.pi)
    curves = [Segment(0, (cx, cy), (cx + R, cy)), arc, Segment(2, (cx, cy), (cx, cy + R))]

    A = np.array([cx, cy])
    B = np.array([cx + R, cy])
    D = np.array([cx, cy + R])
    C = arc.eval(0.5)

    def boundary(side, s):
        if side == "bottom":
            return A + s * (B - A)
        if side == "left":
            return A + s * (D - A)
        if side == "right":
            return arc.eval(0.5 * s)
        return arc.eval(1.0 - 0.5 * s)  # top: D -> C

    s = np.linspace(0.0, 1.0, n + 1)
    vertices = np.empty(((n + 1) ** 2, 2))
    for j, v in enumerate(s):
        for i, u in enumerate(s):
            p = ((1 - v) * boundary("bottom", u) + v * boundary("top", u)
                 + (1 - u) * boundary("left", v) + u * boundary("right", v)
                 - ((1 - u) * (1 - v) * A + u * (1 - v) * B + u * v * C + (1 - u) * v * D))
            vertices[j * (n + 1) + i] = p

    def vid(i, j):
        return j * (n + 1) + i

    lin = []
    for j in range(n):
        for i in range(n):
            lin.append([vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)])
            lin.append([vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)])
    edge_curves = {}
    for i in range(n):
        edge_curves[(vid(i, 0), vid(i + 1, 0))] = 0
        edge_curves[(vid(0, i), vid(0, i + 1))] = 2
        edge_curves[(vid(n, i), vid(n, i + 1))] = 1
        edge_curves[(vid(i, n), vid(i + 1, n))] = 1
    corners = [vid(0, 0), vid(n, 0), vid(0, n)]
    mesh = build_high_order_mesh(vertices, lin, Shape.TRI, order, curves, edge_curves, corners)
    v = mesh.initial_vertices
    signed = ((v[:, 1, 0] - v[:, 0, 0]) * (v[:, 2, 1] - v[:, 0, 1])
              - (v[:, 2, 0] - v[:, 0, 0]) * (v[:, 1, 1] - v[:, 0, 1]))
    if np.any(signed <= 0):
        raise MeshError("triangulation produced a non-positive element")
    return mesh
