"""Reader and writer for the line-oriented HOMESH text format.

::

    HOMESH 1 <dim> <order>
    NODES <n>
    <id> <x> <y>
    CURVES <c>
    SEG <id> <x0> <y0> <x1> <y1>
    ARC <id> <cx> <cy> <r> <theta0> <theta1>
    BINDINGS <b>
    <node_id> <curve_id> <t>
    ELEMENTS <m>
    <shape> <id> <n> <node_id> ... <node_id>

Blank lines and ``#`` comments are ignored. Boundary nodes without a
binding (domain corners) are frozen on load.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np

from .geometry import Arc, CurveError, Segment
from .mesh import BINDING_TOL, Mesh, MeshError, boundary_edges
from .reference import Shape, edge_local_nodes

FORMAT_VERSION = 1


class MeshFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        where = f"{path}:" if path is not None else ""
        where += f"{line}: " if line is not None else (" " if where else "")
        super().__init__(f"{where}{message}")


def _num(x: float) -> str:
    return format(float(x), ".17g")


def write_mesh(mesh: Mesh, path) -> None:
    lines = [f"HOMESH {FORMAT_VERSION} 2 {mesh.order}", f"NODES {mesh.n_nodes}"]
    lines += [f"{i} {_num(x)} {_num(y)}" for i, (x, y) in enumerate(mesh.nodes)]
    curves = sorted(mesh.curves.values(), key=lambda c: c.id)
    lines.append(f"CURVES {len(curves)}")
    for c in curves:
        lines.append(" ".join([c.kind, str(c.id)] + [_num(v) for v in c.params()]))
    bindings = mesh.bindings
    lines.append(f"BINDINGS {len(bindings)}")
    lines += [f"{n} {cid} {_num(t)}" for n, (cid, t) in sorted(bindings.items())]
    lines.append(f"ELEMENTS {mesh.n_elements}")
    nn = mesh.conn.shape[1]
    for e, row in enumerate(mesh.conn):
        lines.append(f"{mesh.shape.value} {e} {nn} " + " ".join(str(int(i)) for i in row))
    Path(path).write_text("\n".join(lines) + "\n")


class _Lines:
    def __init__(self, text: str, path):
        self.items = []
        for no, raw in enumerate(text.splitlines(), start=1):
            content = raw.split("#", 1)[0].strip()
            if content:
                self.items.append((no, content.split()))
        self.pos = 0
        self.path = path

    def error(self, msg, line=None):
        if line is None:
            line = self.items[self.pos - 1][0] if self.pos else None
        return MeshFormatError(msg, line, self.path)

    def next(self, what: str):
        if self.pos >= len(self.items):
            last = self.items[-1][0] if self.items else 0
            raise MeshFormatError(f"unexpected end of file, expected {what}", last, self.path)
        item = self.items[self.pos]
        self.pos += 1
        return item

    def section(self, name: str) -> tuple[int, int]:
        line, tok = self.next(f"{name} header")
        if tok[0] != name or len(tok) != 2:
            raise self.error(f"expected '{name} <count>', got {' '.join(tok)!r}", line)
        count = self.int(tok[1], line)
        if count < 0:
            raise self.error(f"negative {name} count", line)
        return line, count

    def int(self, s, line):
        try:
            return int(s)
        except ValueError:
            raise self.error(f"expected an integer, got {s!r}", line) from None

    def float(self, s, line):
        try:
            v = float(s)
        except ValueError:
            raise self.error(f"expected a number, got {s!r}", line) from None
        if not np.isfinite(v):
            raise self.error(f"non-finite value {s!r}", line)
        return v


def _check_id(seen: dict, i: int, count: int, what: str, line: int, lines: _Lines):
    if not 0 <= i < count:
        raise lines.error(f"{what} id {i} out of range [0, {count})", line)
    if i in seen:
        raise lines.error(f"duplicate {what} id {i} (first on line {seen[i]})", line)
    seen[i] = line


def parse_mesh(text: str, path=None) -> Mesh:
    lines = _Lines(text, path)
    line, tok = lines.next("HOMESH header")
    if len(tok) != 4 or tok[0] != "HOMESH":
        raise lines.error("expected 'HOMESH <version> <dim> <order>'", line)
    version, dim, order = (lines.int(t, line) for t in tok[1:])
    if version != FORMAT_VERSION:
        raise lines.error(f"unsupported format version {version}", line)
    if dim != 2:
        raise lines.error(f"only 2D meshes are supported, got dim={dim}", line)
    if order < 1:
        raise lines.error(f"invalid order {order}", line)

    _, n_nodes = lines.section("NODES")
    nodes = np.empty((n_nodes, 2))
    seen: dict[int, int] = {}
    for _ in range(n_nodes):
        line, tok = lines.next("node line")
        if len(tok) != 3:
            raise lines.error("node line needs 'id x y'", line)
        i = lines.int(tok[0], line)
        _check_id(seen, i, n_nodes, "node", line, lines)
        nodes[i] = lines.float(tok[1], line), lines.float(tok[2], line)

    _, n_curves = lines.section("CURVES")
    curves = []
    seen = {}
    for _ in range(n_curves):
        line, tok = lines.next("curve line")
        kind = tok[0]
        want = {"SEG": 6, "ARC": 7}.get(kind)
        if want is None:
            raise lines.error(f"unknown curve kind {kind!r}", line)
        if len(tok) != want:
            raise lines.error(f"{kind} line needs {want - 1} fields after the tag", line)
        cid = lines.int(tok[1], line)
        _check_id(seen, cid, n_curves, "curve", line, lines)
        v = [lines.float(t, line) for t in tok[2:]]
        try:
            if kind == "SEG":
                curves.append(Segment(cid, (v[0], v[1]), (v[2], v[3])))
            else:
                curves.append(Arc(cid, (v[0], v[1]), v[2], v[3], v[4]))
        except CurveError as exc:
            raise lines.error(str(exc), line) from None

    by_id = {c.id: c for c in curves}
    _, n_bind = lines.section("BINDINGS")
    bindings = {}
    for _ in range(n_bind):
        line, tok = lines.next("binding line")
        if len(tok) != 3:
            raise lines.error("binding line needs 'node_id curve_id t'", line)
        node, cid = lines.int(tok[0], line), lines.int(tok[1], line)
        t = lines.float(tok[2], line)
        if not 0 <= node < n_nodes:
            raise lines.error(f"node id {node} out of range [0, {n_nodes})", line)
        if not 0 <= cid < n_curves:
            raise lines.error(f"curve id {cid} out of range [0, {n_curves})", line)
        if node in bindings:
            raise lines.error(f"node {node} bound twice", line)
        if not 0.0 <= t <= 1.0:
            raise lines.error(f"curve parameter {t} outside [0, 1]", line)
        gap = float(np.hypot(*(by_id[cid].eval(t) - nodes[node])))
        if gap > BINDING_TOL:
            raise lines.error(f"node {node} is {gap:.3e} away from curve {cid}", line)
        bindings[node] = (cid, t)

    _, n_elem = lines.section("ELEMENTS")
    shape = None
    conn = []
    seen = {}
    for _ in range(n_elem):
        line, tok = lines.next("element line")
        try:
            s = Shape(tok[0])
        except ValueError:
            raise lines.error(f"unknown shape tag {tok[0]!r}", line) from None
        if shape is None:
            shape = s
        elif s is not shape:
            raise lines.error("mixed element shapes are not supported", line)
        if len(tok) < 3:
            raise lines.error("element line needs 'shape id n ids...'", line)
        e = lines.int(tok[1], line)
        _check_id(seen, e, n_elem, "element", line, lines)
        nn = lines.int(tok[2], line)
        if nn != s.n_nodes(order):
            raise lines.error(f"{s.value} order {order} needs {s.n_nodes(order)} nodes, got {nn}", line)
        if len(tok) != 3 + nn:
            raise lines.error(f"expected {nn} node ids, got {len(tok) - 3}", line)
        ids = [lines.int(t, line) for t in tok[3:]]
        for i in ids:
            if not 0 <= i < n_nodes:
                raise lines.error(f"element {e} references node {i}, mesh has {n_nodes} nodes", line)
        conn.append((e, ids))
    if lines.pos != len(lines.items):
        raise lines.error("trailing content after ELEMENTS", lines.items[lines.pos][0])
    if shape is None:
        raise MeshFormatError("mesh has no elements", None, path)
    table = np.empty((n_elem, shape.n_nodes(order)), dtype=np.int64)
    for e, ids in conn:
        table[e] = ids

    frozen = _unbound_boundary_nodes(table, shape, order, bindings)
    try:
        return Mesh(nodes, table, shape, order, curves, bindings, frozen)
    except MeshError as exc:
        raise MeshFormatError(str(exc), None, path) from None


def _unbound_boundary_nodes(conn, shape, order, bindings) -> set[int]:
    edges = edge_local_nodes(shape, order)
    out = set()
    for e, k in boundary_edges(conn, shape):
        out.update(int(conn[e, i]) for i in edges[k] if int(conn[e, i]) not in bindings)
    return out


def read_mesh(path) -> Mesh:
    path = os.fspath(path)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MeshFormatError(f"cannot read mesh: {exc.strerror}", None, path) from None
    return parse_mesh(text, path)
