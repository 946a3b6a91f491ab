"""Mesh figures: element edges sampled through the high-order map and
drawn as polylines with matplotlib's SVG backend."""
from __future__ import annotations

import matplotlib
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.collections import LineCollection
from matplotlib.figure import Figure
import numpy as np

from .mesh import Mesh
from .reference import build_reference_element, edge_local_nodes, reference_vertices

DEFAULT_SAMPLES = 8
_STYLE = {
    "svg.hashsalt": "radapt",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def edge_polylines(mesh: Mesh, samples_per_edge: int = DEFAULT_SAMPLES) -> list[np.ndarray]:
    """One (samples_per_edge, 2) polyline per unique mesh edge."""
    if samples_per_edge < 2:
        raise ValueError("samples_per_edge must be >= 2")
    ref = build_reference_element(mesh.shape, mesh.order)
    rv = reference_vertices(mesh.shape)
    nv = mesh.shape.n_vertices
    s = np.linspace(0.0, 1.0, samples_per_edge)
    tables = []
    for k in range(nv):
        a, b = rv[k], rv[(k + 1) % nv]
        pts = a + s[:, None] * (b - a)
        tables.append(ref.eval_basis(pts)[0])
    edges = edge_local_nodes(mesh.shape, mesh.order)
    seen = set()
    out = []
    for row in mesh.conn:
        for k in range(nv):
            key = (min(row[k], row[(k + 1) % nv]), max(row[k], row[(k + 1) % nv]))
            if key in seen:
                continue
            seen.add(key)
            # only the edge's own nodes contribute along an edge
            loc = edges[k]
            out.append(tables[k][:, loc] @ mesh.nodes[row[loc]])
    return out


def draw_mesh(ax, mesh: Mesh, samples_per_edge: int = DEFAULT_SAMPLES, color="k", lw=0.4):
    lines = LineCollection(edge_polylines(mesh, samples_per_edge), colors=color, linewidths=lw)
    ax.add_collection(lines)
    ax.set_aspect("equal")
    ax.autoscale_view()
    return lines


def emit_svg(mesh: Mesh, path, samples_per_edge: int = DEFAULT_SAMPLES, window=None, title=None,
             size: float = 6.0) -> None:
    """Write an SVG 1.1 drawing of the mesh; identical meshes give identical bytes.

    ``window`` is an optional ``(xmin, xmax, ymin, ymax)`` zoom box.
    """
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=(size, size))
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(1, 1, 1)
        draw_mesh(ax, mesh, samples_per_edge)
        if window is not None:
            ax.set_xlim(window[0], window[1])
            ax.set_ylim(window[2], window[3])
        if title:
            ax.set_title(title)
        ax.set_axis_off()
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")


def emit_history(energies, path, size=(5.0, 3.5)) -> None:
    """Energy per sweep on a log axis."""
    e = np.asarray(energies, dtype=float)
    with matplotlib.rc_context(_STYLE):
        fig = Figure(figsize=size)
        FigureCanvasSVG(fig)
        ax = fig.add_subplot(1, 1, 1)
        ax.plot(np.arange(len(e)), e, "k-", lw=1.0)
        if np.all(e > 0):
            ax.set_yscale("log")
        ax.set_xlabel("sweep")
        ax.set_ylabel("energy")
        fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
