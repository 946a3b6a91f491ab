"""Energy minimization by Gauss-Seidel node relocation.

Interior nodes move in the plane, boundary-bound nodes move along their
curve parameter, frozen nodes stay put. Every accepted move strictly
lowers the local energy and keeps all adjacent elements valid.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _kernels
from .geometry import curve_table
from .energy import MaterialConstants, total_energy
from .mapping import TargetCache, build_target_cache, current_jacobians, det2
from .mesh import Mesh, adjacency_csr
from .reference import ReferenceElement, build_reference_element

log = logging.getLogger(__name__)

# initial and maximal trial displacement, in units of the local node spacing
INITIAL_STEP = 0.1
MAX_STEP = 1.0


class InvalidMeshError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    max_sweeps: int = 200
    node_step_tol: float = 1e-8
    energy_rel_tol: float = 1e-9
    ls_backtrack: float = 0.5
    ls_max_iters: int = 20
    ls_armijo: float = 1e-4
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_sweeps < 1 or self.ls_max_iters < 1:
            raise ValueError("max_sweeps and ls_max_iters must be >= 1")
        for name in ("node_step_tol", "energy_rel_tol", "ls_armijo"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.ls_backtrack < 1.0:
            raise ValueError("ls_backtrack must lie in (0, 1)")


@dataclass
class AdaptReport:
    sweeps_run: int
    initial_energy: float
    final_energy: float
    max_node_displacement: float
    min_detF_final: float
    min_detJ_final: float
    converged: bool
    per_sweep_energy: list[float] = field(default_factory=list)


def validity_scan(mesh: Mesh, ref: ReferenceElement | None = None) -> float:
    """Minimum det J_M over all elements and quadrature points."""
    if ref is None:
        ref = build_reference_element(mesh.shape, mesh.order)
    return float(det2(current_jacobians(mesh, ref)).min())


def _node_kinds(mesh: Mesh) -> np.ndarray:
    kind = np.full(mesh.n_nodes, _kernels.FREE, dtype=np.int64)
    kind[mesh.bind_curve >= 0] = _kernels.BOUND
    kind[list(mesh.frozen)] = _kernels.FROZEN
    return kind


def _step_scales(mesh: Mesh, cache: TargetCache, ptr, adj, kind) -> np.ndarray:
    """Local node spacing: sqrt of the smallest adjacent target area / order,
    converted to curve-parameter units for bound nodes."""
    h_elem = np.sqrt(cache.target_areas) / mesh.order
    h = np.array([h_elem[adj[ptr[n]:ptr[n + 1]]].min() for n in range(mesh.n_nodes)])
    for n in np.flatnonzero(kind == _kernels.BOUND):
        c = mesh.curves[int(mesh.bind_curve[n])]
        h[n] /= np.hypot(*c.tangent(mesh.bind_t[n]))
    return h


def optimize(mesh: Mesh, metric_field, constants: MaterialConstants = MaterialConstants(),
             config: OptimizerConfig = OptimizerConfig(), *, ref: ReferenceElement | None = None,
             cache: TargetCache | None = None,
             callback: Callable[[int, Mesh, float], None] | None = None) -> AdaptReport:
    """Relocate the nodes of ``mesh`` in place to minimize its energy.

    ``callback(sweep, mesh, energy)`` runs after every sweep. Hitting
    ``max_sweeps`` returns the improved mesh with ``converged=False``.
    """
    if ref is None:
        ref = build_reference_element(mesh.shape, mesh.order)
    if cache is None:
        cache = build_target_cache(mesh, metric_field, ref)
    min_det = validity_scan(mesh, ref)
    if not min_det > 0:
        raise InvalidMeshError(f"initial mesh is invalid: min det J_M = {min_det:.3e}")

    ptr, adj = adjacency_csr(mesh)
    kind = _node_kinds(mesh)
    step_max = MAX_STEP * _step_scales(mesh, cache, ptr, adj, kind)
    step = INITIAL_STEP * step_max / MAX_STEP
    ck, cd = curve_table(mesh.curves.values())
    G = np.ascontiguousarray(ref.basis_grad)
    args = (kind, mesh.bind_curve, mesh.bind_t, step, step_max, mesh.conn, G, cache.J_T_inv,
            cache.wdet, cache.delta, constants.mu, constants.lam, ptr, adj, ck, cd)
    rng = np.random.default_rng(config.rng_seed) if config.rng_seed else None
    order = np.arange(mesh.n_nodes, dtype=np.int64)
    start = mesh.nodes.copy()

    energy = total_energy(mesh, constants=constants, ref=ref, cache=cache).total
    initial = energy
    history = [energy]
    converged = False
    sweeps = 0
    for sweeps in range(1, config.max_sweeps + 1):
        if rng is not None:
            order = rng.permutation(mesh.n_nodes).astype(np.int64)
        disp = _kernels.sweep(order, mesh.nodes, *args, config.ls_armijo, config.ls_backtrack,
                              config.ls_max_iters)
        new = total_energy(mesh, constants=constants, ref=ref, cache=cache).total
        history.append(new)
        if callback is not None:
            callback(sweeps, mesh, new)
        rel = (energy - new) / max(abs(energy), np.finfo(float).tiny)
        log.debug("sweep %d: energy %.12g, max displacement %.3e", sweeps, new, disp)
        energy = new
        if disp <= config.node_step_tol or rel < config.energy_rel_tol:
            converged = True
            break

    final = total_energy(mesh, constants=constants, ref=ref, cache=cache)
    return AdaptReport(
        sweeps_run=sweeps,
        initial_energy=initial,
        final_energy=final.total,
        max_node_displacement=float(np.hypot(*(mesh.nodes - start).T).max()),
        min_detF_final=final.min_detF,
        min_detJ_final=validity_scan(mesh, ref),
        converged=converged,
        per_sweep_energy=history,
    )
