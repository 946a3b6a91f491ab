"""End-to-end adaptation run: build mesh and metric, optimize, write the
adapted mesh, a ``key = value`` report, the energy history and figures."""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .energy import total_energy
from .io import read_mesh, write_mesh
from .mapping import DegenerateElementError, build_target_cache
from .mesh import Mesh
from .metric import RingField
from .optimizer import AdaptReport, InvalidMeshError, optimize, validity_scan
from .quality import annulus_stats
from .reference import build_reference_element

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_INVALID = 3


@dataclass
class RunResult:
    exit_code: int
    report: dict[str, object]
    mesh: Mesh
    initial_nodes: np.ndarray
    adapt: AdaptReport | None
    paths: dict[str, Path] = field(default_factory=dict)
    max_binding_gap: float = 0.0


def binding_gap(mesh: Mesh) -> float:
    """Largest distance between a bound node and its curve point."""
    gap = 0.0
    for node, (cid, t) in mesh.bindings.items():
        gap = max(gap, float(np.hypot(*(mesh.curves[cid].eval(t) - mesh.nodes[node]))))
    return gap


def format_report(report: dict[str, object]) -> str:
    def fmt(v):
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return format(v, ".12g")
        return str(v)

    return "".join(f"{k} = {fmt(v)}\n" for k, v in report.items())


def load_mesh(config: RunConfig) -> Mesh:
    if config.mesh_path is not None:
        return read_mesh(config.mesh_path)
    return config.generator.build()


def adapt_mesh(mesh: Mesh, config: RunConfig) -> RunResult:
    """Optimize ``mesh`` in place under ``config``; no files are written."""
    ref = build_reference_element(mesh.shape, mesh.order)
    field_ = config.metric.build()
    initial_nodes = mesh.nodes.copy()
    min_det0 = validity_scan(mesh, ref)
    gaps = [binding_gap(mesh)]

    def watch(sweep, m, energy):
        gaps.append(binding_gap(m))

    report: dict[str, object] = {
        "run": config.name,
        "shape": mesh.shape.value,
        "order": mesh.order,
        "n_nodes": mesh.n_nodes,
        "n_elements": mesh.n_elements,
        "metric": config.metric.kind,
        "mu": config.constants.mu,
        "lambda": config.constants.lam,
        "min_detJ_initial": min_det0,
    }
    try:
        cache = build_target_cache(mesh, field_, ref)
        res = optimize(mesh, field_, config.constants, config.optimizer, ref=ref, cache=cache,
                       callback=watch)
    except (InvalidMeshError, DegenerateElementError) as exc:
        log.error("%s", exc)
        report["valid"] = False
        return RunResult(EXIT_INVALID, report, mesh, initial_nodes, None)
    final = total_energy(mesh, constants=config.constants, ref=ref, cache=cache)
    report.update({
        "sweeps_run": res.sweeps_run,
        "converged": res.converged,
        "initial_energy": res.initial_energy,
        "final_energy": res.final_energy,
        "max_node_displacement": res.max_node_displacement,
        "min_detF_final": res.min_detF_final,
        "min_detJ_final": res.min_detJ_final,
        "regularized_points": final.regularized_count,
        "max_binding_gap": max(gaps),
    })
    if isinstance(field_, RingField):
        try:
            st = annulus_stats(mesh, initial_nodes, center=field_.profile.center,
                               d_min=field_.profile.mean_d - 0.05, d_max=field_.profile.mean_d + 0.05)
        except ValueError:
            st = None
        if st is not None:
            report.update({
                "annulus_elements": st.n_elements,
                "annulus_radial_ratio": st.radial_ratio,
                "annulus_tangential_ratio": st.tangential_ratio,
            })
    valid = res.min_detJ_final > 0
    report["valid"] = valid
    return RunResult(EXIT_OK if valid else EXIT_INVALID, report, mesh, initial_nodes, res,
                     max_binding_gap=max(gaps))


def run_adapt(config: RunConfig) -> RunResult:
    """Run the full pipeline and write all artifacts into ``config.out_dir``."""
    from .plotting import emit_svg, emit_history

    t0 = time.perf_counter()
    mesh = load_mesh(config)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    if config.svg:
        paths["initial_svg"] = out / "initial.svg"
        emit_svg(mesh, paths["initial_svg"], config.samples_per_edge, title="initial mesh")
    result = adapt_mesh(mesh, config)
    paths["mesh"] = out / "adapted.homesh"
    write_mesh(mesh, paths["mesh"])
    paths["report"] = out / "report.txt"
    paths["report"].write_text(format_report(result.report))
    if result.adapt is not None:
        paths["history"] = out / "energy.csv"
        rows = ["sweep,energy"] + [f"{i},{e:.17g}" for i, e in enumerate(result.adapt.per_sweep_energy)]
        paths["history"].write_text("\n".join(rows) + "\n")
    if config.svg:
        paths["adapted_svg"] = out / "adapted.svg"
        emit_svg(mesh, paths["adapted_svg"], config.samples_per_edge, title="adapted mesh")
        if config.zoom is not None:
            paths["zoom_svg"] = out / "adapted_zoom.svg"
            emit_svg(mesh, paths["zoom_svg"], config.samples_per_edge, window=config.zoom,
                     title="adapted mesh (zoom)")
        if result.adapt is not None:
            paths["history_svg"] = out / "energy.svg"
            emit_history(result.adapt.per_sweep_energy, paths["history_svg"])
    result.paths = paths
    log.info("run %s finished in %.1f s (exit %d)", config.name, time.perf_counter() - t0, result.exit_code)
    return result
