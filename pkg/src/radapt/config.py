"""Run configuration: presets, ``key = value`` files and flag overrides.

Settings are merged in layers (preset, then file, then command line).
Within a layer, a mesh file and a generator are mutually exclusive; a
later layer naming one source replaces the other.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .energy import MaterialConstants
from .metric import GaussianRingProfile, IdentityField, IsotropicField, MetricField, RingField
from .optimizer import OptimizerConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "quad"  # quad | tri
    n_per_side: int = 24
    order: int = 3
    h_target: float = 0.05

    def build(self):
        from .mesh import generate_quadrant_tri_mesh, generate_unit_square_quad_mesh

        if self.kind == "quad":
            return generate_unit_square_quad_mesh(self.n_per_side, self.order)
        if self.kind == "tri":
            return generate_quadrant_tri_mesh(self.order, self.h_target)
        raise ConfigError(f"unknown generator {self.kind!r}")


@dataclass(frozen=True)
class MetricSpec:
    kind: str = "ring"  # identity | isotropic | ring
    profile: GaussianRingProfile = field(default_factory=GaussianRingProfile)

    def build(self) -> MetricField:
        if self.kind == "identity":
            return IdentityField()
        if self.kind == "isotropic":
            return IsotropicField.from_profile(self.profile)
        if self.kind == "ring":
            return RingField(self.profile)
        raise ConfigError(f"unknown metric {self.kind!r}")


@dataclass(frozen=True)
class RunConfig:
    name: str = "custom"
    generator: GeneratorSpec | None = field(default_factory=GeneratorSpec)
    mesh_path: Path | None = None
    metric: MetricSpec = field(default_factory=MetricSpec)
    constants: MaterialConstants = field(default_factory=MaterialConstants)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    out_dir: Path = Path("out")
    svg: bool = True
    samples_per_edge: int = 8
    zoom: tuple[float, float, float, float] | None = None

    def __post_init__(self):
        if (self.generator is None) == (self.mesh_path is None):
            raise ConfigError("exactly one mesh source (generator or mesh file) is required")


PRESETS: dict[str, dict[str, str]] = {
    "fig2": {"generator": "quad", "n_per_side": "24", "order": "3", "metric": "ring",
             "max_sweeps": "300", "zoom": "0.8,1.0,0.4,0.6"},
    "fig3": {"generator": "tri", "h_target": "0.05", "order": "3", "metric": "ring",
             "max_sweeps": "300"},
    "identity": {"generator": "quad", "n_per_side": "8", "order": "3", "metric": "identity"},
}

_MESH_KEYS = {"generator", "n_per_side", "order", "h_target"}
KNOWN_KEYS = {
    "preset", "mesh", "metric", "ring_center", "ring_mean", "ring_sigma", "ring_min_r",
    "ring_amplitude", "mu", "lambda", "max_sweeps", "node_step_tol", "energy_rel_tol",
    "ls_backtrack", "ls_max_iters", "ls_armijo", "rng_seed", "out", "svg", "samples_per_edge",
    "zoom",
} | _MESH_KEYS


def parse_config_text(text: str, source="<config>") -> dict[str, str]:
    out = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{no}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{no}: unknown key {key!r}")
        out[key] = value
    return out


def read_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FileNotFoundError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_text(text, path)


def merge_layers(*layers: dict[str, str]) -> dict[str, str]:
    merged: dict[str, str] = {}
    for layer in layers:
        if "mesh" in layer and "generator" in layer:
            raise ConfigError("give either 'mesh' or 'generator', not both")
        if "mesh" in layer:
            for k in _MESH_KEYS:
                merged.pop(k, None)
        if "generator" in layer:
            merged.pop("mesh", None)
        merged.update(layer)
    return merged


def _float(d, key, default):
    try:
        return float(d[key]) if key in d else default
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {d[key]!r}") from None


def _int(d, key, default):
    try:
        return int(d[key]) if key in d else default
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {d[key]!r}") from None


def _floats(d, key, n):
    try:
        vals = tuple(float(v) for v in d[key].split(","))
    except ValueError:
        raise ConfigError(f"{key} must be {n} comma-separated numbers") from None
    if len(vals) != n:
        raise ConfigError(f"{key} must be {n} comma-separated numbers")
    return vals


def _bool(d, key, default):
    if key not in d:
        return default
    v = d[key].lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be a boolean, got {d[key]!r}")


def build_run_config(settings: dict[str, str]) -> RunConfig:
    """Resolve a merged settings dict (preset expanded) into a RunConfig."""
    s = dict(settings)
    name = s.pop("preset", "custom")
    if name != "custom":
        if name not in PRESETS:
            raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
        s = merge_layers(PRESETS[name], s)
    if "mesh" in s:
        generator, mesh_path = None, Path(s["mesh"])
    else:
        generator = GeneratorSpec(
            kind=s.get("generator", "quad"),
            n_per_side=_int(s, "n_per_side", 24),
            order=_int(s, "order", 3),
            h_target=_float(s, "h_target", 0.05),
        )
        if generator.kind not in ("quad", "tri"):
            raise ConfigError(f"unknown generator {generator.kind!r}")
        mesh_path = None

    prof_kw = dict(mean_d=_float(s, "ring_mean", 0.5), sigma=_float(s, "ring_sigma", 0.05))
    if "ring_center" in s:
        prof_kw["center"] = _floats(s, "ring_center", 2)
    if "ring_amplitude" in s:
        prof_kw["amplitude"] = _float(s, "ring_amplitude", None)
    if "ring_min_r" in s:
        prof_kw["min_r"] = _float(s, "ring_min_r", None)
    metric_kind = s.get("metric", "ring")
    if metric_kind not in ("identity", "isotropic", "ring"):
        raise ConfigError(f"unknown metric {metric_kind!r}")
    try:
        metric = MetricSpec(metric_kind, GaussianRingProfile(**prof_kw))
        constants = MaterialConstants(_float(s, "mu", 1.0), _float(s, "lambda", 1.0))
        defaults = OptimizerConfig()
        optimizer = OptimizerConfig(
            max_sweeps=_int(s, "max_sweeps", defaults.max_sweeps),
            node_step_tol=_float(s, "node_step_tol", defaults.node_step_tol),
            energy_rel_tol=_float(s, "energy_rel_tol", defaults.energy_rel_tol),
            ls_backtrack=_float(s, "ls_backtrack", defaults.ls_backtrack),
            ls_max_iters=_int(s, "ls_max_iters", defaults.ls_max_iters),
            ls_armijo=_float(s, "ls_armijo", defaults.ls_armijo),
            rng_seed=_int(s, "rng_seed", defaults.rng_seed),
        )
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None
    samples = _int(s, "samples_per_edge", 8)
    if samples < 2:
        raise ConfigError("samples_per_edge must be >= 2")
    return RunConfig(
        name=name,
        generator=generator,
        mesh_path=mesh_path,
        metric=metric,
        constants=constants,
        optimizer=optimizer,
        out_dir=Path(s.get("out", "out")),
        svg=_bool(s, "svg", True),
        samples_per_edge=samples,
        zoom=_floats(s, "zoom", 4) if "zoom" in s else None,
    )


def preset(name: str, **overrides) -> RunConfig:
    """RunConfig for a named preset, with dataclass-field overrides."""
    cfg = build_run_config({"preset": name})
    return dataclasses.replace(cfg, **overrides) if overrides else cfg
