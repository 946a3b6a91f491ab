"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 invalid mesh.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import PRESETS, ConfigError, build_run_config, merge_layers, read_config_file
from .io import MeshFormatError, read_mesh, write_mesh
from .mesh import MeshError
from .runner import EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_USAGE, format_report, run_adapt


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _overrides(args) -> dict[str, str]:
    flags = {
        "preset": args.preset, "mesh": args.mesh, "metric": args.metric, "mu": args.mu,
        "lambda": args.lam, "max_sweeps": args.max_sweeps, "out": args.out,
        "rng_seed": args.seed,
    }
    out = {k: str(v) for k, v in flags.items() if v is not None}
    if args.svg is not None:
        out["svg"] = "true" if args.svg else "false"
    return out


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="radapt", description="Variational r-adaptation of high-order 2D meshes.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("adapt", help="adapt a mesh and write mesh, report and figures")
    a.add_argument("--config", help="key = value settings file")
    a.add_argument("--preset", choices=sorted(PRESETS))
    a.add_argument("--mesh", help="input HOMESH file (replaces the preset generator)")
    a.add_argument("--metric", choices=["identity", "isotropic", "ring"])
    a.add_argument("--mu", type=float)
    a.add_argument("--lambda", dest="lam", type=float)
    a.add_argument("--max-sweeps", type=int)
    a.add_argument("--seed", type=int, help="sweep-order shuffle seed (0 = lexicographic)")
    a.add_argument("--out", help="output directory")
    a.add_argument("--svg", action=argparse.BooleanOptionalAction, default=None,
                   help="write SVG figures (default on)")

    g = sub.add_parser("generate", help="write the initial mesh of a preset")
    g.add_argument("preset", choices=sorted(PRESETS))
    g.add_argument("output")

    r = sub.add_parser("render", help="draw a HOMESH file as SVG")
    r.add_argument("mesh")
    r.add_argument("output")
    r.add_argument("--samples", type=int, default=8)
    return p


def _cmd_adapt(args) -> int:
    layers = [read_config_file(args.config)] if args.config else []
    layers.append(_overrides(args))
    config = build_run_config(merge_layers(*layers))
    result = run_adapt(config)
    sys.stdout.write(format_report(result.report))
    return result.exit_code


def _cmd_generate(args) -> int:
    config = build_run_config({"preset": args.preset})
    write_mesh(config.generator.build(), args.output)
    return EXIT_OK


def _cmd_render(args) -> int:
    from .optimizer import validity_scan
    from .plotting import emit_svg

    if args.samples < 2:
        raise UsageError("--samples must be >= 2")
    mesh = read_mesh(args.mesh)
    emit_svg(mesh, args.output, args.samples)
    return EXIT_OK if validity_scan(mesh) > 0 else EXIT_INVALID


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(message)s")
    handlers = {"adapt": _cmd_adapt, "generate": _cmd_generate, "render": _cmd_render}
    try:
        return handlers[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"radapt: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MeshFormatError, MeshError, OSError) as exc:
        print(f"radapt: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
