import numpy as np
import pytest

from radapt.cli import main
from radapt.config import (ConfigError, build_run_config, merge_layers, parse_config_text,
                           preset)
from radapt.io import read_mesh, write_mesh
from radapt.mesh import generate_unit_square_quad_mesh
from radapt.runner import adapt_mesh, format_report, run_adapt

SMALL = "generator = quad\nn_per_side = 4\norder = 3\nmetric = ring\nmax_sweeps = 4\n"


def parse_report(text):
    return dict(line.split(" = ", 1) for line in text.strip().splitlines())


@pytest.fixture
def small_cfg(tmp_path):
    p = tmp_path / "small.cfg"
    p.write_text(SMALL)
    return p


def test_adapt_writes_artifacts(tmp_path, small_cfg, capsys):
    out = tmp_path / "out"
    assert main(["adapt", "--config", str(small_cfg), "--out", str(out)]) == 0
    printed = parse_report(capsys.readouterr().out)
    assert printed == parse_report((out / "report.txt").read_text())
    assert printed["valid"] == "true" and printed["sweeps_run"] == "4"
    assert float(printed["final_energy"]) < float(printed["initial_energy"])
    for name in ["initial.svg", "adapted.svg", "energy.svg", "energy.csv", "adapted.homesh"]:
        assert (out / name).stat().st_size > 0
    rows = (out / "energy.csv").read_text().splitlines()
    assert rows[0] == "sweep,energy" and len(rows) == 6
    assert read_mesh(out / "adapted.homesh").n_nodes == 13**2


def test_outputs_deterministic(tmp_path, small_cfg):
    for d in ("a", "b"):
        assert main(["adapt", "--config", str(small_cfg), "--out", str(tmp_path / d)]) == 0
    for name in ["report.txt", "adapted.homesh", "adapted.svg", "energy.csv", "energy.svg"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_no_svg_flag(tmp_path, small_cfg):
    out = tmp_path / "o"
    assert main(["adapt", "--config", str(small_cfg), "--no-svg", "--out", str(out)]) == 0
    assert not list(out.glob("*.svg"))


def test_identity_preset_keeps_mesh(tmp_path):
    out = tmp_path / "id"
    assert main(["adapt", "--preset", "identity", "--out", str(out), "--no-svg"]) == 0
    adapted = read_mesh(out / "adapted.homesh")
    ref = generate_unit_square_quad_mesh(8, 3)
    assert np.abs(adapted.nodes - ref.nodes).max() <= 1e-8


def test_flag_overrides(tmp_path, small_cfg):
    out = tmp_path / "f"
    main(["adapt", "--config", str(small_cfg), "--mu", "2", "--lambda", "0.5",
          "--max-sweeps", "1", "--metric", "isotropic", "--no-svg", "--out", str(out)])
    rep = parse_report((out / "report.txt").read_text())
    assert rep["mu"] == "2" and rep["lambda"] == "0.5"
    assert rep["sweeps_run"] == "1" and rep["metric"] == "isotropic"


def test_mesh_input_and_generate(tmp_path):
    mesh = tmp_path / "in.homesh"
    assert main(["generate", "identity", str(mesh)]) == 0
    assert read_mesh(mesh).n_elements == 64
    out = tmp_path / "m"
    assert main(["adapt", "--mesh", str(mesh), "--metric", "identity", "--no-svg",
                 "--out", str(out)]) == 0
    assert main(["render", str(mesh), str(tmp_path / "r.svg")]) == 0
    assert (tmp_path / "r.svg").read_bytes().count(b"<path") >= 1


def test_usage_errors(tmp_path, small_cfg, capsys):
    assert main(["adapt", "--config", str(small_cfg), "--mu", "-1", "--out", str(tmp_path)]) == 1
    with pytest.raises(SystemExit) as info:
        main(["adapt", "--bogus"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    assert main(["adapt", "--config", str(bad)]) == 1
    assert main(["render", "x.homesh", "y.svg", "--samples", "1"]) == 1


def test_io_errors(tmp_path):
    assert main(["adapt", "--config", str(tmp_path / "none.cfg")]) == 2
    assert main(["adapt", "--mesh", str(tmp_path / "none.homesh")]) == 2
    broken = tmp_path / "broken.homesh"
    broken.write_text("HOMESH 1 2 1\nNODES 3\n")
    assert main(["render", str(broken), str(tmp_path / "b.svg")]) == 2


def test_invalid_mesh_exit(tmp_path):
    m = generate_unit_square_quad_mesh(2, 1)
    m.move(4, (1.4, 1.4))
    path = tmp_path / "tangled.homesh"
    write_mesh(m, path)
    out = tmp_path / "t"
    assert main(["adapt", "--mesh", str(path), "--metric", "identity", "--no-svg",
                 "--out", str(out)]) == 3
    assert parse_report((out / "report.txt").read_text())["valid"] == "false"
    assert main(["render", str(path), str(tmp_path / "t.svg")]) == 3


def test_cli_matches_library(tmp_path, small_cfg):
    out = tmp_path / "cli"
    main(["adapt", "--config", str(small_cfg), "--no-svg", "--out", str(out)])
    cfg = build_run_config(parse_config_text(SMALL))
    mesh = cfg.generator.build()
    res = adapt_mesh(mesh, cfg)
    assert read_mesh(out / "adapted.homesh").nodes.tobytes() == mesh.nodes.tobytes()
    assert format_report(res.report) == (out / "report.txt").read_text()


def test_config_parsing():
    d = parse_config_text("# comment\nmu = 2  # trailing\n\nmetric=identity\n")
    assert d == {"mu": "2", "metric": "identity"}
    with pytest.raises(ConfigError, match=":2:"):
        parse_config_text("mu = 1\nnot a pair\n")
    with pytest.raises(ConfigError):
        build_run_config({"zoom": "1,2"})
    with pytest.raises(ConfigError):
        build_run_config({"preset": "nope"})
    with pytest.raises(ConfigError):
        build_run_config({"svg": "maybe"})


def test_merge_rules():
    with pytest.raises(ConfigError):
        merge_layers({"mesh": "a.homesh", "generator": "quad"})
    merged = merge_layers({"generator": "quad", "n_per_side": "4"}, {"mesh": "a.homesh"})
    assert merged == {"mesh": "a.homesh"}
    assert merge_layers({"mesh": "a"}, {"generator": "tri"}) == {"generator": "tri"}
    cfg = build_run_config({"preset": "fig2", "mesh": "a.homesh"})
    assert cfg.generator is None and cfg.optimizer.max_sweeps == 300


def test_presets():
    f2, f3 = preset("fig2"), preset("fig3")
    assert (f2.generator.kind, f2.generator.n_per_side, f2.generator.order) == ("quad", 24, 3)
    assert (f3.generator.kind, f3.generator.order) == ("tri", 3)
    assert f2.metric.kind == f3.metric.kind == "ring"
    assert f2.metric.profile.min_r == 0.1
    assert preset("identity", svg=False).svg is False


def test_run_adapt_library_paths(tmp_path):
    cfg = build_run_config(merge_layers(parse_config_text(SMALL), {"out": str(tmp_path), "zoom": "0,0.5,0,0.5"}))
    res = run_adapt(cfg)
    assert res.exit_code == 0
    assert set(res.paths) >= {"mesh", "report", "history", "initial_svg", "adapted_svg", "zoom_svg"}
