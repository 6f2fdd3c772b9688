import math

import numpy as np
import pytest

from willmore_iso import meshio
from willmore_iso.cli import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, main
from willmore_iso.functionals import EnergyReport
from willmore_iso.generators import icosphere, perturb
from willmore_iso.mesh import Mesh


@pytest.fixture(autouse=True)
def run_in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


FAST_FLOW_CFG = "max_iterations = 15\n"
FAST_SWEEP_CFG = (
    "max_iterations = 30\nseeds_per_r = 1\nsphere_subdivisions = 2\n"
)
FAST_PROBE_CFG = "max_iterations = 20\nseeds_per_r = 1\ntorus_resolution = 64\n"


def _write(path, text):
    path.write_text(text, encoding="ascii")
    return str(path)


# ---------------------------------------------------------------- gen/energy


def test_gen_energy_check_pipeline(tmp_path, capsys):
    assert main(["gen", "icosphere", "--subdivisions", "2", "--out", "s.obj"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "s.obj" in out and "162 vertices" in out

    assert main(["energy", "s.obj"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "willmore_H2 = " in out
    assert "iso = " in out

    assert main(["check", "s.obj"]) == EXIT_OK
    out = capsys.readouterr().out
    lines = [l for l in out.strip().split("\n")]
    assert len(lines) == 8
    assert all(l.startswith("PASS ") for l in lines)


def test_gen_is_seed_deterministic(tmp_path, capsys):
    args = ["gen", "icosphere", "--subdivisions", "1", "--perturb", "0.01"]
    main(args + ["--seed", "3", "--out", "a.obj"])
    main(args + ["--seed", "3", "--out", "b.obj"])
    main(args + ["--seed", "4", "--out", "c.obj"])
    capsys.readouterr()
    a = (tmp_path / "a.obj").read_bytes()
    assert a == (tmp_path / "b.obj").read_bytes()
    assert a != (tmp_path / "c.obj").read_bytes()


def test_gen_rejects_bad_arguments(capsys):
    assert main(["gen", "icosphere", "--subdivisions", "-1"]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err


def test_energy_csv_appends(tmp_path, capsys):
    main(["gen", "icosphere", "--subdivisions", "1", "--out", "s.obj"])
    main(["energy", "s.obj", "--csv", "log.csv"])
    main(["energy", "s.obj", "--csv", "log.csv"])
    capsys.readouterr()
    lines = (tmp_path / "log.csv").read_text().strip().split("\n")
    assert lines[0] == EnergyReport.csv_header()
    assert len(lines) == 3
    assert lines[1] == lines[2]


def test_energy_on_unreadable_file(tmp_path, capsys):
    path = _write(tmp_path / "junk.obj", "v 0 0\nf 1 2 3\n")
    assert main(["energy", path]) == EXIT_INPUT
    assert "error: cannot read mesh" in capsys.readouterr().err


def test_energy_on_missing_file(capsys):
    assert main(["energy", "no_such_file.obj"]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err


# ---------------------------------------------------------------- flow


def test_flow_writes_outputs(tmp_path, capsys):
    mesh = perturb(icosphere(1), 0.02, seed=1)
    meshio.save(mesh, tmp_path / "w.obj")
    cfg = _write(tmp_path / "f.cfg", FAST_FLOW_CFG)
    code = main(["flow", "w.obj", "--config", cfg, "--svg", "trace.svg"])
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "final W = " in out
    assert "status = max_iters" in out
    assert (tmp_path / "w_final.obj").exists()
    trace = (tmp_path / "w_trace.csv").read_text().strip().split("\n")
    assert trace[0].startswith("iteration,willmore,")
    assert len(trace) == 16  # header + 15 iterations
    svg = (tmp_path / "trace.svg").read_text()
    assert svg.startswith("<svg ")


def test_flow_zero_iterations_echo(tmp_path, capsys):
    meshio.save(icosphere(1), tmp_path / "s.obj")
    cfg = _write(tmp_path / "z.cfg", "max_iterations = 0\n")
    code = main(["flow", "s.obj", "--config", cfg, "--svg", "t.svg"])
    captured = capsys.readouterr()
    assert code == EXIT_OK
    assert "iterations = 0" in captured.out
    assert "empty trace" in captured.err
    assert not (tmp_path / "t.svg").exists()
    # trace file holds just the header
    trace = (tmp_path / "s_trace.csv").read_text().strip().split("\n")
    assert len(trace) == 1


def test_flow_rejects_unknown_config_key(tmp_path, capsys):
    meshio.save(icosphere(1), tmp_path / "s.obj")
    cfg = _write(tmp_path / "bad.cfg", "max_iters = 5\n")
    assert main(["flow", "s.obj", "--config", cfg]) == EXIT_INPUT
    assert "unknown config keys" in capsys.readouterr().err


# ---------------------------------------------------------------- check


def test_check_flags_negative_volume(tmp_path, capsys):
    mesh = icosphere(2)
    meshio.save(mesh.with_vertices(-mesh.vertices), tmp_path / "inv.obj")
    assert main(["check", "inv.obj"]) == EXIT_NUMERICAL
    out = capsys.readouterr().out
    assert "FAIL iso_floor (nonpositive volume" in out


def test_check_flags_open_mesh(tmp_path, capsys):
    verts = np.array(
        [[1.0, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
    )
    open_mesh = Mesh(verts, np.array([[0, 1, 2], [0, 2, 3], [0, 3, 1]]))
    meshio.save(open_mesh, tmp_path / "open.obj")
    assert main(["check", "open.obj"]) == EXIT_NUMERICAL
    out = capsys.readouterr().out
    assert out.startswith("FAIL closed_oriented_manifold")
    assert len(out.strip().split("\n")) == 1  # later checks are skipped


# ---------------------------------------------------------------- sweep


def test_sweep_pipeline_schygulla_then_probe(tmp_path, capsys):
    cfg = _write(tmp_path / "s.cfg", FAST_SWEEP_CFG)
    code = main(
        ["sweep", "--mode", "schygulla", "--grid", "115,125", "--config", cfg]
    )
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "wrote sweep_schygulla.csv" in out
    assert "wrote curve.csv" in out
    assert (tmp_path / "curve.csv").exists()

    probe_cfg = _write(tmp_path / "p.cfg", FAST_PROBE_CFG)
    code = main(
        ["sweep", "--mode", "ig_probe", "--grid", "120", "--config", probe_cfg]
    )
    out = capsys.readouterr().out
    assert code == EXIT_OK
    assert "admissible = " in out
    rows = (tmp_path / "sweep_ig_probe.csv").read_text().strip().split("\n")
    data = [l for l in rows if not l.startswith("#")][1:]
    assert len(data) == 1
    assert data[0].split(",")[4] in ("true", "false")


def test_sweep_grid_file_with_comments(tmp_path, capsys):
    cfg = _write(tmp_path / "s.cfg", FAST_SWEEP_CFG)
    grid = _write(tmp_path / "grid.txt", "# ratios\n115\n\n125  # upper\n")
    code = main(
        ["sweep", "--mode", "schygulla", "--grid", grid, "--config", cfg,
         "--out", "rows.csv", "--curve", "c.csv"]
    )
    capsys.readouterr()
    assert code == EXIT_OK
    assert (tmp_path / "rows.csv").exists()
    assert (tmp_path / "c.csv").exists()


def test_probe_without_curve_exits_with_instructions(capsys):
    code = main(["sweep", "--mode", "ig_probe", "--grid", "120"])
    assert code == EXIT_INPUT
    err = capsys.readouterr().err
    assert "schygulla" in err


def test_sweep_rejects_bad_grid(capsys):
    assert main(["sweep", "--mode", "schygulla", "--grid", "125,115"]) == EXIT_INPUT
    assert "sorted" in capsys.readouterr().err
    assert main(["sweep", "--mode", "schygulla", "--grid", "50"]) == EXIT_INPUT
    assert "floor" in capsys.readouterr().err
