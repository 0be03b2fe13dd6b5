"""CLI dispatch: exit codes, file outputs, overrides."""

import json
import os

import numpy as np
import pytest

from porohom.cli import main

LIGHT = """\
geometry.domain = 0,0.4,0,0.4
geometry.epsilon = 0.2
geometry.radius = 0.25
geometry.n_gamma = 32
geometry.h_cell = 0.1
geometry.h_micro = 0.2
geometry.h_macro = 0.1
run.dt = 0.01
run.T = 0.1
run.sample_stride = 5
run.burst_T = 0.02
run.trace_points = 0.2,0.2
sweep.eps_list = 0.2,0.1
"""


@pytest.fixture()
def light_cfg(tmp_path):
    path = tmp_path / "light.cfg"
    path.write_text(LIGHT)
    return str(path)


def test_no_arguments_usage_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_unknown_subcommand_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["explode", "--config", "x"])
    assert exc.value.code == 2


def test_missing_config_flag_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["cell"])
    assert exc.value.code == 2


def test_cell_writes_tensor_report(light_cfg, tmp_path, capsys):
    out = tmp_path / "cellout"
    assert main(["cell", "--config", light_cfg, "--out", str(out)]) == 0
    report = json.loads((out / "cell_report.json").read_text())
    A = np.array(report["A"])
    assert A.shape == (2, 2)
    assert 0.0 < A[0, 0] <= 1.0
    assert np.allclose(np.array(report["B"]), 2 * A, rtol=1e-12)
    assert (out / "cell_fields.vtk").exists()
    assert (out / "manifest.json").exists()


def test_mesh_command(light_cfg, tmp_path):
    out = tmp_path / "meshes"
    assert main(["mesh", "--config", light_cfg, "--out", str(out)]) == 0
    stats = json.loads((out / "mesh_stats.json").read_text())
    assert stats["perforated"]["n_cells"] == 4
    for name in ("template.vtk", "perforated.vtk", "macro.vtk"):
        assert (out / name).exists()


def test_micro_command_snapshot_count(light_cfg, tmp_path):
    out = tmp_path / "micro"
    assert main(["micro", "--config", light_cfg, "--out", str(out)]) == 0
    # floor(T / (dt * stride)) + 1 regular snapshots
    expected = int(0.1 / (0.01 * 5)) + 1
    vtks = [f for f in os.listdir(out)
            if f.startswith("micro_") and f.endswith(".vtk")]
    assert len(vtks) == expected
    assert (out / "micro_trace.csv").exists()
    summary = json.loads((out / "micro_summary.json").read_text())
    assert summary["wall_time"] > 0.0


def test_macro_command_with_cell_report(light_cfg, tmp_path):
    cell_out = tmp_path / "cell"
    assert main(["cell", "--config", light_cfg, "--out", str(cell_out)]) == 0
    out = tmp_path / "macro"
    assert main(["macro", "--config", light_cfg, "--out", str(out),
                 "--cell-report", str(cell_out / "cell_report.json")]) == 0
    assert (out / "macro_trace.csv").exists()
    coeffs = json.loads((out / "macro_coefficients.json").read_text())
    report = json.loads((cell_out / "cell_report.json").read_text())
    assert coeffs["A"] == report["A"]


def test_macro_inline_tensor_override(light_cfg, tmp_path):
    out = tmp_path / "macro_inline"
    code = main(["macro", "--config", light_cfg, "--out", str(out),
                 "--tensor-a", "0.8,0,0.8", "--tensor-b", "1.6,0,1.6",
                 "--porosity", "0.8", "--interface-measure", "1.57"])
    assert code == 0
    coeffs = json.loads((out / "macro_coefficients.json").read_text())
    assert coeffs["A"][0][0] == 0.8


def test_converge_two_eps_rows(light_cfg, tmp_path):
    out = tmp_path / "conv"
    code = main(["converge", "--config", light_cfg, "--out", str(out),
                 "--eps", "0.2,0.1"])
    assert code == 0
    lines = (out / "norms.csv").read_text().splitlines()
    assert len(lines) == 3  # header + 2 rows
    assert lines[0].startswith("epsilon,")
    report = json.loads((out / "report.json").read_text())
    assert len(report["rows"]) == 2
    assert (out / "norms.svg").exists()
    assert (out / "energies_0.2.csv").exists()
    assert (out / "energies_0.1.csv").exists()


def test_verify_single_row(light_cfg, tmp_path):
    out = tmp_path / "verify"
    assert main(["verify", "--config", light_cfg, "--out", str(out)]) == 0
    lines = (out / "norms.csv").read_text().splitlines()
    assert len(lines) == 2
    report = json.loads((out / "report.json").read_text())
    assert report["rows"][0]["epsilon"] == 0.2
    assert "wall_time_ratio" in report


def test_report_json_round_trips_norms(light_cfg, tmp_path):
    out = tmp_path / "verify_rt"
    assert main(["verify", "--config", light_cfg, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    lines = (out / "norms.csv").read_text().splitlines()
    header = lines[0].split(",")
    values = [float(x) for x in lines[1].split(",")]
    for name, val in zip(header, values):
        assert report["rows"][0][name] == val


def test_bad_config_exit_1(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("params.detla = 0.01\n")
    assert main(["cell", "--config", str(path)]) == 1
    err = capsys.readouterr().err
    assert err.startswith("error[config]")


def test_incommensurate_epsilon_exit_1(light_cfg, tmp_path, capsys):
    out = tmp_path / "bad_eps"
    code = main(["micro", "--config", light_cfg, "--out", str(out),
                 "--epsilon", "0.15"])
    assert code == 1
    assert "error[tiling]" in capsys.readouterr().err


def test_epsilon_override(light_cfg, tmp_path):
    out = tmp_path / "eps01"
    assert main(["micro", "--config", light_cfg, "--out", str(out),
                 "--epsilon", "0.1"]) == 0
    summary = json.loads((out / "micro_summary.json").read_text())
    assert summary["epsilon"] == 0.1


def test_manifest_covers_outputs(light_cfg, tmp_path):
    out = tmp_path / "mani"
    assert main(["verify", "--config", light_cfg, "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert sorted(manifest["files"].keys()) == sorted(os.listdir(out))


def test_svg_figures_have_fixed_viewbox(light_cfg, tmp_path):
    out = tmp_path / "figs"
    assert main(["verify", "--config", light_cfg, "--out", str(out)]) == 0
    svgs = [f for f in os.listdir(out) if f.endswith(".svg")]
    assert svgs
    for name in svgs:
        head = (out / name).read_text()[:1200]
        assert 'viewBox="0 0 800 600"' in head
