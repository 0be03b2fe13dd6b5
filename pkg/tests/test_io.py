"""Writers: CSV precision, VTK structure, JSON round-trips, manifest."""

import json
import os

import numpy as np
import pytest

from porohom.io import OutputDir, fmt_number, surface_to_full, \
    trace_csv_columns
from porohom.kinetics import ModelParams
from porohom.mesh import INTERFACE, build_perforated_mesh, \
    build_unit_cell_mesh
from porohom.micro import run_micro


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    tpl = build_unit_cell_mesh(0.25, 32, 0.2)
    mesh = build_perforated_mesh((0, 0.4, 0, 0.4), 0.2, tpl)
    params = ModelParams(T=0.1, dt=0.01, sample_stride=5)
    from porohom.micro import TraceRequest
    trace = run_micro(mesh, params,
                      trace_req=TraceRequest(points=((0.2, 0.2),)))
    return mesh, trace


class TestNumbers:
    def test_floats_round_trip(self):
        for x in (0.1, 1.0 / 3.0, 1e-300, 123456.789e12, -0.0):
            assert float(fmt_number(x)) == x

    def test_ints_plain(self):
        assert fmt_number(42) == "42"
        assert fmt_number(np.int32(-3)) == "-3"


class TestCsv:
    def test_header_only_for_empty_series(self, tmp_path):
        out = OutputDir(tmp_path)
        out.write_csv("empty.csv", ["time", "value"],
                      [np.array([]), np.array([])])
        lines = (tmp_path / "empty.csv").read_text().splitlines()
        assert lines == ["time,value"]

    def test_values_reparse_bit_identical(self, tmp_path, small_run):
        _, trace = small_run
        out = OutputDir(tmp_path)
        header, columns = trace_csv_columns(trace)
        out.write_csv("trace.csv", header, columns)
        lines = (tmp_path / "trace.csv").read_text().splitlines()
        assert lines[0].split(",") == header
        parsed = np.array([[float(v) for v in line.split(",")]
                           for line in lines[1:]])
        assert np.array_equal(parsed[:, 0], trace.times)
        for j, name in enumerate(header[1:], start=1):
            assert np.array_equal(parsed[:, j], trace.series[name]), name


class TestVtk:
    def test_mesh_file_structure(self, tmp_path, small_run):
        mesh, _ = small_run
        out = OutputDir(tmp_path)
        out.write_vtk_mesh("mesh.vtk", mesh)
        text = (tmp_path / "mesh.vtk").read_text().splitlines()
        assert text[0] == "# vtk DataFile Version 2.0"
        assert "ASCII" in text[2]
        assert text[3] == "DATASET UNSTRUCTURED_GRID"
        assert text[4] == f"POINTS {mesh.n_vertices} double"
        cells_line = text.index(f"CELLS {mesh.n_triangles} {4 * mesh.n_triangles}")
        assert text[cells_line + 1].startswith("3 ")
        assert f"CELL_DATA {mesh.n_triangles}" in text
        assert any(line.startswith("SCALARS tile int 1") for line in text)

    def test_fields_file(self, tmp_path, small_run):
        mesh, trace = small_run
        out = OutputDir(tmp_path)
        snap = trace.snapshots[0]
        w_full = surface_to_full(mesh, snap.fields["w"],
                                 mesh.interface_vertices())
        out.write_vtk_fields("fields.vtk", mesh,
                             {"u": snap.fields["u"], "w": w_full})
        text = (tmp_path / "fields.vtk").read_text()
        assert f"POINT_DATA {mesh.n_vertices}" in text
        assert "SCALARS u double 1" in text
        assert "SCALARS w double 1" in text

    def test_counts_match(self, tmp_path, small_run):
        mesh, _ = small_run
        out = OutputDir(tmp_path)
        out.write_vtk_mesh("mesh.vtk", mesh)
        text = (tmp_path / "mesh.vtk").read_text().splitlines()
        start = text.index(f"POINTS {mesh.n_vertices} double") + 1
        pts = text[start:start + mesh.n_vertices]
        assert len(pts) == mesh.n_vertices
        assert all(len(line.split()) == 3 for line in pts)


class TestManifest:
    def test_every_file_listed(self, tmp_path, small_run):
        mesh, trace = small_run
        out = OutputDir(tmp_path)
        out.write_csv("a.csv", ["x"], [np.array([1.0])])
        out.write_json("b.json", {"k": 1.5})
        out.write_vtk_mesh("c.vtk", mesh)
        out.write_manifest()
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        on_disk = sorted(os.listdir(tmp_path))
        assert sorted(manifest["files"].keys()) == on_disk
        for name, size in manifest["files"].items():
            if name == "manifest.json":
                assert size is None
            else:
                assert size == os.path.getsize(tmp_path / name)


class TestJson:
    def test_numpy_types_serializable(self, tmp_path):
        out = OutputDir(tmp_path)
        out.write_json("r.json", {"a": np.float64(0.1),
                                  "b": np.arange(3),
                                  "c": {"d": np.int64(7)},
                                  "e": [np.True_]})
        back = json.loads((tmp_path / "r.json").read_text())
        assert back == {"a": 0.1, "b": [0, 1, 2], "c": {"d": 7}, "e": [True]}

    def test_full_precision(self, tmp_path):
        out = OutputDir(tmp_path)
        val = 0.1 + 0.2  # 0.30000000000000004
        out.write_json("p.json", {"v": val})
        back = json.loads((tmp_path / "p.json").read_text())
        assert back["v"] == val
