"""All file output: CSV with full-precision numbers, VTK legacy ASCII
meshes and fields, JSON reports, and the manifest tracking every file.

Floats are written with ``repr`` (shortest round-trip decimal), so CSV and
JSON values re-parse to bit-identical doubles.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .errors import OutputError


def fmt_number(x):
    """Shortest round-trip decimal for floats, plain digits for ints."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


class OutputDir:
    """Managed output directory; records every file for the manifest."""

    def __init__(self, path):
        self.path = str(path)
        try:
            os.makedirs(self.path, exist_ok=True)
        except OSError as exc:
            raise OutputError(f"cannot create output directory "
                              f"{self.path}: {exc}") from None
        self.files = []

    def _register(self, name):
        self.files.append(name)
        return os.path.join(self.path, name)

    def _open(self, name):
        full = self._register(name)
        try:
            return open(full, "w", encoding="utf-8", newline="")
        except OSError as exc:
            raise OutputError(f"cannot write {full}: {exc}") from None

    def write_csv(self, name, header, columns):
        """Single header row then one row per entry of the column arrays."""
        columns = [np.asarray(c) for c in columns]
        n = columns[0].shape[0] if columns else 0
        with self._open(name) as fh:
            fh.write(",".join(header) + "\n")
            for i in range(n):
                fh.write(",".join(fmt_number(c[i]) for c in columns) + "\n")

    def write_json(self, name, obj):
        with self._open(name) as fh:
            json.dump(_plain(obj), fh, indent=2, sort_keys=False)
            fh.write("\n")

    def write_vtk_mesh(self, name, mesh, cell_data_name="tile", cell_data=None):
        """Triangle mesh as UNSTRUCTURED_GRID with an integer CELL_DATA array."""
        if cell_data is None:
            cell_data = getattr(mesh, "cell_of_triangle",
                                np.zeros(mesh.n_triangles, dtype=np.int32))
        with self._open(name) as fh:
            _vtk_header(fh, mesh)
            fh.write(f"CELL_DATA {mesh.n_triangles}\n")
            fh.write(f"SCALARS {cell_data_name} int 1\nLOOKUP_TABLE default\n")
            for v in np.asarray(cell_data, dtype=np.int64):
                fh.write(f"{v}\n")

    def write_vtk_fields(self, name, mesh, point_data):
        """POINT_DATA scalar fields on a mesh; surface fields come expanded."""
        with self._open(name) as fh:
            _vtk_header(fh, mesh)
            fh.write(f"POINT_DATA {mesh.n_vertices}\n")
            for fname, values in point_data.items():
                values = np.asarray(values, dtype=float)
                fh.write(f"SCALARS {fname} double 1\nLOOKUP_TABLE default\n")
                for v in values:
                    fh.write(fmt_number(v) + "\n")

    def save_figure(self, name, fig):
        full = self._register(name)
        try:
            fig.savefig(full)
        except OSError as exc:
            raise OutputError(f"cannot write {full}: {exc}") from None

    def write_manifest(self):
        """List every written file with its byte size (itself included)."""
        entries = {}
        for name in self.files:
            full = os.path.join(self.path, name)
            entries[name] = os.path.getsize(full)
        entries["manifest.json"] = None
        full = os.path.join(self.path, "manifest.json")
        try:
            with open(full, "w", encoding="utf-8") as fh:
                json.dump({"files": entries}, fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            raise OutputError(f"cannot write {full}: {exc}") from None
        return entries


def _vtk_header(fh, mesh):
    fh.write("# vtk DataFile Version 2.0\n")
    fh.write("porohom mesh\n")
    fh.write("ASCII\n")
    fh.write("DATASET UNSTRUCTURED_GRID\n")
    fh.write(f"POINTS {mesh.n_vertices} double\n")
    for x, y in mesh.vertices:
        fh.write(f"{fmt_number(x)} {fmt_number(y)} 0.0\n")
    m = mesh.n_triangles
    fh.write(f"CELLS {m} {4 * m}\n")
    for a, b, c in mesh.triangles:
        fh.write(f"3 {a} {b} {c}\n")
    fh.write(f"CELL_TYPES {m}\n")
    fh.write("5\n" * m)


def _plain(obj):
    """Recursively convert numpy containers for json serialization."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def trace_csv_columns(trace):
    """Header and column arrays for a run's per-step trace CSV."""
    header = ["time"] + list(trace.series.keys())
    columns = [trace.times] + [trace.series[k] for k in trace.series]
    return header, columns


def surface_to_full(mesh, values, vertex_ids):
    """Expand a compact surface field to vertex length (zero elsewhere)."""
    full = np.zeros(mesh.n_vertices)
    if len(values):
        full[vertex_ids] = values
    return full
