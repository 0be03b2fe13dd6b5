"""Triangle meshes for the perforated geometry.

Three generators cover everything the solvers need: the unit cell with a
polygonal inclusion hole (``build_unit_cell_mesh``), the epsilon-scaled
periodic tiling of that cell over a rectangle (``build_perforated_mesh``),
and a plain structured rectangle (``build_macro_mesh``).  All meshes are
immutable after construction; derived quantities (areas, gradients, the
point locator) are cached lazily.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import Delaunay

from .errors import ConformityError, GeometryError, MeshingError, TilingError

# boundary edge kinds
OUTER = 0
INTERFACE = 1
CELL_FACE = 2

# CELL_FACE sides
SIDE_XMIN = 0
SIDE_XMAX = 1
SIDE_YMIN = 2
SIDE_YMAX = 3

_KIND_NAMES = {OUTER: "Outer", INTERFACE: "Interface", CELL_FACE: "CellFace"}

MAX_RADIUS = 0.45


class Mesh2D:
    """Conforming triangle mesh with tagged boundary edges.

    Parameters
    ----------
    vertices : (N, 2) float array
    triangles : (M, 3) int array, counter-clockwise
    boundary_edges : (B, 2) int array
    edge_kind : (B,) int array of OUTER / INTERFACE / CELL_FACE
    edge_side : (B,) int array, CELL_FACE side or -1
    edge_pair : (B,) int array; cell id for INTERFACE edges, axis for
        CELL_FACE edges, -1 otherwise
    meta : dict of construction parameters (epsilon, radius, ...)
    """

    def __init__(self, vertices, triangles, boundary_edges, edge_kind,
                 edge_side=None, edge_pair=None, meta=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int32)
        self.boundary_edges = np.ascontiguousarray(boundary_edges, dtype=np.int32)
        nb = len(self.boundary_edges)
        self.edge_kind = np.ascontiguousarray(edge_kind, dtype=np.int8)
        self.edge_side = (np.full(nb, -1, dtype=np.int8) if edge_side is None
                          else np.ascontiguousarray(edge_side, dtype=np.int8))
        self.edge_pair = (np.full(nb, -1, dtype=np.int32) if edge_pair is None
                          else np.ascontiguousarray(edge_pair, dtype=np.int32))
        self.meta = dict(meta or {})
        self._areas = None
        self._grad_ops = None
        self._locator = None
        self._interface_vertices = None

    # -- basic sizes ----------------------------------------------------

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_triangles(self):
        return len(self.triangles)

    @property
    def element_areas(self):
        """Per-triangle area (cached)."""
        if self._areas is None:
            self._areas = _signed_areas(self.vertices, self.triangles)
        return self._areas

    @property
    def grad_ops(self):
        """(M, 2, 3) operators mapping nodal values to the P1 gradient."""
        if self._grad_ops is None:
            self._grad_ops = _grad_operators(self.vertices, self.triangles)
        return self._grad_ops

    @property
    def total_area(self):
        return float(self.element_areas.sum())

    def interface_vertices(self):
        """Sorted vertex indices lying on INTERFACE edges."""
        if self._interface_vertices is None:
            sel = self.edge_kind == INTERFACE
            self._interface_vertices = np.unique(self.boundary_edges[sel])
        return self._interface_vertices

    def edge_lengths(self, kind=None):
        edges = self.boundary_edges if kind is None else \
            self.boundary_edges[self.edge_kind == kind]
        d = self.vertices[edges[:, 0]] - self.vertices[edges[:, 1]]
        return np.hypot(d[:, 0], d[:, 1])

    def boundary_length(self, kind):
        return float(self.edge_lengths(kind).sum())

    # -- point location --------------------------------------------------

    @property
    def locator(self):
        if self._locator is None:
            self._locator = PointLocator(self)
        return self._locator

    # -- periodicity -----------------------------------------------------

    def periodic_pairs(self, tol=1e-12):
        """Match vertices on opposite cell faces of a unit-cell mesh.

        Returns (left, right, bottom, top) index arrays where left[i]
        corresponds to right[i] under translation by (1, 0) and
        bottom[i] to top[i] under (0, 1).
        """
        v = self.vertices
        xmin, ymin = v.min(axis=0)
        xmax, ymax = v.max(axis=0)
        left = np.where(np.abs(v[:, 0] - xmin) <= tol)[0]
        right = np.where(np.abs(v[:, 0] - xmax) <= tol)[0]
        bottom = np.where(np.abs(v[:, 1] - ymin) <= tol)[0]
        top = np.where(np.abs(v[:, 1] - ymax) <= tol)[0]
        left = left[np.argsort(v[left, 1], kind="stable")]
        right = right[np.argsort(v[right, 1], kind="stable")]
        bottom = bottom[np.argsort(v[bottom, 0], kind="stable")]
        top = top[np.argsort(v[top, 0], kind="stable")]
        if len(left) != len(right) or len(bottom) != len(top):
            raise ConformityError("opposite cell faces carry different vertex counts")
        if np.any(np.abs(v[left, 1] - v[right, 1]) > tol) or \
           np.any(np.abs(v[bottom, 0] - v[top, 0]) > tol):
            raise ConformityError("cell-face vertices do not match under translation")
        return left, right, bottom, top

    # -- consistency checks ----------------------------------------------

    def validate(self, tol=1e-10):
        """Check the structural invariants; raises MeshingError on failure."""
        if np.any(self.element_areas <= 0.0):
            bad = int(np.argmin(self.element_areas))
            raise MeshingError(f"triangle {bad} has non-positive area "
                               f"{self.element_areas[bad]:.3e}")
        topo = _boundary_edge_set(self.triangles)
        tagged = {tuple(sorted(e)) for e in self.boundary_edges.tolist()}
        if topo != tagged:
            raise MeshingError(
                f"tagged boundary edges do not cover the topological boundary "
                f"({len(tagged)} tagged vs {len(topo)} actual)")
        if len(tagged) != len(self.boundary_edges):
            raise MeshingError("duplicate boundary edge tags")
        self._validate_interface_circles(tol)
        return self

    def _validate_interface_circles(self, tol):
        sel = self.edge_kind == INTERFACE
        if not np.any(sel):
            return
        radius = self.meta.get("radius")
        if radius is None:
            return
        eps = self.meta.get("epsilon", 1.0)
        centers = self.meta.get("hole_centers")
        if centers is None:
            centers = {-1: (0.5, 0.5)}
        pts = self.vertices[self.boundary_edges[sel]].reshape(-1, 2)
        pair = np.repeat(self.edge_pair[sel], 2)
        for pid in np.unique(pair):
            c = np.asarray(centers[int(pid)] if int(pid) in centers
                           else centers.get(-1, (0.5, 0.5)))
            r = np.linalg.norm(pts[pair == pid] - c, axis=1)
            if np.any(np.abs(r - eps * radius) > tol):
                raise MeshingError(
                    f"interface vertices of hole {pid} deviate from the circle "
                    f"by up to {np.abs(r - eps * radius).max():.3e}")


class PointLocator:
    """Uniform spatial hash grid over a mesh for expected O(1) lookup."""

    def __init__(self, mesh, tol=1e-12):
        self.mesh = mesh
        self.tol = tol
        v = mesh.vertices
        self.lo = v.min(axis=0)
        hi = v.max(axis=0)
        span = np.maximum(hi - self.lo, 1e-30)
        # about two triangles per bucket on a quasi-uniform mesh
        n = max(1, int(np.sqrt(mesh.n_triangles / 2.0)))
        self.shape = (max(1, int(n * span[0] / max(span[0], span[1]))) or 1,
                      max(1, int(n * span[1] / max(span[0], span[1]))) or 1)
        self.cell = span / np.array(self.shape)
        tri_pts = v[mesh.triangles]
        lo_idx = self._bucket_of(tri_pts.min(axis=1) - self.tol)
        hi_idx = self._bucket_of(tri_pts.max(axis=1) + self.tol)
        buckets = {}
        for t in range(mesh.n_triangles):
            for bx in range(lo_idx[t, 0], hi_idx[t, 0] + 1):
                for by in range(lo_idx[t, 1], hi_idx[t, 1] + 1):
                    buckets.setdefault((bx, by), []).append(t)
        self.buckets = {k: np.array(ts, dtype=np.int64)
                        for k, ts in buckets.items()}

    def _bucket_of(self, pts):
        idx = np.floor((pts - self.lo) / self.cell).astype(np.int64)
        return np.clip(idx, 0, np.array(self.shape) - 1)

    def locate(self, points):
        """Locate points; returns (tri_indices, barycentric) with -1 for misses."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = len(pts)
        tri_out = np.full(n, -1, dtype=np.int64)
        bary_out = np.full((n, 3), np.nan)
        keys = self._bucket_of(pts)
        order = np.lexsort((keys[:, 1], keys[:, 0]))
        v = self.mesh.vertices
        tris = self.mesh.triangles
        i = 0
        while i < n:
            j = i
            key = (keys[order[i], 0], keys[order[i], 1])
            while j < n and (keys[order[j], 0], keys[order[j], 1]) == key:
                j += 1
            qidx = order[i:j]
            cands = self.buckets.get(key)
            if cands is not None:
                remaining = qidx
                q = pts[remaining]
                for t in cands:
                    if len(remaining) == 0:
                        break
                    lam = _barycentric(v[tris[t]], q)
                    hit = np.all(lam >= -self.tol, axis=1)
                    if np.any(hit):
                        sel = remaining[hit]
                        tri_out[sel] = t
                        bary_out[sel] = lam[hit]
                        remaining = remaining[~hit]
                        q = q[~hit]
            i = j
        return tri_out, bary_out


def locate_point(mesh, p):
    """Locate a single point; returns (triangle index, barycentric) or None."""
    tri, bary = mesh.locator.locate(np.asarray(p, dtype=float)[None, :])
    if tri[0] < 0:
        return None
    return int(tri[0]), bary[0]


# ---------------------------------------------------------------------------
# low-level helpers


def _signed_areas(vertices, triangles):
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    return 0.5 * ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
                  - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0]))


def _grad_operators(vertices, triangles):
    p0 = vertices[triangles[:, 0]]
    p1 = vertices[triangles[:, 1]]
    p2 = vertices[triangles[:, 2]]
    det = ((p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1])
           - (p1[:, 1] - p0[:, 1]) * (p2[:, 0] - p0[:, 0]))
    g = np.empty((len(triangles), 2, 3))
    g[:, 0, 0] = p1[:, 1] - p2[:, 1]
    g[:, 0, 1] = p2[:, 1] - p0[:, 1]
    g[:, 0, 2] = p0[:, 1] - p1[:, 1]
    g[:, 1, 0] = p2[:, 0] - p1[:, 0]
    g[:, 1, 1] = p0[:, 0] - p2[:, 0]
    g[:, 1, 2] = p1[:, 0] - p0[:, 0]
    g /= det[:, None, None]
    return g


def _barycentric(tri_pts, q):
    a, b, c = tri_pts
    m00 = b[0] - a[0]
    m01 = c[0] - a[0]
    m10 = b[1] - a[1]
    m11 = c[1] - a[1]
    det = m00 * m11 - m01 * m10
    dx = q[:, 0] - a[0]
    dy = q[:, 1] - a[1]
    l1 = (m11 * dx - m01 * dy) / det
    l2 = (-m10 * dx + m00 * dy) / det
    return np.column_stack([1.0 - l1 - l2, l1, l2])


def _boundary_edge_set(triangles):
    e = np.concatenate([triangles[:, [0, 1]], triangles[:, [1, 2]],
                        triangles[:, [2, 0]]])
    e = np.sort(e, axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    return {tuple(row) for row in uniq[counts == 1].tolist()}


def _orient_ccw(vertices, triangles):
    areas = _signed_areas(vertices, triangles)
    flip = areas < 0
    triangles = triangles.copy()
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    return triangles


# ---------------------------------------------------------------------------
# generators


def _structured_square_points(h):
    n_side = max(2, int(round(1.0 / h)))
    s = np.linspace(0.0, 1.0, n_side + 1)
    return s, n_side


def _classify_unit_square_edges(vertices, edges, tol=1e-12):
    """Assign CELL_FACE side tags to boundary edges of a unit-square cell."""
    mid = 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])
    side = np.full(len(edges), -1, dtype=np.int8)
    side[np.abs(mid[:, 0]) <= tol] = SIDE_XMIN
    side[np.abs(mid[:, 0] - 1.0) <= tol] = SIDE_XMAX
    side[np.abs(mid[:, 1]) <= tol] = SIDE_YMIN
    side[np.abs(mid[:, 1] - 1.0) <= tol] = SIDE_YMAX
    return side


def build_unit_cell_mesh(radius, n_gamma, h, no_inclusion=False):
    """Triangulate the unit periodicity cell, minus a polygonal hole.

    Parameters
    ----------
    radius : float
        Inclusion radius, in (0, 0.45).  Ignored when ``no_inclusion``.
    n_gamma : int
        Even number of polygon segments approximating the circular
        interface; vertices sit exactly on the circle.
    h : float
        Target edge length.  The square sides get uniform subdivisions so
        opposite faces match vertex-for-vertex.
    no_inclusion : bool
        Mesh the full square (used for the hole-free reference cell).
    """
    if h <= 0:
        raise GeometryError(f"target edge length must be positive, got {h}")
    if not no_inclusion:
        if not (0.0 < radius < MAX_RADIUS):
            raise GeometryError(
                f"inclusion radius {radius} outside (0, {MAX_RADIUS}): the solid "
                f"part must stay clear of the cell boundary")
        if n_gamma < 16 or n_gamma % 2 != 0:
            raise GeometryError(f"n_gamma must be even and >= 16, got {n_gamma}")

    if no_inclusion:
        mesh = _structured_rect_mesh(0.0, 1.0, 0.0, 1.0, h, h)
        side = _classify_unit_square_edges(mesh.vertices, mesh.boundary_edges)
        kind = np.full(len(mesh.boundary_edges), CELL_FACE, dtype=np.int8)
        pair = np.where((side == SIDE_XMIN) | (side == SIDE_XMAX), 0, 1)
        out = Mesh2D(mesh.vertices, mesh.triangles, mesh.boundary_edges,
                     kind, side, pair,
                     meta={"kind": "unit_cell", "radius": 0.0, "n_gamma": 0,
                           "h": h, "no_inclusion": True})
        return out.validate()

    s, _ = _structured_square_points(h)
    gx, gy = np.meshgrid(s, s, indexing="ij")
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    center = np.array([0.5, 0.5])
    ring_spacing = 2.0 * np.pi * radius / n_gamma
    guard_gap = 0.7 * max(h, ring_spacing)
    keep = np.linalg.norm(grid - center, axis=1) >= radius + guard_gap
    theta = 2.0 * np.pi * np.arange(n_gamma) / n_gamma
    ring = center + radius * np.column_stack([np.cos(theta), np.sin(theta)])
    theta2 = theta + np.pi / n_gamma
    guard = center + (radius + 0.55 * max(h, ring_spacing)) * \
        np.column_stack([np.cos(theta2), np.sin(theta2)])
    inside = ((guard[:, 0] > 1e-9) & (guard[:, 0] < 1 - 1e-9)
              & (guard[:, 1] > 1e-9) & (guard[:, 1] < 1 - 1e-9))
    points = np.vstack([grid[keep], ring, guard[inside]])
    ring_ids = np.arange(keep.sum(), keep.sum() + n_gamma)

    tri = Delaunay(points)
    triangles = _orient_ccw(tri.points, tri.simplices.astype(np.int32))
    # drop triangles covering the hole: centroid inside the inscribed polygon
    cent = tri.points[triangles].mean(axis=1)
    inradius = radius * np.cos(np.pi / n_gamma)
    triangles = triangles[np.linalg.norm(cent - center, axis=1) >= inradius]

    vertices = tri.points
    used = np.unique(triangles)
    if len(used) != len(vertices):
        remap = -np.ones(len(vertices), dtype=np.int32)
        remap[used] = np.arange(len(used), dtype=np.int32)
        vertices = vertices[used]
        triangles = remap[triangles]
        ring_ids = remap[ring_ids]
        if np.any(ring_ids < 0):
            raise MeshingError("interface vertices were lost near the inclusion")

    areas = _signed_areas(vertices, triangles)
    if np.any(areas <= 1e-14):
        raise MeshingError(
            f"degenerate triangle near the inclusion ring "
            f"(min area {areas.min():.3e}); refine h or n_gamma")

    edges = np.array(sorted(_boundary_edge_set(triangles)), dtype=np.int32)
    mid = 0.5 * (vertices[edges[:, 0]] + vertices[edges[:, 1]])
    on_ring = np.linalg.norm(mid - center, axis=1) < radius
    kind = np.where(on_ring, INTERFACE, CELL_FACE).astype(np.int8)
    side = _classify_unit_square_edges(vertices, edges)
    side[on_ring] = -1
    if np.any((~on_ring) & (side < 0)):
        raise ConformityError("boundary edge neither on the square nor the ring")
    if on_ring.sum() != n_gamma:
        raise MeshingError(
            f"interface has {on_ring.sum()} edges, expected {n_gamma}: the "
            f"triangulation does not conform to the inclusion polygon")
    pair = np.where(kind == INTERFACE, -1,
                    np.where((side == SIDE_XMIN) | (side == SIDE_XMAX), 0, 1))
    mesh = Mesh2D(vertices, triangles, edges, kind, side, pair.astype(np.int32),
                  meta={"kind": "unit_cell", "radius": radius,
                        "n_gamma": n_gamma, "h": h, "no_inclusion": False,
                        "hole_centers": {-1: (0.5, 0.5)}})
    mesh.validate()
    mesh.periodic_pairs()
    return mesh


def _structured_rect_mesh(x0, x1, y0, y1, hx, hy):
    """Uniform right-triangle mesh of a rectangle; all boundary edges untagged."""
    nx = max(1, int(round((x1 - x0) / hx)))
    ny = max(1, int(round((y1 - y0) / hy)))
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    vertices = np.column_stack([gx.ravel(), gy.ravel()])

    def vid(i, j):
        return i * (ny + 1) + j

    tris = []
    for i in range(nx):
        for j in range(ny):
            a, b = vid(i, j), vid(i + 1, j)
            c, d = vid(i + 1, j + 1), vid(i, j + 1)
            tris.append((a, b, c))
            tris.append((a, c, d))
    triangles = np.array(tris, dtype=np.int32)
    edges = np.array(sorted(_boundary_edge_set(triangles)), dtype=np.int32)
    kind = np.zeros(len(edges), dtype=np.int8)
    return Mesh2D(vertices, triangles, edges, kind)


def build_macro_mesh(domain, h):
    """Unperforated triangulation of a rectangle, boundary tagged Outer.

    ``domain`` is (x0, x1, y0, y1).
    """
    if h <= 0:
        raise GeometryError(f"target edge length must be positive, got {h}")
    x0, x1, y0, y1 = domain
    if x1 <= x0 or y1 <= y0:
        raise GeometryError(f"empty rectangle {domain}")
    mesh = _structured_rect_mesh(x0, x1, y0, y1, h, h)
    kind = np.full(len(mesh.boundary_edges), OUTER, dtype=np.int8)
    out = Mesh2D(mesh.vertices, mesh.triangles, mesh.boundary_edges, kind,
                 meta={"kind": "macro", "domain": tuple(domain), "h": h})
    return out.validate()


def build_perforated_mesh(domain, epsilon, template):
    """Tile the epsilon-scaled unit cell over a rectangle.

    Shared cell-face vertices are merged exactly through the template's
    periodic vertex pairing, so the result is conforming by construction.
    Inclusion boundaries keep INTERFACE tags with the flat cell index as
    pair id; the rectangle boundary is tagged OUTER.
    """
    x0, x1, y0, y1 = domain
    if epsilon <= 0:
        raise TilingError(f"epsilon must be positive, got {epsilon}")
    nx_f = (x1 - x0) / epsilon
    ny_f = (y1 - y0) / epsilon
    nx, ny = int(round(nx_f)), int(round(ny_f))
    if nx < 1 or ny < 1 or abs(nx_f - nx) > 1e-12 * max(1.0, nx) \
            or abs(ny_f - ny) > 1e-12 * max(1.0, ny):
        raise TilingError(
            f"domain sides {x1 - x0} x {y1 - y0} are not integer multiples "
            f"of epsilon = {epsilon}")

    tv = template.vertices
    tol = 1e-12
    left, right, bottom, top = template.periodic_pairs(tol)
    to_left = {int(r): int(l) for l, r in zip(left, right)}
    to_bottom = {int(t): int(b) for b, t in zip(bottom, top)}
    on_xmin = np.zeros(len(tv), dtype=bool)
    on_xmin[left] = True
    on_ymin = np.zeros(len(tv), dtype=bool)
    on_ymin[bottom] = True
    from_left = {int(l): int(r) for l, r in zip(left, right)}
    from_bottom = {int(b): int(t) for b, t in zip(bottom, top)}

    def canonical(ci, cj, v):
        # a left/bottom face vertex aliases the neighbour cell's right/top one
        if ci > 0 and on_xmin[v]:
            ci, v = ci - 1, from_left[v]
        if cj > 0 and on_ymin[v]:
            cj, v = cj - 1, from_bottom[v]
        return ci, cj, v

    gid = {}
    coords = []
    ntv = len(tv)
    global_of = np.empty((nx, ny, ntv), dtype=np.int64)
    for ci in range(nx):
        for cj in range(ny):
            for v in range(ntv):
                key = canonical(ci, cj, v)
                g = gid.get(key)
                if g is None:
                    g = len(coords)
                    gid[key] = g
                    kci, kcj, kv = key
                    coords.append((x0 + epsilon * (tv[kv, 0] + kci),
                                   y0 + epsilon * (tv[kv, 1] + kcj)))
                global_of[ci, cj, v] = g
    vertices = np.array(coords)

    tt = template.triangles
    triangles = np.empty((nx * ny * len(tt), 3), dtype=np.int32)
    hole_centers = {}
    edges = []
    kinds = []
    pairs = []
    cell_of_triangle = np.empty(nx * ny * len(tt), dtype=np.int32)
    k = 0
    for ci in range(nx):
        for cj in range(ny):
            cell_id = ci * ny + cj
            lut = global_of[ci, cj]
            triangles[k * len(tt):(k + 1) * len(tt)] = lut[tt]
            cell_of_triangle[k * len(tt):(k + 1) * len(tt)] = cell_id
            hole_centers[cell_id] = (x0 + epsilon * (0.5 + ci),
                                     y0 + epsilon * (0.5 + cj))
            for e in range(len(template.boundary_edges)):
                a, b = template.boundary_edges[e]
                ek = template.edge_kind[e]
                if ek == INTERFACE:
                    edges.append((lut[a], lut[b]))
                    kinds.append(INTERFACE)
                    pairs.append(cell_id)
                elif ek == CELL_FACE:
                    side = template.edge_side[e]
                    outerish = ((side == SIDE_XMIN and ci == 0)
                                or (side == SIDE_XMAX and ci == nx - 1)
                                or (side == SIDE_YMIN and cj == 0)
                                or (side == SIDE_YMAX and cj == ny - 1))
                    if outerish:
                        edges.append((lut[a], lut[b]))
                        kinds.append(OUTER)
                        pairs.append(-1)
            k += 1

    mesh = Mesh2D(vertices, triangles, np.array(edges, dtype=np.int32),
                  np.array(kinds, dtype=np.int8), None,
                  np.array(pairs, dtype=np.int32),
                  meta={"kind": "perforated", "epsilon": epsilon,
                        "domain": tuple(domain), "nx": nx, "ny": ny,
                        "n_cells": nx * ny,
                        "radius": template.meta.get("radius", 0.0),
                        "n_gamma": template.meta.get("n_gamma", 0),
                        "template_area": template.total_area,
                        "template_interface_length":
                            template.boundary_length(INTERFACE),
                        "hole_centers": hole_centers})
    mesh.cell_of_triangle = cell_of_triangle
    try:
        mesh.validate()
    except MeshingError as exc:
        raise ConformityError(f"tiling produced a non-conforming mesh: {exc}") \
            from exc
    return mesh
