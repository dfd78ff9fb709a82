"""Unstructured 2-D mesh storage, geometry, stencils, generators, and text I/O.

Cells are stored as CCW vertex rings in CSR form (triangles from the
generators, general convex polygons accepted).  Faces are stored once
with a left/right orientation: the unit normal points out of the left
cell, and boundary faces carry a patch index instead of a right cell.

Mesh text format (whitespace separated, ``#`` starts a comment)::

    cells <N> vertices <M> faces <K>
    vertex <x> <y>                      # M lines, ids follow file order
    cell <v0> <v1> ... <vk>             # N lines, CCW ring of vertex ids
    patch <name> <kind> [<rho> <u> <v> <p>]   # kind: inflow|outflow|slip-wall
    bface <va> <vb> <patch-name>        # one line per boundary face
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateGeometry, MalformedMesh, ParseError
from .state import PrimitiveState

__all__ = [
    "BoundaryPatch",
    "Mesh",
    "Stencils",
    "build_stencils",
    "generate_rect_tri_mesh",
    "generate_step_mesh",
    "generate_wedge_mesh",
    "save_mesh",
    "load_mesh",
]

PATCH_KINDS = ("inflow", "outflow", "slip-wall")


@dataclass(frozen=True)
class BoundaryPatch:
    """Named boundary condition; inflow patches prescribe a freestream state."""

    name: str
    kind: str
    state: PrimitiveState | None = None

    def __post_init__(self):
        if self.kind not in PATCH_KINDS:
            raise MalformedMesh(f"unknown patch kind '{self.kind}'")
        if self.kind == "inflow" and self.state is None:
            raise MalformedMesh(f"inflow patch '{self.name}' needs a prescribed state")


class Mesh:
    """Immutable unstructured mesh with per-cell and per-face geometry.

    Parameters
    ----------
    vertices : (nv, 2) array of coordinates.
    cells : sequence of vertex-index rings (each length >= 3).
    patches : iterable of :class:`BoundaryPatch` definitions.
    face_patch_names : mapping ``frozenset({va, vb}) -> patch name`` or a
        callable ``(x_mid, y_mid) -> patch name`` classifying boundary
        faces.  May be None; solvers that need boundary conditions check
        for unassigned faces themselves.
    """

    def __init__(self, vertices, cells, patches=(), face_patch_names=None):
        self.vertices = np.ascontiguousarray(vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 2:
            raise MalformedMesh("vertices must be an (nv, 2) array")

        offsets = [0]
        flat = []
        for ring in cells:
            ring = list(ring)
            if len(ring) < 3:
                raise MalformedMesh(f"cell with {len(ring)} vertices")
            if len(set(ring)) != len(ring):
                raise MalformedMesh(f"cell ring repeats a vertex: {ring}")
            flat.extend(ring)
            offsets.append(len(flat))
        self.cell_offsets = np.asarray(offsets, dtype=np.int64)
        self.cell_vertices = np.asarray(flat, dtype=np.int64)
        if self.num_cells == 0:
            raise MalformedMesh("mesh has no cells")
        if self.cell_vertices.min() < 0 or self.cell_vertices.max() >= self.num_vertices:
            raise MalformedMesh("cell ring references a vertex that does not exist")

        self._orient_ccw()
        self._compute_cell_geometry()
        self._build_faces()
        self._check_dangling()

        self.patches = tuple(patches)
        self._patch_index = {p.name: i for i, p in enumerate(self.patches)}
        if len(self._patch_index) != len(self.patches):
            raise MalformedMesh("duplicate patch names")
        self.face_patch = np.full(self.num_faces, -1, dtype=np.int64)
        self._assign_patches(face_patch_names)

    # ------------------------------------------------------------------
    # sizes

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_cells(self) -> int:
        return self.cell_offsets.shape[0] - 1

    @property
    def num_faces(self) -> int:
        return self.face_vertices.shape[0]

    def cell_ring(self, i: int) -> np.ndarray:
        return self.cell_vertices[self.cell_offsets[i] : self.cell_offsets[i + 1]]

    # ------------------------------------------------------------------
    # construction helpers

    def _orient_ccw(self):
        x = self.vertices[:, 0]
        y = self.vertices[:, 1]
        for i in range(self.num_cells):
            lo, hi = self.cell_offsets[i], self.cell_offsets[i + 1]
            ring = self.cell_vertices[lo:hi]
            nxt = np.roll(ring, -1)
            signed = 0.5 * np.sum(x[ring] * y[nxt] - x[nxt] * y[ring])
            if signed == 0.0:
                raise MalformedMesh(f"cell {i} has zero area")
            if signed < 0.0:
                self.cell_vertices[lo:hi] = ring[::-1].copy()

    def _compute_cell_geometry(self):
        nc = self.num_cells
        self.areas = np.empty(nc)
        self.centroids = np.empty((nc, 2))
        self.perimeters = np.empty(nc)
        x = self.vertices[:, 0]
        y = self.vertices[:, 1]
        for i in range(nc):
            ring = self.cell_ring(i)
            nxt = np.roll(ring, -1)
            cross = x[ring] * y[nxt] - x[nxt] * y[ring]
            area = 0.5 * np.sum(cross)
            if not area > 0.0:
                raise MalformedMesh(f"cell {i} has non-positive area {area}")
            self.areas[i] = area
            self.centroids[i, 0] = np.sum((x[ring] + x[nxt]) * cross) / (6.0 * area)
            self.centroids[i, 1] = np.sum((y[ring] + y[nxt]) * cross) / (6.0 * area)
            self.perimeters[i] = np.sum(
                np.hypot(x[nxt] - x[ring], y[nxt] - y[ring])
            )

    def _build_faces(self):
        """Enumerate faces once, in first-encounter order over the cell rings."""
        edge_to_face: dict[tuple[int, int], int] = {}
        fverts: list[tuple[int, int]] = []
        fleft: list[int] = []
        fright: list[int] = []
        for i in range(self.num_cells):
            ring = self.cell_ring(i)
            for a, b in zip(ring, np.roll(ring, -1)):
                key = (int(a), int(b)) if a < b else (int(b), int(a))
                k = edge_to_face.get(key)
                if k is None:
                    edge_to_face[key] = len(fverts)
                    fverts.append((int(a), int(b)))
                    fleft.append(i)
                    fright.append(-1)
                else:
                    if fright[k] != -1:
                        raise MalformedMesh(
                            f"face {key} shared by more than two cells"
                        )
                    if fleft[k] == i:
                        raise MalformedMesh(f"cell {i} traverses face {key} twice")
                    # a CCW partner traverses the edge in the opposite sense
                    if (int(a), int(b)) == fverts[k]:
                        raise MalformedMesh(
                            f"inconsistent orientation across face {key}"
                        )
                    fright[k] = i

        self.face_vertices = np.asarray(fverts, dtype=np.int64)
        self.face_left = np.asarray(fleft, dtype=np.int64)
        self.face_right = np.asarray(fright, dtype=np.int64)

        ra = self.vertices[self.face_vertices[:, 0]]
        rb = self.vertices[self.face_vertices[:, 1]]
        d = rb - ra
        self.face_lengths = np.hypot(d[:, 0], d[:, 1])
        if np.any(self.face_lengths <= 0.0):
            raise MalformedMesh("zero-length face")
        self.face_midpoints = 0.5 * (ra + rb)
        # outward from the left cell: rotate the CCW edge direction by -90 deg
        self.face_normals = np.column_stack(
            (d[:, 1] / self.face_lengths, -d[:, 0] / self.face_lengths)
        )

        self.interior_faces = np.flatnonzero(self.face_right >= 0)
        self.boundary_faces = np.flatnonzero(self.face_right < 0)

    def _check_dangling(self):
        used = np.zeros(self.num_vertices, dtype=bool)
        used[self.cell_vertices] = True
        if not used.all():
            raise MalformedMesh(
                f"dangling vertices: {np.flatnonzero(~used)[:10].tolist()} ..."
            )

    def _assign_patches(self, face_patch_names):
        if face_patch_names is None:
            return
        if callable(face_patch_names):
            for k in self.boundary_faces:
                name = face_patch_names(*self.face_midpoints[k])
                self.face_patch[k] = self._patch_index[name]
        else:
            for k in self.boundary_faces:
                key = frozenset(map(int, self.face_vertices[k]))
                name = face_patch_names.get(key)
                if name is None:
                    continue
                self.face_patch[k] = self._patch_index[name]

    # ------------------------------------------------------------------
    # queries

    def patch_faces(self, name: str) -> np.ndarray:
        """Boundary face ids assigned to the named patch, in face order."""
        return np.flatnonzero(self.face_patch == self._patch_index[name])

    def unassigned_boundary_faces(self) -> np.ndarray:
        return self.boundary_faces[self.face_patch[self.boundary_faces] < 0]

    def check_geometry(self, tol: float = 1e-12):
        """Verify the discrete Gauss identity and normal normalisation.

        Each cell's signed face normals must sum to zero (closed polygon)
        and every normal must have unit length; these are the geometric
        preconditions for freestream preservation.
        """
        norm = np.hypot(self.face_normals[:, 0], self.face_normals[:, 1])
        if np.max(np.abs(norm - 1.0)) > tol:
            raise MalformedMesh("face normals are not unit length")
        sn = self.face_normals * self.face_lengths[:, None]
        acc = np.zeros((self.num_cells, 2))
        np.add.at(acc, self.face_left, sn)
        np.subtract.at(acc, self.face_right[self.interior_faces], sn[self.interior_faces])
        closure = np.hypot(acc[:, 0], acc[:, 1]) / self.perimeters
        if np.max(closure) > tol:
            raise MalformedMesh(
                f"cell face normals do not close (max {np.max(closure):.3e})"
            )

    @cached_property
    def cell_scale(self) -> np.ndarray:
        """Per-cell length scale used by the differentiable limit function."""
        return np.sqrt(self.areas)


# ----------------------------------------------------------------------
# stencils


def _invert_csr(targets: np.ndarray, sources: np.ndarray, n_target: int):
    """CSR of ``sources`` grouped by ``targets`` (stable, so source order kept)."""
    order = np.argsort(targets, kind="stable")
    counts = np.bincount(targets, minlength=n_target)
    offsets = np.concatenate(([0], np.cumsum(counts)))
    return offsets.astype(np.int64), sources[order].astype(np.int64)


class Stencils:
    """Every neighbourhood map the limiters need, in CSR form.

    ``face_neighbors``  cells sharing a face with cell i            (V(i))
    ``cell_vertices``   vertex ring of cell i                        (v(i))
    ``vertex_cells``    cells touching vertex l                      (V(l))
    ``vertex_neighbors`` union of V(l) over the ring, minus i
    ``face_vertices``   the two endpoints of face k                  (v(k))

    Neighbour lists are sorted ascending for reproducibility.
    """

    def __init__(self, mesh: Mesh):
        self.mesh = mesh
        nc, nv = mesh.num_cells, mesh.num_vertices

        # V(l): invert the cell->vertex map; flat data is cell-major so the
        # stable sort leaves each vertex's cell list ascending.
        counts = np.diff(mesh.cell_offsets)
        owner = np.repeat(np.arange(nc, dtype=np.int64), counts)
        self.vertex_cells_offsets, self.vertex_cells = _invert_csr(
            mesh.cell_vertices, owner, nv
        )
        if np.any(np.diff(self.vertex_cells_offsets) == 0):
            raise MalformedMesh("vertex with no incident cell")

        # V(i): both orientations of every interior face, sorted by cell.
        fi = mesh.interior_faces
        left, right = mesh.face_left[fi], mesh.face_right[fi]
        pair_cell = np.concatenate((left, right))
        pair_nbr = np.concatenate((right, left))
        order = np.lexsort((pair_nbr, pair_cell))
        self.face_neighbors_offsets = np.concatenate(
            ([0], np.cumsum(np.bincount(pair_cell, minlength=nc)))
        ).astype(np.int64)
        self.face_neighbors = pair_nbr[order]

        # faces of each cell, ascending face id, with outward-normal sign
        all_cells = np.concatenate((mesh.face_left, mesh.face_right[fi]))
        all_faces = np.concatenate(
            (np.arange(mesh.num_faces, dtype=np.int64), fi)
        )
        all_signs = np.concatenate(
            (np.ones(mesh.num_faces), -np.ones(fi.size))
        )
        order = np.lexsort((all_faces, all_cells))
        self.cell_faces_offsets = np.concatenate(
            ([0], np.cumsum(np.bincount(all_cells, minlength=nc)))
        ).astype(np.int64)
        self.cell_faces = all_faces[order]
        self.cell_face_signs = all_signs[order]

        # vertex neighbourhood: union over the ring of V(l), self removed
        ring_rep = np.repeat(np.arange(nc, dtype=np.int64), counts)
        vstart = self.vertex_cells_offsets[mesh.cell_vertices]
        vcount = self.vertex_cells_offsets[mesh.cell_vertices + 1] - vstart
        big_cell = np.repeat(ring_rep, vcount)
        take = _ragged_take(self.vertex_cells, vstart, vcount)
        keep = big_cell != take
        pairs = np.unique(big_cell[keep] * nc + take[keep])
        self.vertex_neighbors_offsets, self.vertex_neighbors = _invert_csr(
            (pairs // nc).astype(np.int64), (pairs % nc).astype(np.int64), nc
        )

    # convenience aliases onto the mesh
    @property
    def cell_vertices_offsets(self):
        return self.mesh.cell_offsets

    @property
    def cell_vertices(self):
        return self.mesh.cell_vertices

    @property
    def face_vertices(self):
        return self.mesh.face_vertices

    def face_neighbors_of(self, i: int) -> np.ndarray:
        return self.face_neighbors[
            self.face_neighbors_offsets[i] : self.face_neighbors_offsets[i + 1]
        ]

    def vertex_cells_of(self, l: int) -> np.ndarray:
        return self.vertex_cells[
            self.vertex_cells_offsets[l] : self.vertex_cells_offsets[l + 1]
        ]

    def vertex_neighbors_of(self, i: int) -> np.ndarray:
        return self.vertex_neighbors[
            self.vertex_neighbors_offsets[i] : self.vertex_neighbors_offsets[i + 1]
        ]

    # ------------------------------------------------------------------
    # cached geometric pair data for the averaging/limiting kernels

    @cached_property
    def vertex_cell_weights(self) -> np.ndarray:
        """Inverse-distance weights for V(l), normalised to sum to 1 per vertex."""
        mesh = self.mesh
        vrep = np.repeat(
            np.arange(mesh.num_vertices), np.diff(self.vertex_cells_offsets)
        )
        d = mesh.vertices[vrep] - mesh.centroids[self.vertex_cells]
        dist = np.hypot(d[:, 0], d[:, 1])
        if np.any(dist < 1e-14):
            raise DegenerateGeometry(
                "a vertex coincides with a cell centroid; inverse-distance "
                "averaging is undefined"
            )
        w = 1.0 / dist
        denom = np.add.reduceat(w, self.vertex_cells_offsets[:-1])
        return w / np.repeat(denom, np.diff(self.vertex_cells_offsets))

    @cached_property
    def vertex_anchor_cells(self) -> np.ndarray:
        """First incident cell per vertex; anchor of the deviation-form average."""
        return self.vertex_cells[self.vertex_cells_offsets[:-1]]

    @cached_property
    def cell_vertex_dr(self) -> np.ndarray:
        """Centroid-to-vertex offsets for every (cell, ring-vertex) pair."""
        mesh = self.mesh
        counts = np.diff(mesh.cell_offsets)
        owner = np.repeat(np.arange(mesh.num_cells), counts)
        return mesh.vertices[mesh.cell_vertices] - mesh.centroids[owner]

    @cached_property
    def cell_face_dr(self) -> np.ndarray:
        """Centroid-to-face-midpoint offsets for every (cell, face) pair."""
        mesh = self.mesh
        counts = np.diff(self.cell_faces_offsets)
        owner = np.repeat(np.arange(mesh.num_cells), counts)
        return mesh.face_midpoints[self.cell_faces] - mesh.centroids[owner]

    @cached_property
    def closed_neighbor_offsets(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR over cells of {i} followed by V(i); never empty."""
        nc = self.mesh.num_cells
        counts = np.diff(self.face_neighbors_offsets) + 1
        offsets = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
        flat = np.empty(offsets[-1], dtype=np.int64)
        flat[offsets[:-1]] = np.arange(nc)
        mask = np.ones(offsets[-1], dtype=bool)
        mask[offsets[:-1]] = False
        flat[mask] = self.face_neighbors
        return offsets, flat


def _ragged_take(flat: np.ndarray, starts: np.ndarray, counts: np.ndarray):
    """Concatenate flat[s:s+c] for each (s, c); vectorised."""
    total = int(counts.sum())
    seg_pos = np.arange(total) - np.repeat(
        np.concatenate(([0], np.cumsum(counts)[:-1])), counts
    )
    return flat[np.repeat(starts, counts) + seg_pos]


def build_stencils(mesh: Mesh) -> Stencils:
    """Build all neighbourhood stencils; deterministic ascending ordering."""
    return Stencils(mesh)


# ----------------------------------------------------------------------
# generators


def _grid_patch_classifier(x0, y0, x1, y1):
    def classify(xm, ym):
        if np.isclose(xm, x0):
            return "left"
        if np.isclose(xm, x1):
            return "right"
        if np.isclose(ym, y0):
            return "bottom"
        if np.isclose(ym, y1):
            return "top"
        raise MalformedMesh(f"boundary face midpoint ({xm}, {ym}) not on the hull")

    return classify


def _default_wall_patches(names):
    return tuple(BoundaryPatch(n, "slip-wall") for n in names)


def generate_rect_tri_mesh(
    nx: int,
    ny: int,
    bounds=(0.0, 0.0, 1.0, 1.0),
    diagonal_pattern: str = "alternating",
    jitter: float = 0.0,
    seed: int = 0,
    patches=None,
) -> Mesh:
    """Deterministic triangulation of a rectangle: (nx-1)(ny-1)*2 triangles.

    ``nx``/``ny`` count grid points per direction.  ``alternating`` flips
    the quad diagonal in a checkerboard; ``uniform`` keeps one direction.
    ``jitter`` displaces interior vertices by up to ``jitter * h`` using a
    seeded RNG (still deterministic), leaving the boundary intact.
    Patches default to slip walls named left/right/bottom/top.
    """
    if nx < 2 or ny < 2:
        raise ValueError("need nx >= 2 and ny >= 2")
    if diagonal_pattern not in ("alternating", "uniform"):
        raise ValueError(f"unknown diagonal pattern '{diagonal_pattern}'")
    x0, y0, x1, y1 = bounds
    xs = np.linspace(x0, x1, nx)
    ys = np.linspace(y0, y1, ny)
    xg, yg = np.meshgrid(xs, ys, indexing="ij")
    verts = np.column_stack((xg.ravel(), yg.ravel()))

    if jitter > 0.0:
        rng = np.random.default_rng(seed)
        hx = (x1 - x0) / (nx - 1)
        hy = (y1 - y0) / (ny - 1)
        disp = rng.uniform(-jitter, jitter, size=(nx, ny, 2))
        disp[0, :, :] = disp[-1, :, :] = 0.0
        disp[:, 0, :] = disp[:, -1, :] = 0.0
        verts = verts + (disp * np.array([hx, hy])).reshape(-1, 2)

    def vid(ix, iy):
        return ix * ny + iy

    cells = []
    for ix in range(nx - 1):
        for iy in range(ny - 1):
            a = vid(ix, iy)
            b = vid(ix + 1, iy)
            c = vid(ix + 1, iy + 1)
            d = vid(ix, iy + 1)
            flip = diagonal_pattern == "alternating" and (ix + iy) % 2 == 1
            if flip:
                cells.append((a, b, d))
                cells.append((b, c, d))
            else:
                cells.append((a, b, c))
                cells.append((a, c, d))

    if patches is None:
        patches = _default_wall_patches(("left", "right", "bottom", "top"))
    return Mesh(verts, cells, patches, _grid_patch_classifier(x0, y0, x1, y1))


def generate_step_mesh(ny: int = 60, patches=None) -> Mesh:
    """Wind-tunnel-with-step domain [0,3]x[0,1] minus [0.6,3]x[0,0.2].

    ``ny`` is the number of cells across the tunnel height and must be a
    multiple of 5 so the step corner lands on grid lines.  Produces
    ``2 * (3*ny*ny - 2.4*ny * 0.2*ny)`` triangles (18144 at ny=60).
    Patch names: inflow (x=0), outflow (x=3), wall (everything else).
    """
    if ny % 5 != 0 or ny < 5:
        raise ValueError("ny must be a positive multiple of 5")
    h = 1.0 / ny
    nx = 3 * ny
    ix_step = (6 * ny) // 10
    iy_step = ny // 5

    idx = -np.ones((nx + 1, ny + 1), dtype=np.int64)
    verts = []
    for ix in range(nx + 1):
        for iy in range(ny + 1):
            if ix > ix_step and iy < iy_step:
                continue  # inside the step
            idx[ix, iy] = len(verts)
            verts.append((ix * h, iy * h))

    cells = []
    for ix in range(nx):
        for iy in range(ny):
            if ix >= ix_step and iy < iy_step:
                continue
            a, b = idx[ix, iy], idx[ix + 1, iy]
            c, d = idx[ix + 1, iy + 1], idx[ix, iy + 1]
            if (ix + iy) % 2 == 1:
                cells.append((a, b, d))
                cells.append((b, c, d))
            else:
                cells.append((a, b, c))
                cells.append((a, c, d))

    if patches is None:
        patches = (
            BoundaryPatch("inflow", "inflow", PrimitiveState(1.4, 3.0, 0.0, 1.0)),
            BoundaryPatch("outflow", "outflow"),
            BoundaryPatch("wall", "slip-wall"),
        )

    def classify(xm, ym):
        if np.isclose(xm, 0.0):
            return "inflow"
        if np.isclose(xm, 3.0):
            return "outflow"
        return "wall"

    return Mesh(np.asarray(verts), cells, patches, classify)


def generate_wedge_mesh(
    nx: int = 120,
    ny: int = 60,
    ramp_start: float = 0.5,
    ramp_angle_deg: float = 15.0,
    ramp_height: float = 0.3,
    length: float = 3.0,
    height: float = 1.0,
    patches=None,
) -> Mesh:
    """Channel with a ramp rising from the floor to a flat shelf.

    The floor follows y=0 until ``ramp_start``, climbs at
    ``ramp_angle_deg`` to ``ramp_height`` and stays flat to the exit;
    grid columns are sheared vertically (2*nx*ny triangles).  Patch
    names: inflow (x=0), outflow (x=length), wall (top and floor).
    """
    tan_a = np.tan(np.radians(ramp_angle_deg))
    ramp_end = ramp_start + ramp_height / tan_a
    if ramp_end >= length:
        raise ValueError("ramp does not fit in the domain")

    def floor_y(x):
        return np.clip((x - ramp_start) * tan_a, 0.0, ramp_height)

    xs = np.linspace(0.0, length, nx + 1)
    verts = np.empty(((nx + 1) * (ny + 1), 2))
    for ix, x in enumerate(xs):
        yb = floor_y(x)
        verts[ix * (ny + 1) : (ix + 1) * (ny + 1), 0] = x
        verts[ix * (ny + 1) : (ix + 1) * (ny + 1), 1] = np.linspace(yb, height, ny + 1)

    def vid(ix, iy):
        return ix * (ny + 1) + iy

    cells = []
    for ix in range(nx):
        for iy in range(ny):
            a, b = vid(ix, iy), vid(ix + 1, iy)
            c, d = vid(ix + 1, iy + 1), vid(ix, iy + 1)
            if (ix + iy) % 2 == 1:
                cells.append((a, b, d))
                cells.append((b, c, d))
            else:
                cells.append((a, b, c))
                cells.append((a, c, d))

    if patches is None:
        patches = (
            BoundaryPatch(
                "inflow", "inflow", PrimitiveState(1.0, 2.0, 0.0, 1.0 / 1.4)
            ),
            BoundaryPatch("outflow", "outflow"),
            BoundaryPatch("wall", "slip-wall"),
        )

    def classify(xm, ym):
        if np.isclose(xm, 0.0):
            return "inflow"
        if np.isclose(xm, length):
            return "outflow"
        return "wall"

    return Mesh(verts, cells, patches, classify)


# ----------------------------------------------------------------------
# text I/O


def save_mesh(mesh: Mesh, path):
    """Write the mesh text format; coordinates round-trip bit-exactly."""
    lines = [f"cells {mesh.num_cells} vertices {mesh.num_vertices} faces {mesh.num_faces}"]
    for x, y in mesh.vertices:
        lines.append(f"vertex {x:.17g} {y:.17g}")
    for i in range(mesh.num_cells):
        ring = " ".join(str(v) for v in mesh.cell_ring(i))
        lines.append(f"cell {ring}")
    for p in mesh.patches:
        if p.state is None:
            lines.append(f"patch {p.name} {p.kind}")
        else:
            s = p.state
            lines.append(
                f"patch {p.name} {p.kind} {s.rho:.17g} {s.u:.17g} {s.v:.17g} {s.p:.17g}"
            )
    for k in mesh.boundary_faces:
        pi = mesh.face_patch[k]
        if pi >= 0:
            a, b = mesh.face_vertices[k]
            lines.append(f"bface {a} {b} {mesh.patches[pi].name}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_mesh(path) -> Mesh:
    """Parse the mesh text format; raises :class:`ParseError` with a line number."""
    verts = []
    cells = []
    patches = []
    bfaces = {}
    header = None
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            tok = text.split()
            try:
                if tok[0] == "cells":
                    header = (int(tok[1]), int(tok[3]), int(tok[5]))
                    if tok[2] != "vertices" or tok[4] != "faces":
                        raise ParseError("bad header", lineno, path)
                elif tok[0] == "vertex":
                    verts.append((float(tok[1]), float(tok[2])))
                elif tok[0] == "cell":
                    cells.append([int(t) for t in tok[1:]])
                elif tok[0] == "patch":
                    state = None
                    if len(tok) > 3:
                        state = PrimitiveState(*(float(t) for t in tok[3:7]))
                    patches.append(BoundaryPatch(tok[1], tok[2], state))
                elif tok[0] == "bface":
                    bfaces[frozenset((int(tok[1]), int(tok[2])))] = tok[3]
                else:
                    raise ParseError(f"unknown keyword '{tok[0]}'", lineno, path)
            except ParseError:
                raise
            except (ValueError, IndexError) as exc:
                raise ParseError(f"cannot parse '{text}': {exc}", lineno, path) from exc
    if header is None:
        raise ParseError("missing header line", 1, path)
    n_cells, n_verts, n_faces = header
    if len(verts) != n_verts:
        raise ParseError(f"expected {n_verts} vertices, found {len(verts)}", None, path)
    if len(cells) != n_cells:
        raise ParseError(f"expected {n_cells} cells, found {len(cells)}", None, path)
    try:
        mesh = Mesh(np.asarray(verts), cells, tuple(patches), bfaces)
    except MalformedMesh:
        raise
    if mesh.num_faces != n_faces:
        raise ParseError(
            f"expected {n_faces} faces, derived {mesh.num_faces}", None, path
        )
    return mesh
