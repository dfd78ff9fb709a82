"""Cell-centred field snapshots and their file formats.

Snapshots carry density, velocity, pressure, internal energy, the
entropy increment ``ln(p / rho^gamma)`` relative to a case reference
state, the limit factor of every conservative variable, and the
pressure weight when the blended limiter ran.  Writers produce VTK
legacy ASCII unstructured grids (cell data) and CSV keyed by centroid;
both round-trip values at full precision.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError
from .mesh import Mesh
from .state import GasModel, PrimitiveState, cons_to_prim

__all__ = [
    "FieldSnapshot",
    "make_snapshot",
    "entropy_increment",
    "write_snapshot",
    "read_snapshot_csv",
    "extract_centerline",
    "write_centerline_csv",
]

PHI_NAMES = ("phi_rho", "phi_mom_x", "phi_mom_y", "phi_energy")


@dataclass
class FieldSnapshot:
    """Named cell arrays at one instant; all arrays sized to the cell count."""

    time: float
    fields: dict = field(default_factory=dict)

    def names(self):
        return list(self.fields)


def entropy_increment(rho, p, gas: GasModel, reference: PrimitiveState) -> np.ndarray:
    """ln(p / rho^gamma) relative to the reference state; zero in freestream."""
    s_ref = np.log(reference.p / reference.rho**gas.gamma)
    return np.log(p / rho**gas.gamma) - s_ref


def make_snapshot(
    mesh: Mesh,
    states: np.ndarray,
    gas: GasModel,
    time: float,
    reference: PrimitiveState,
    limit=None,
) -> FieldSnapshot:
    """Derive all output fields from conservative states (and limit data)."""
    w = cons_to_prim(states, gas.gamma)
    rho, u, v, p = w[:, 0], w[:, 1], w[:, 2], w[:, 3]
    snap = FieldSnapshot(time)
    snap.fields["rho"] = rho.copy()
    snap.fields["u"] = u.copy()
    snap.fields["v"] = v.copy()
    snap.fields["p"] = p.copy()
    snap.fields["internal_energy"] = p / ((gas.gamma - 1.0) * rho)
    snap.fields["entropy_increment"] = entropy_increment(rho, p, gas, reference)
    if limit is not None:
        for j, name in enumerate(PHI_NAMES):
            snap.fields[name] = limit.phi[:, j].copy()
        if limit.omega_p is not None:
            snap.fields["omega_p"] = limit.omega_p.copy()
    return snap


# ----------------------------------------------------------------------
# writers


def write_snapshot(mesh: Mesh, snap: FieldSnapshot, path, format: str = "vtk"):
    """Write a snapshot as VTK legacy ASCII (``vtk``) or CSV (``csv``)."""
    if format == "vtk":
        _write_vtk(mesh, snap, path)
    elif format == "csv":
        _write_csv(mesh, snap, path)
    else:
        raise ValueError(f"unknown snapshot format '{format}'")


def _write_vtk(mesh: Mesh, snap: FieldSnapshot, path):
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\n")
        fh.write(f"fields at t={snap.time:.17g}\n")
        fh.write("ASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {mesh.num_vertices} double\n")
        for x, y in mesh.vertices:
            fh.write(f"{x:.17g} {y:.17g} 0\n")
        total = mesh.num_cells + mesh.cell_vertices.size
        fh.write(f"CELLS {mesh.num_cells} {total}\n")
        for i in range(mesh.num_cells):
            ring = mesh.cell_ring(i)
            fh.write(f"{ring.size} " + " ".join(str(v) for v in ring) + "\n")
        fh.write(f"CELL_TYPES {mesh.num_cells}\n")
        for i in range(mesh.num_cells):
            # 5 = triangle, 7 = polygon
            fh.write("5\n" if mesh.cell_ring(i).size == 3 else "7\n")
        fh.write(f"CELL_DATA {mesh.num_cells}\n")
        for name, values in snap.fields.items():
            fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
            fh.write("\n".join(f"{v:.17g}" for v in values) + "\n")


def _write_csv(mesh: Mesh, snap: FieldSnapshot, path):
    names = snap.names()
    with open(path, "w") as fh:
        fh.write("x,y," + ",".join(names) + "\n")
        cols = [mesh.centroids[:, 0], mesh.centroids[:, 1]]
        cols += [snap.fields[n] for n in names]
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_snapshot_csv(path) -> dict:
    """Read a snapshot CSV back into a dict of column arrays."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header:
            raise ParseError("empty snapshot CSV", 1, path)
        names = header.split(",")
        data = [[] for _ in names]
        for lineno, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != len(names):
                raise ParseError(
                    f"expected {len(names)} columns, got {len(parts)}", lineno, path
                )
            for col, text in zip(data, parts):
                col.append(float(text))
    return {n: np.asarray(c) for n, c in zip(names, data)}


# ----------------------------------------------------------------------
# centerline extraction


def extract_centerline(mesh: Mesh, y0: float, half_width: float) -> np.ndarray:
    """Cell ids with ``|y_centroid - y0| < half_width``, sorted by x."""
    sel = np.flatnonzero(np.abs(mesh.centroids[:, 1] - y0) < half_width)
    return sel[np.argsort(mesh.centroids[sel, 0], kind="stable")]


def write_centerline_csv(mesh: Mesh, snap: FieldSnapshot, cells: np.ndarray, path):
    names = snap.names()
    with open(path, "w") as fh:
        fh.write("x," + ",".join(names) + "\n")
        for c in cells:
            row = [mesh.centroids[c, 0]] + [snap.fields[n][c] for n in names]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
