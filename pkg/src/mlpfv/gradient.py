"""Nodal-averaged Green-Gauss gradient reconstruction.

Vertex values are inverse-distance weighted averages of the surrounding
cell values; cell gradients follow from the Gauss identity with face
values taken as the mean of the two endpoint vertex values (the face
midpoint value of the linear interpolant).

Both operations are written in deviation form (sums of differences from
a local anchor) so a constant field yields exactly constant vertex
values and exactly zero gradients, independent of roundoff in the
geometric coefficients.
"""

from __future__ import annotations

import numpy as np

from .mesh import Mesh, Stencils

__all__ = ["nodal_average", "green_gauss"]


def nodal_average(mesh: Mesh, stencils: Stencils, cell_field: np.ndarray) -> np.ndarray:
    """Inverse-distance weighted vertex average of a cell field.

    ``cell_field`` may be ``(nc,)`` or ``(nc, V)``; the result has the
    same trailing shape over ``nv`` vertices.  Every vertex value lies in
    the hull of its contributing cell values.
    """
    q = np.asarray(cell_field, dtype=float)
    squeeze = q.ndim == 1
    if squeeze:
        q = q[:, None]
    w = stencils.vertex_cell_weights[:, None]
    off = stencils.vertex_cells_offsets
    counts = np.diff(off)
    anchor = q[stencils.vertex_anchor_cells]
    diff = q[stencils.vertex_cells] - np.repeat(anchor, counts, axis=0)
    avg = anchor + np.add.reduceat(w * diff, off[:-1], axis=0)
    return avg[:, 0] if squeeze else avg


def green_gauss(mesh: Mesh, stencils: Stencils, vertex_field: np.ndarray) -> np.ndarray:
    """Cell gradients from vertex values via the Gauss identity.

    ``vertex_field`` may be ``(nv,)`` or ``(nv, V)``; returns ``(nc, 2)``
    or ``(nc, V, 2)``.  Exact for constants (identically zero) and for
    linear fields when the vertex values are sampled exactly.
    """
    qv = np.asarray(vertex_field, dtype=float)
    squeeze = qv.ndim == 1
    if squeeze:
        qv = qv[:, None]

    # face value = mean of the two endpoint vertex values
    qf = 0.5 * (qv[mesh.face_vertices[:, 0]] + qv[mesh.face_vertices[:, 1]])

    off = stencils.cell_faces_offsets
    counts = np.diff(off)
    sn = (
        mesh.face_normals[stencils.cell_faces]
        * mesh.face_lengths[stencils.cell_faces, None]
        * stencils.cell_face_signs[:, None]
    )
    # anchor on the first face of each cell: sum(qf - anchor) * S * n is
    # identical to sum(qf * S * n) because the signed normals close, but
    # vanishes bit-exactly for constant data
    pair_q = qf[stencils.cell_faces]
    anchor = pair_q[off[:-1]]
    diff = pair_q - np.repeat(anchor, counts, axis=0)
    gx = np.add.reduceat(diff * sn[:, 0:1], off[:-1], axis=0)
    gy = np.add.reduceat(diff * sn[:, 1:2], off[:-1], axis=0)
    grad = np.stack((gx, gy), axis=-1) / mesh.areas[:, None, None]
    return grad[:, 0, :] if squeeze else grad
