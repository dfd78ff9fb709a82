"""Scalar linear-advection mode exercising the max/min principle literally.

A single scalar is advected with the monotone upwind flux and limited
linear reconstruction under one of three conditions: the vertex-
neighbourhood condition checked at vertices (``mlp``), the relaxed
face-averaged condition checked at face centres (``weak``), or the
tightened averaged-vertex condition checked at face centres
(``strict``).  Under the forward-Euler step bound
``dt * L_i / |O_i| * |a| <= 1/3`` the updated cell value must stay
inside the previous extrema over the vertex neighbourhood; the checker
reports any cell that escapes.
"""

from __future__ import annotations

import numpy as np

from .errors import CFLViolation
from .gradient import green_gauss, nodal_average
from .limiters import gather_bounds, limit_mlp, limit_mlp_pw
from .mesh import Mesh, Stencils

__all__ = [
    "SCALAR_CONDITIONS",
    "scalar_max_dt",
    "scalar_step",
    "scalar_limit",
    "check_max_min_principle",
    "run_max_min_trial",
]

SCALAR_CONDITIONS = ("mlp", "weak", "strict")


def scalar_max_dt(mesh: Mesh, a) -> float:
    """Largest forward-Euler step satisfying the 1/3 bound for speed ``a``."""
    speed = float(np.hypot(*np.asarray(a, dtype=float)))
    if speed == 0.0:
        return np.inf
    return float(np.min(mesh.areas / (3.0 * mesh.perimeters * speed)))


def scalar_limit(mesh, stencils, q, a_grads, condition: str):
    """Limit factors for a scalar field under the selected condition (f_bj)."""
    vertex_avg = nodal_average(mesh, stencils, q)
    bounds = gather_bounds(mesh, stencils, q, vertex_avg)
    if condition == "mlp":
        return limit_mlp(mesh, stencils, q, bounds, a_grads, "f_bj")
    if condition == "weak":
        omega = np.ones(mesh.num_cells)
    elif condition == "strict":
        omega = np.zeros(mesh.num_cells)
    else:
        raise ValueError(f"unknown limiting condition '{condition}'")
    return limit_mlp_pw(mesh, stencils, q, bounds, a_grads, omega, "f_bj")


def scalar_step(
    mesh: Mesh,
    stencils: Stencils,
    q: np.ndarray,
    a,
    condition: str,
    dt: float,
    *,
    _enforce_cfl: bool = True,
) -> np.ndarray:
    """One forward-Euler step of linear advection with limited reconstruction.

    Boundary faces use the interior reconstructed value on both sides.
    Raises :class:`CFLViolation` when ``dt`` exceeds the stability bound.
    """
    dt_max = scalar_max_dt(mesh, a)
    if _enforce_cfl and dt > dt_max * (1.0 + 1e-12):
        raise CFLViolation(f"dt {dt} exceeds the stability bound {dt_max}")

    a = np.asarray(a, dtype=float)
    vertex_avg = nodal_average(mesh, stencils, q)
    grads = green_gauss(mesh, stencils, vertex_avg)
    phi = scalar_limit(mesh, stencils, q, grads, condition)

    left = mesh.face_left
    int_idx = mesh.interior_faces
    right = mesh.face_right[int_idx]
    dr_l = mesh.face_midpoints - mesh.centroids[left]
    q_l = q[left] + phi[left] * (
        grads[left, 0] * dr_l[:, 0] + grads[left, 1] * dr_l[:, 1]
    )
    q_r = q_l.copy()  # boundary default: interior value on both sides
    dr_r = mesh.face_midpoints[int_idx] - mesh.centroids[right]
    q_r[int_idx] = q[right] + phi[right] * (
        grads[right, 0] * dr_r[:, 0] + grads[right, 1] * dr_r[:, 1]
    )

    an = a[0] * mesh.face_normals[:, 0] + a[1] * mesh.face_normals[:, 1]
    flux = (np.maximum(an, 0.0) * q_l + np.minimum(an, 0.0) * q_r) * mesh.face_lengths

    nc = mesh.num_cells
    div = np.bincount(left, flux, minlength=nc) - np.bincount(
        right, flux[int_idx], minlength=nc
    )
    return q - dt / mesh.areas * div


def check_max_min_principle(
    before: np.ndarray,
    after: np.ndarray,
    mesh: Mesh,
    stencils: Stencils,
    slack: float = 1e-12,
) -> np.ndarray:
    """Cells whose updated value escapes the previous neighbourhood extrema.

    The admissible bracket per cell is the max/min over all cells
    sharing one of its vertices (the cell itself included), evaluated on
    ``before``.  Returns the violating cell indices (empty when the
    principle holds with ``slack``).
    """
    gathered = before[stencils.vertex_cells]
    vmax = np.maximum.reduceat(gathered, stencils.vertex_cells_offsets[:-1])
    vmin = np.minimum.reduceat(gathered, stencils.vertex_cells_offsets[:-1])
    ring_max = vmax[mesh.cell_vertices]
    ring_min = vmin[mesh.cell_vertices]
    hi = np.maximum.reduceat(ring_max, mesh.cell_offsets[:-1])
    lo = np.minimum.reduceat(ring_min, mesh.cell_offsets[:-1])
    bad = (after > hi + slack) | (after < lo - slack)
    return np.flatnonzero(bad)


def run_max_min_trial(
    mesh: Mesh,
    stencils: Stencils,
    q0: np.ndarray,
    a,
    condition: str,
    steps: int,
    dt: float | None = None,
    enforce_cfl: bool = True,
) -> tuple[np.ndarray, int]:
    """Advance ``steps`` forward-Euler steps, checking the principle each step.

    Returns the final field and the total number of violating
    (cell, step) pairs.  ``enforce_cfl=False`` lets a deliberately
    unstable step size through for the bound-activity experiment.
    """
    if dt is None:
        dt = scalar_max_dt(mesh, a)
    q = np.asarray(q0, dtype=float).copy()
    violations = 0
    for _ in range(steps):
        q_new = scalar_step(
            mesh, stencils, q, a, condition, dt, _enforce_cfl=enforce_cfl
        )
        violations += check_max_min_principle(q, q_new, mesh, stencils).size
        q = q_new
    return q, violations