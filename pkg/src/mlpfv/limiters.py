"""Slope limiters: Barth-Jespersen, Venkatakrishnan, vertex-neighbourhood
(MLP) limiting, and the pressure-weighted blend of its weak/strict variants.

All limiters share one evaluation pattern: at a set of check points of
each cell (vertices or face centres), compare the unlimited linear
reconstruction increment against an admissible bracket and take the cell
minimum of a limit function of the two.  The families differ only in
which bracket and which check points they use:

==============  ===================================  ==============
limiter         bracket                              check points
==============  ===================================  ==============
bj / venkat     extrema over face neighbours + self  vertices
mlp             extrema over cells sharing a vertex  vertices
weak (pw w=1)   per-face mean of vertex extrema      face centres
strict (pw w=0) extrema of averaged vertex values    face centres
mlp-pw          pressure-weighted blend weak/strict  face centres
==============  ===================================  ==============

The blended bracket is widened to include the cell's own value, so the
limit factor stays in [0, 1] even when a cell average already sits
outside the strict bracket.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gradient import nodal_average
from .mesh import Mesh, Stencils
from .state import cons_to_prim

__all__ = [
    "TIE_REL_TOL",
    "LimiterSpec",
    "CellBounds",
    "LimitField",
    "f_bj",
    "f_v",
    "venkat_eps_sq",
    "gather_bounds",
    "limit_bj",
    "limit_venkat",
    "limit_mlp",
    "limit_mlp_pw",
    "pressure_weight",
    "apply_limiters",
]

LIMITER_KINDS = ("none", "bj", "venkat", "mlp", "mlp-pw")
SMOOTH_FNS = ("f_bj", "f_v")

# |q_t - q_i| at or below this relative threshold takes the phi = 1 branch,
# guarding uniform flow against spurious limiting from roundoff gradients.
TIE_REL_TOL = 1e-14


@dataclass(frozen=True)
class LimiterSpec:
    """Which limiter to run and with what limit function/tuning."""

    kind: str = "mlp-pw"
    smooth_fn: str = "f_v"
    K: float = 1.0
    clip_to_unit: bool | None = None  # None: clip exactly when smooth_fn == f_v

    def __post_init__(self):
        if self.kind not in LIMITER_KINDS:
            raise ValueError(f"unknown limiter kind '{self.kind}'")
        if self.smooth_fn not in SMOOTH_FNS:
            raise ValueError(f"unknown limit function '{self.smooth_fn}'")
        if self.K < 0.0:
            raise ValueError("K must be non-negative")

    @property
    def clip(self) -> bool:
        if self.clip_to_unit is None:
            return self.smooth_fn == "f_v"
        return self.clip_to_unit


@dataclass
class CellBounds:
    """Every bracket family the limiters draw from, for one (batch of) field(s).

    ``vertex_min/max``  extrema over the cells sharing each vertex   (nv, V)
    ``face_min/max``    endpoint means of those extrema, per face    (nf, V)
    ``strict_min/max``  extrema of averaged vertex values, per cell  (nc, V)
    ``nbr_min/max``     extrema over face neighbours and self        (nc, V)
    ``nbhd_min/max``    extrema over the full vertex neighbourhood   (nc, V)
    """

    vertex_min: np.ndarray
    vertex_max: np.ndarray
    face_min: np.ndarray
    face_max: np.ndarray
    strict_min: np.ndarray
    strict_max: np.ndarray
    nbr_min: np.ndarray
    nbr_max: np.ndarray
    nbhd_min: np.ndarray
    nbhd_max: np.ndarray


@dataclass
class LimitField:
    """Limit factors per cell per variable, plus the pressure weight if used."""

    phi: np.ndarray
    omega_p: np.ndarray | None = None


def f_bj(delta_plus, delta_minus):
    """min(1, d+/d-); the caller guarantees delta_minus != 0."""
    return np.minimum(1.0, np.asarray(delta_plus) / np.asarray(delta_minus))


def f_v(delta_plus, delta_minus, eps_sq):
    """Differentiable limit function; equals 3/4 at d+ = d- and -> 1 as d+ -> inf.

    Algebraically identical to
    ``(1/d-) * ((d+^2 + eps^2) d- + 2 d-^2 d+) / (d+^2 + 2 d-^2 + d+ d- + eps^2)``
    with the 1/d- folded in, which keeps the evaluation finite as d- -> 0.
    """
    dp = np.asarray(delta_plus, dtype=float)
    dm = np.asarray(delta_minus, dtype=float)
    num = dp * dp + eps_sq + 2.0 * dm * dp
    den = dp * dp + 2.0 * dm * dm + dp * dm + eps_sq
    return num / den


def venkat_eps_sq(K: float, cell_scale: np.ndarray) -> np.ndarray:
    """Activation threshold (K * cell scale)^3; large K turns the limiter off."""
    return (K * cell_scale) ** 3


def _as2d(field):
    arr = np.asarray(field, dtype=float)
    if arr.ndim == 1:
        return arr[:, None], True
    return arr, False


def gather_bounds(
    mesh: Mesh,
    stencils: Stencils,
    cell_field: np.ndarray,
    vertex_avg_field: np.ndarray,
) -> CellBounds:
    """Collect all bracket families for ``cell_field``.

    ``vertex_avg_field`` is the inverse-distance vertex average of the
    same field (see :func:`mlpfv.gradient.nodal_average`); the strict
    bracket is built from it.  Fields may be 1-D or ``(n, V)`` batches;
    bounds arrays always come back 2-D.
    """
    q, _ = _as2d(cell_field)
    qv, _ = _as2d(vertex_avg_field)

    vc_off = stencils.vertex_cells_offsets
    gathered = q[stencils.vertex_cells]
    vertex_max = np.maximum.reduceat(gathered, vc_off[:-1], axis=0)
    vertex_min = np.minimum.reduceat(gathered, vc_off[:-1], axis=0)

    face_max = 0.5 * (
        vertex_max[mesh.face_vertices[:, 0]] + vertex_max[mesh.face_vertices[:, 1]]
    )
    face_min = 0.5 * (
        vertex_min[mesh.face_vertices[:, 0]] + vertex_min[mesh.face_vertices[:, 1]]
    )

    cv_off = mesh.cell_offsets
    ring_avg = qv[mesh.cell_vertices]
    strict_max = np.maximum.reduceat(ring_avg, cv_off[:-1], axis=0)
    strict_min = np.minimum.reduceat(ring_avg, cv_off[:-1], axis=0)

    nb_off, nb_flat = stencils.closed_neighbor_offsets
    nb_vals = q[nb_flat]
    nbr_max = np.maximum.reduceat(nb_vals, nb_off[:-1], axis=0)
    nbr_min = np.minimum.reduceat(nb_vals, nb_off[:-1], axis=0)

    ring_vmax = vertex_max[mesh.cell_vertices]
    ring_vmin = vertex_min[mesh.cell_vertices]
    nbhd_max = np.maximum.reduceat(ring_vmax, cv_off[:-1], axis=0)
    nbhd_min = np.minimum.reduceat(ring_vmin, cv_off[:-1], axis=0)

    return CellBounds(
        vertex_min, vertex_max,
        face_min, face_max,
        strict_min, strict_max,
        nbr_min, nbr_max,
        nbhd_min, nbhd_max,
    )


def _phi_from_pairs(offsets, owner, dminus, up, lo, q_owner, smooth_fn, eps_pairs, clip):
    """Cell-minimum of the limit function over ragged check-point pairs.

    ``dminus``/``up``/``lo``/``q_owner`` are (P, V) pair arrays; ``up``
    must be >= 0 and ``lo`` <= 0.  Returns (nc, V).
    """
    tie = np.abs(dminus) <= TIE_REL_TOL * np.abs(q_owner)
    dplus = np.where(dminus > 0.0, up, lo)
    safe_dm = np.where(tie, 1.0, dminus)
    if smooth_fn == "f_bj":
        val = f_bj(dplus, safe_dm)
    else:
        val = f_v(dplus, safe_dm, eps_pairs)
    val = np.where(tie, 1.0, val)
    phi = np.minimum.reduceat(val, offsets[:-1], axis=0)
    if clip:
        np.clip(phi, 0.0, 1.0, out=phi)
    return phi


def _vertex_checks(mesh, stencils, field2d, grads):
    """Reconstruction increments at a cell's vertices, (P, V)."""
    counts = np.diff(mesh.cell_offsets)
    owner = np.repeat(np.arange(mesh.num_cells), counts)
    dr = stencils.cell_vertex_dr
    g = grads[owner]
    dminus = g[..., 0] * dr[:, 0:1] + g[..., 1] * dr[:, 1:2]
    return owner, dminus


def _face_checks(mesh, stencils, grads):
    counts = np.diff(stencils.cell_faces_offsets)
    owner = np.repeat(np.arange(mesh.num_cells), counts)
    dr = stencils.cell_face_dr
    g = grads[owner]
    dminus = g[..., 0] * dr[:, 0:1] + g[..., 1] * dr[:, 1:2]
    return owner, dminus


def _norm_grads(grads, squeeze):
    g = np.asarray(grads, dtype=float)
    return g[:, None, :] if squeeze else g


def limit_bj(mesh, stencils, cell_field, bounds: CellBounds, gradients):
    """Barth-Jespersen limiting against face-neighbour extrema at the vertices."""
    q, squeeze = _as2d(cell_field)
    grads = _norm_grads(gradients, squeeze)
    owner, dminus = _vertex_checks(mesh, stencils, q, grads)
    up = bounds.nbr_max[owner] - q[owner]
    lo = bounds.nbr_min[owner] - q[owner]
    phi = _phi_from_pairs(
        mesh.cell_offsets, owner, dminus, up, lo, q[owner], "f_bj", None, False
    )
    return phi[:, 0] if squeeze else phi


def limit_venkat(mesh, stencils, cell_field, bounds: CellBounds, gradients, K):
    """Venkatakrishnan limiting: differentiable limit function, same bracket as BJ."""
    q, squeeze = _as2d(cell_field)
    grads = _norm_grads(gradients, squeeze)
    owner, dminus = _vertex_checks(mesh, stencils, q, grads)
    up = bounds.nbr_max[owner] - q[owner]
    lo = bounds.nbr_min[owner] - q[owner]
    eps = venkat_eps_sq(K, mesh.cell_scale)[owner][:, None]
    phi = _phi_from_pairs(
        mesh.cell_offsets, owner, dminus, up, lo, q[owner], "f_v", eps, True
    )
    return phi[:, 0] if squeeze else phi


def limit_mlp(mesh, stencils, cell_field, bounds: CellBounds, gradients,
              smooth_fn="f_bj", K=1.0, clip=None):
    """Vertex-neighbourhood limiting: each vertex value of the unlimited
    reconstruction must stay inside the extrema of the cells sharing
    that vertex."""
    q, squeeze = _as2d(cell_field)
    grads = _norm_grads(gradients, squeeze)
    owner, dminus = _vertex_checks(mesh, stencils, q, grads)
    up = bounds.vertex_max[mesh.cell_vertices] - q[owner]
    lo = bounds.vertex_min[mesh.cell_vertices] - q[owner]
    eps = None
    if smooth_fn == "f_v":
        eps = venkat_eps_sq(K, mesh.cell_scale)[owner][:, None]
    if clip is None:
        clip = smooth_fn == "f_v"
    phi = _phi_from_pairs(
        mesh.cell_offsets, owner, dminus, up, lo, q[owner], smooth_fn, eps, clip
    )
    return phi[:, 0] if squeeze else phi


def limit_mlp_pw(mesh, stencils, cell_field, bounds: CellBounds, gradients,
                 omega_p, smooth_fn="f_v", K=1.0, clip=None):
    """Pressure-weighted blend of the weak and strict brackets at face centres.

    ``omega_p = 1`` reduces to pure weak limiting (per-face averaged
    bounds), ``omega_p = 0`` to pure strict limiting (averaged-vertex
    bounds).  The blended bracket is widened by the cell's own value so
    the limit factor cannot go negative.
    """
    q, squeeze = _as2d(cell_field)
    grads = _norm_grads(gradients, squeeze)
    owner, dminus = _face_checks(mesh, stencils, grads)
    faces = stencils.cell_faces
    w = np.asarray(omega_p, dtype=float)[owner][:, None]
    blend_max = w * bounds.face_max[faces] + (1.0 - w) * bounds.strict_max[owner]
    blend_min = w * bounds.face_min[faces] + (1.0 - w) * bounds.strict_min[owner]
    up = np.maximum(blend_max - q[owner], 0.0)
    lo = np.minimum(blend_min - q[owner], 0.0)
    eps = None
    if smooth_fn == "f_v":
        eps = venkat_eps_sq(K, mesh.cell_scale)[owner][:, None]
    if clip is None:
        clip = smooth_fn == "f_v"
    phi = _phi_from_pairs(
        stencils.cell_faces_offsets, owner, dminus, up, lo, q[owner],
        smooth_fn, eps, clip,
    )
    return phi[:, 0] if squeeze else phi


def pressure_weight(strict_p_min: np.ndarray, strict_p_max: np.ndarray) -> np.ndarray:
    """Cubed min/max ratio of the averaged vertex pressures of a cell.

    In (0, 1]; equal to 1 exactly when the averaged vertex pressure is
    uniform over the cell, and small across strong pressure jumps.
    """
    return (np.asarray(strict_p_min) / np.asarray(strict_p_max)) ** 3


def apply_limiters(mesh, stencils, states, gradients, vertex_avg, spec: LimiterSpec,
                   gas) -> LimitField:
    """Limit factors for all four conservative variables under ``spec``.

    ``states`` is (nc, 4) conservative, ``gradients`` (nc, 4, 2) and
    ``vertex_avg`` (nv, 4) from the reconstruction pipeline.  For the
    pressure-weighted limiter the weight is computed once per cell from
    the cell pressures and shared by all variables.
    """
    nc = mesh.num_cells
    if spec.kind == "none":
        return LimitField(np.ones((nc, states.shape[1])))

    bounds = gather_bounds(mesh, stencils, states, vertex_avg)
    if spec.kind == "bj":
        phi = limit_bj(mesh, stencils, states, bounds, gradients)
    elif spec.kind == "venkat":
        phi = limit_venkat(mesh, stencils, states, bounds, gradients, spec.K)
    elif spec.kind == "mlp":
        phi = limit_mlp(
            mesh, stencils, states, bounds, gradients,
            spec.smooth_fn, spec.K, spec.clip_to_unit,
        )
    else:  # mlp-pw
        p = cons_to_prim(states, gas.gamma)[:, 3]
        p_vertex = nodal_average(mesh, stencils, p)
        ring_p = p_vertex[mesh.cell_vertices]
        p_strict_max = np.maximum.reduceat(ring_p, mesh.cell_offsets[:-1])
        p_strict_min = np.minimum.reduceat(ring_p, mesh.cell_offsets[:-1])
        omega = pressure_weight(p_strict_min, p_strict_max)
        phi = limit_mlp_pw(
            mesh, stencils, states, bounds, gradients, omega,
            spec.smooth_fn, spec.K, spec.clip_to_unit,
        )
        return LimitField(phi, omega)
    return LimitField(phi)
