"""Explicit multi-stage time stepping and residual assembly.

The spatial residual of cell i is ``R_i = -sum_k F_k S_k`` over its
faces with outward normals, built from limited piecewise-linear
reconstruction on both sides of every face.  Fluxes are evaluated once
per face and scattered with opposite signs, so conservation telescopes
exactly up to the boundary fluxes.

Unsteady runs advance all cells with the global minimum time step and
land on the end time exactly; steady runs march each cell at its own
CFL-limited step and watch the density-residual norm.  Every array
operation is deterministic (fixed face ordering), so reruns are
bit-identical.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .boundary import ghost_state
from .errors import MalformedMesh, NonPhysicalState
from .flux import FLUX_SCHEMES
from .gradient import green_gauss, nodal_average
from .limiters import LimiterSpec, LimitField, apply_limiters
from .mesh import Mesh, Stencils
from .state import GasModel, cons_to_prim, sound_speed

__all__ = [
    "RunConfig",
    "ResidualHistory",
    "evaluate_limit",
    "assemble_residual",
    "compute_dt",
    "rk_step",
    "run_unsteady",
    "run_steady",
    "density_residual_norm",
]


@dataclass(frozen=True)
class RunConfig:
    """Spatial and temporal scheme selection for one run."""

    limiter: LimiterSpec = LimiterSpec()
    flux: str = "hllc"
    cfl: float = 0.8
    gas: GasModel = field(default_factory=GasModel)
    stage_coefficients: tuple = (0.25, 1.0 / 3.0, 0.5, 1.0)

    def __post_init__(self):
        if self.flux not in FLUX_SCHEMES:
            raise ValueError(f"unknown flux scheme '{self.flux}'")
        if not self.cfl > 0.0:
            raise ValueError("cfl must be positive")
        coeffs = tuple(self.stage_coefficients)
        if not coeffs or any(
            not (0.0 < a <= 1.0) for a in coeffs
        ) or any(b <= a for a, b in zip(coeffs, coeffs[1:])):
            raise ValueError(
                "stage coefficients must be strictly increasing within (0, 1]"
            )


@dataclass
class ResidualHistory:
    """Normalised density-residual L2 norm per iteration, plus wall time."""

    residuals: list = field(default_factory=list)
    wall_times: list = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    def write(self, path):
        with open(path, "w") as fh:
            fh.write("# iteration  normalized_density_residual\n")
            for i, r in enumerate(self.residuals, start=1):
                fh.write(f"{i} {r:.17g}\n")


class _SpatialCache:
    """Static per-face gather data shared by every residual evaluation."""

    def __init__(self, mesh: Mesh):
        unassigned = mesh.unassigned_boundary_faces()
        if unassigned.size:
            raise MalformedMesh(
                f"{unassigned.size} boundary faces have no patch assigned"
            )
        self.left = mesh.face_left
        self.int_idx = mesh.interior_faces
        self.right_int = mesh.face_right[self.int_idx]
        self.normals = mesh.face_normals
        self.lengths = mesh.face_lengths
        self.dr_left = mesh.face_midpoints - mesh.centroids[self.left]
        self.dr_right = (
            mesh.face_midpoints[self.int_idx] - mesh.centroids[self.right_int]
        )
        self.patch_faces = [
            (patch, mesh.patch_faces(patch.name)) for patch in mesh.patches
        ]


def _spatial_cache(mesh: Mesh) -> _SpatialCache:
    cache = getattr(mesh, "_spatial_cache", None)
    if cache is None:
        cache = _SpatialCache(mesh)
        mesh._spatial_cache = cache
    return cache


def _reconstruct_faces(mesh, stencils, states, config, grads, phi, cache):
    """Limited face values on both sides of every face, ghosts included."""
    inc_l = (
        grads[cache.left, :, 0] * cache.dr_left[:, 0:1]
        + grads[cache.left, :, 1] * cache.dr_left[:, 1:2]
    )
    q_l = states[cache.left] + phi[cache.left] * inc_l
    q_r = np.empty_like(q_l)
    inc_r = (
        grads[cache.right_int, :, 0] * cache.dr_right[:, 0:1]
        + grads[cache.right_int, :, 1] * cache.dr_right[:, 1:2]
    )
    q_r[cache.int_idx] = states[cache.right_int] + phi[cache.right_int] * inc_r
    for patch, idx in cache.patch_faces:
        if idx.size:
            q_r[idx] = ghost_state(q_l[idx], patch, cache.normals[idx], config.gas)
    return q_l, q_r


def evaluate_limit(mesh, stencils, states, config):
    """Run the reconstruction pipeline only: ``(limit field, gradients)``."""
    vertex_avg = nodal_average(mesh, stencils, states)
    grads = green_gauss(mesh, stencils, vertex_avg)
    limit = apply_limiters(
        mesh, stencils, states, grads, vertex_avg, config.limiter, config.gas
    )
    return limit, grads


def assemble_residual(
    mesh: Mesh,
    stencils: Stencils,
    states: np.ndarray,
    config: RunConfig,
    *,
    first_order: bool = False,
    return_detail: bool = False,
):
    """Per-cell residual ``R_i = -sum_k F_k S_k`` (nc, 4).

    ``first_order`` drops the reconstruction entirely (zero gradients),
    which is the piecewise-constant scheme used by the assembly oracle
    tests.  ``return_detail`` also returns the limit field and gradients
    for snapshot output.
    """
    cache = _spatial_cache(mesh)
    nc = mesh.num_cells

    cons_to_prim(states, config.gas.gamma)  # positivity gate on the cell states

    if first_order:
        grads = np.zeros((nc, states.shape[1], 2))
        limit = LimitField(np.zeros((nc, states.shape[1])))
    else:
        limit, grads = evaluate_limit(mesh, stencils, states, config)

    q_l, q_r = _reconstruct_faces(mesh, stencils, states, config, grads, limit.phi, cache)
    flux = FLUX_SCHEMES[config.flux](q_l, q_r, cache.normals, config.gas)
    fs = flux * cache.lengths[:, None]

    residual = np.empty((nc, states.shape[1]))
    for comp in range(states.shape[1]):
        residual[:, comp] = np.bincount(
            cache.right_int, fs[cache.int_idx, comp], minlength=nc
        ) - np.bincount(cache.left, fs[:, comp], minlength=nc)
    if return_detail:
        return residual, limit, grads
    return residual


def compute_dt(
    mesh: Mesh,
    stencils: Stencils,
    states: np.ndarray,
    gas: GasModel,
    cfl: float,
    *,
    local: bool = False,
):
    """CFL-limited step ``dt_i = cfl |O_i| / sum_k (|V_n| + c)_k S_k``.

    Returns the per-cell array when ``local`` (steady marching), else the
    global minimum (time-accurate).
    """
    w = cons_to_prim(states, gas.gamma)
    c = sound_speed(w[:, 0], w[:, 3], gas.gamma)
    counts = np.diff(stencils.cell_faces_offsets)
    owner = np.repeat(np.arange(mesh.num_cells), counts)
    faces = stencils.cell_faces
    vn = np.abs(
        w[owner, 1] * mesh.face_normals[faces, 0]
        + w[owner, 2] * mesh.face_normals[faces, 1]
    )
    speed = (vn + c[owner]) * mesh.face_lengths[faces]
    denom = np.add.reduceat(speed, stencils.cell_faces_offsets[:-1])
    dt = cfl * mesh.areas / denom
    return dt if local else float(dt.min())


def rk_step(
    mesh: Mesh,
    stencils: Stencils,
    states: np.ndarray,
    dt,
    config: RunConfig,
    *,
    step: int | None = None,
):
    """One multi-stage step ``q^(m) = q^n + a_m (dt/|O|) R(q^(m-1))``.

    ``dt`` may be a scalar or a per-cell array (local time stepping).
    Gradients and limiters are recomputed at every stage.  Returns the
    new states and the first-stage residual (for convergence norms).
    """
    dt_over_area = (np.asarray(dt) / mesh.areas)[:, None]
    current = states
    first_residual = None
    for stage, alpha in enumerate(config.stage_coefficients):
        try:
            residual = assemble_residual(mesh, stencils, current, config)
        except NonPhysicalState as exc:
            raise NonPhysicalState(
                f"solver blow-up: {exc}", cell=exc.cell, face=exc.face,
                step=step, stage=stage,
            ) from exc
        if first_residual is None:
            first_residual = residual
        current = states + alpha * dt_over_area * residual
    return current, first_residual


def density_residual_norm(residual: np.ndarray, mesh: Mesh) -> float:
    """L2 norm of the density residual expressed as a rate of change."""
    rate = residual[:, 0] / mesh.areas
    return float(np.sqrt(np.mean(rate * rate)))


def run_unsteady(
    mesh: Mesh,
    stencils: Stencils,
    states: np.ndarray,
    config: RunConfig,
    t_end: float,
    *,
    snapshot_times=(),
    on_snapshot=None,
    max_steps: int = 10**7,
):
    """March to ``t_end`` exactly, clipping the final step.

    ``snapshot_times`` are landed on exactly as well; ``on_snapshot(t,
    states)`` is invoked at each.  Returns ``(states, steps_taken)``.
    """
    marks = sorted(float(s) for s in snapshot_times if 0.0 < s <= t_end)
    t = 0.0
    steps = 0
    eps = 1e-12 * max(t_end, 1.0)
    while t < t_end - eps and steps < max_steps:
        dt = compute_dt(mesh, stencils, states, config.gas, config.cfl)
        limit = marks[0] if marks else t_end
        dt = min(dt, limit - t, t_end - t)
        states, _ = rk_step(mesh, stencils, states, dt, config, step=steps)
        t += dt
        steps += 1
        if marks and t >= marks[0] - eps:
            marks.pop(0)
            if on_snapshot is not None:
                on_snapshot(t, states)
    return states, steps


def run_steady(
    mesh: Mesh,
    stencils: Stencils,
    states: np.ndarray,
    config: RunConfig,
    *,
    max_iters: int = 4000,
    residual_drop: float = 1e-3,
    steady_atol: float = 1e-12,
    log_every: int = 0,
):
    """Local-time-stepping march until the density residual drops.

    Stops when the L2 density residual falls below ``residual_drop``
    times its first-iteration value, or at ``max_iters``.  A first
    residual at roundoff level (``steady_atol``) counts as converged
    immediately.  Returns ``(states, ResidualHistory)`` with normalised
    residuals.
    """
    history = ResidualHistory()
    start = time.perf_counter()
    first = None
    for it in range(1, max_iters + 1):
        dt = compute_dt(mesh, stencils, states, config.gas, config.cfl, local=True)
        states, residual = rk_step(mesh, stencils, states, dt, config, step=it)
        norm = density_residual_norm(residual, mesh)
        if first is None:
            first = norm
            if first <= steady_atol:  # already steady
                history.residuals.append(0.0)
                history.wall_times.append(time.perf_counter() - start)
                return states, history
        history.residuals.append(norm / first)
        history.wall_times.append(time.perf_counter() - start)
        if log_every and it % log_every == 0:
            print(f"  iter {it:6d}  residual {norm / first:.3e}", flush=True)
        if norm / first <= residual_drop:
            break
    return states, history
