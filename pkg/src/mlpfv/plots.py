"""Figure rendering for run artifacts.

Every case run drops PNG figures next to its delimited output: field
maps of density and the density limit factor, centerline profiles with
the exact Riemann solution overlaid for the tube cases, and the
convergence history for steady cases.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .flux import ExactRiemann  # noqa: E402
from .state import GasModel  # noqa: E402

__all__ = ["render_case_figures", "triangulation_of"]


def triangulation_of(mesh):
    """Matplotlib triangulation of an all-triangle mesh, else None."""
    counts = np.diff(mesh.cell_offsets)
    if not np.all(counts == 3):
        return None
    import matplotlib.tri as mtri

    tris = mesh.cell_vertices.reshape(-1, 3)
    return mtri.Triangulation(mesh.vertices[:, 0], mesh.vertices[:, 1], tris)


def _save(fig, path):
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)


def _field_map(mesh, values, title, path, cmap="viridis"):
    tri = triangulation_of(mesh)
    fig, ax = plt.subplots(figsize=(7.0, 3.2))
    if tri is not None:
        im = ax.tripcolor(tri, values, cmap=cmap, shading="flat")
    else:
        im = ax.scatter(
            mesh.centroids[:, 0], mesh.centroids[:, 1], c=values, s=4, cmap=cmap
        )
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    _save(fig, path)


def _centerline_profiles(outdir, result, preset, cells):
    mesh = result.mesh
    snap = result.snapshot
    x = mesh.centroids[cells, 0]
    exact = None
    if hasattr(preset, "left") and result.run.t_end:
        solver = ExactRiemann(preset.left, preset.right, GasModel(result.run.gamma))
        xi = (x - 0.5) / result.run.t_end
        exact = solver.sample_array(xi)

    panels = (("rho", "density"), ("internal_energy", "internal energy"))
    for name, label in panels:
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        ax.plot(x, snap.fields[name][cells], ".", ms=3, label=result.run.limiter)
        if exact is not None:
            if name == "rho":
                ref = exact[:, 0]
            else:
                g = result.run.gamma
                ref = exact[:, 3] / ((g - 1.0) * exact[:, 0])
            ax.plot(x, ref, "-", lw=1, color="k", label="exact")
        ax.set_xlabel("x")
        ax.set_ylabel(label)
        ax.legend(loc="best", fontsize=8)
        ax.set_title(f"{preset.name} centerline at t={snap.time:g}")
        _save(fig, outdir / f"centerline_{name}.png")


def render_case_figures(outdir, result, preset, centerline_cells=None):
    """Write all figures for one case run into its artifact directory."""
    snap = result.snapshot
    _field_map(result.mesh, snap.fields["rho"], "density", outdir / "field_density.png")
    if "phi_rho" in snap.fields:
        _field_map(
            result.mesh,
            snap.fields["phi_rho"],
            "density limit factor",
            outdir / "field_limiter.png",
            cmap="coolwarm_r",
        )
    if centerline_cells is not None and centerline_cells.size:
        _centerline_profiles(outdir, result, preset, centerline_cells)
    if result.history is not None and result.history.iterations:
        fig, ax = plt.subplots(figsize=(5.2, 3.6))
        ax.semilogy(
            np.arange(1, result.history.iterations + 1),
            np.maximum(result.history.residuals, 1e-300),
        )
        ax.set_xlabel("iteration")
        ax.set_ylabel("normalized density residual")
        ax.set_title(f"{preset.name} convergence ({result.run.limiter})")
        _save(fig, outdir / "residuals.png")
