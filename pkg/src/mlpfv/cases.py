"""Case presets and the run driver behind the CLI.

Four canonical cases are bundled:

``sod``        shock tube, (1,0,0,1) | (0.125,0,0,0.1), t=0.2, CFL 0.2
``expansion``  colliding-free expansion, (1,-2,0,0.4) | (1,2,0,0.4), t=0.15
``wedge``      Mach-2 channel with a 15 deg compression ramp, steady
``step``       Mach-3 wind tunnel with a step, t=4, CFL 1.5

A run writes a self-describing artifact directory: the resolved
configuration, the mesh, snapshots (VTK + CSV), a centerline CSV for
the tube cases, the residual history for steady cases, and rendered
figures unless disabled.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import ResolvedRun
from .errors import ConfigError
from .integrator import (
    RunConfig,
    evaluate_limit,
    run_steady,
    run_unsteady,
)
from .limiters import LimiterSpec
from .mesh import (
    BoundaryPatch,
    build_stencils,
    generate_rect_tri_mesh,
    generate_step_mesh,
    generate_wedge_mesh,
    load_mesh,
    save_mesh,
)
from .snapshot import (
    extract_centerline,
    make_snapshot,
    write_centerline_csv,
    write_snapshot,
)
from .state import GasModel, PrimitiveState, prim_to_cons

__all__ = ["CasePreset", "PRESETS", "resolve_run", "run_case", "CaseResult"]

SOD_LEFT = PrimitiveState(1.0, 0.0, 0.0, 1.0)
SOD_RIGHT = PrimitiveState(0.125, 0.0, 0.0, 0.1)
EXPANSION_LEFT = PrimitiveState(1.0, -2.0, 0.0, 0.4)
EXPANSION_RIGHT = PrimitiveState(1.0, 2.0, 0.0, 0.4)
WEDGE_INFLOW = PrimitiveState(1.0, 2.0, 0.0, 1.0 / 1.4)
STEP_INFLOW = PrimitiveState(1.4, 3.0, 0.0, 1.0)


@dataclass(frozen=True)
class CasePreset:
    """Geometry, initial/boundary data, and defaults of one test case."""

    name: str
    mode: str
    defaults: dict
    reference: PrimitiveState
    centerline: tuple | None = None  # (y0, half_width)

    def build_mesh(self, run: ResolvedRun):
        if run.mesh:
            return load_mesh(run.mesh)
        return self._build_mesh(run)

    def _build_mesh(self, run: ResolvedRun):
        raise NotImplementedError

    def initial_primitive(self, x, y):
        raise NotImplementedError


def _split_state(x, left: PrimitiveState, right: PrimitiveState, x_split=0.5):
    w = np.where(
        (x < x_split)[:, None], left.as_array()[None, :], right.as_array()[None, :]
    )
    return w


@dataclass(frozen=True)
class _TubePreset(CasePreset):
    left: PrimitiveState = SOD_LEFT
    right: PrimitiveState = SOD_RIGHT
    end_patches: str = "slip-wall"  # left/right boundary treatment

    def _build_mesh(self, run: ResolvedRun):
        nx = run.nx or 101
        ny = run.ny or 11
        lr = self.end_patches
        patches = (
            BoundaryPatch("left", lr),
            BoundaryPatch("right", lr),
            BoundaryPatch("bottom", "slip-wall"),
            BoundaryPatch("top", "slip-wall"),
        )
        return generate_rect_tri_mesh(
            nx, ny, (0.0, 0.0, 1.0, 0.1),
            jitter=run.jitter, seed=run.seed, patches=patches,
        )

    def initial_primitive(self, x, y):
        return _split_state(x, self.left, self.right)


@dataclass(frozen=True)
class _WedgePreset(CasePreset):
    def _build_mesh(self, run: ResolvedRun):
        return generate_wedge_mesh(nx=run.nx or 120, ny=run.ny or 60)

    def initial_primitive(self, x, y):
        return np.broadcast_to(WEDGE_INFLOW.as_array(), (x.size, 4)).copy()


@dataclass(frozen=True)
class _StepPreset(CasePreset):
    def _build_mesh(self, run: ResolvedRun):
        return generate_step_mesh(ny=run.ny or 60)

    def initial_primitive(self, x, y):
        return np.broadcast_to(STEP_INFLOW.as_array(), (x.size, 4)).copy()


PRESETS = {
    "sod": _TubePreset(
        name="sod",
        mode="unsteady",
        defaults=dict(limiter="mlp-pw", smooth_fn="f_v", K=1.0, cfl=0.2,
                      flux="hllc", gamma=1.4, t_end=0.2),
        reference=SOD_LEFT,
        centerline=(0.05, 0.01),
        left=SOD_LEFT,
        right=SOD_RIGHT,
        end_patches="slip-wall",
    ),
    "expansion": _TubePreset(
        name="expansion",
        mode="unsteady",
        defaults=dict(limiter="mlp-pw", smooth_fn="f_v", K=1.0, cfl=0.2,
                      flux="hllc", gamma=1.4, t_end=0.15),
        reference=EXPANSION_LEFT,
        centerline=(0.05, 0.01),
        left=EXPANSION_LEFT,
        right=EXPANSION_RIGHT,
        # the initial flow already leaves through both ends supersonically,
        # so the x boundaries must be open
        end_patches="outflow",
    ),
    "wedge": _WedgePreset(
        name="wedge",
        mode="steady",
        defaults=dict(limiter="mlp-pw", smooth_fn="f_v", K=10.0, cfl=0.8,
                      flux="hllc", gamma=1.4, max_iters=4000, residual_drop=1e-3),
        reference=WEDGE_INFLOW,
    ),
    "step": _StepPreset(
        name="step",
        mode="unsteady",
        defaults=dict(limiter="mlp-pw", smooth_fn="f_v", K=10.0, cfl=1.5,
                      flux="hllc", gamma=1.4, t_end=4.0),
        reference=STEP_INFLOW,
    ),
}


def resolve_run(case: str, file_values: dict | None = None,
                cli_values: dict | None = None) -> ResolvedRun:
    """Merge preset defaults, config-file values, and CLI flags."""
    if case not in PRESETS:
        raise ConfigError(f"unknown case '{case}'", key="case")
    preset = PRESETS[case]
    run = ResolvedRun(
        case=case, mode=preset.mode,
        limiter="mlp-pw", smooth_fn="f_v", K=1.0, cfl=0.8, flux="hllc", gamma=1.4,
    ).apply(preset.defaults)
    for values in (file_values, cli_values):
        if values:
            values = dict(values)
            values.pop("case", None)
            run = run.apply(values)
    return run


@dataclass
class CaseResult:
    """Everything a caller might inspect after a run."""

    run: ResolvedRun
    mesh: object
    stencils: object
    config: RunConfig
    states: np.ndarray
    snapshot: object
    history: object = None
    snapshots: list = field(default_factory=list)  # (time, states) at marks
    outdir: Path | None = None


def _limiter_spec(run: ResolvedRun) -> LimiterSpec:
    return LimiterSpec(kind=run.limiter, smooth_fn=run.smooth_fn, K=run.K)


def run_case(run: ResolvedRun, write_outputs: bool = True,
             log_every: int = 0) -> CaseResult:
    """Execute one case run and (optionally) write its artifact directory."""
    preset = PRESETS[run.case]
    mesh = preset.build_mesh(run)
    stencils = build_stencils(mesh)
    gas = GasModel(run.gamma)
    config = RunConfig(
        limiter=_limiter_spec(run), flux=run.flux, cfl=run.cfl, gas=gas
    )
    w0 = preset.initial_primitive(mesh.centroids[:, 0], mesh.centroids[:, 1])
    states = prim_to_cons(w0, gas.gamma)

    history = None
    marks = []
    if run.mode == "steady":
        states, history = run_steady(
            mesh, stencils, states, config,
            max_iters=run.max_iters or 4000,
            residual_drop=run.residual_drop or 1e-3,
            log_every=log_every,
        )
    else:
        states, _ = run_unsteady(
            mesh, stencils, states, config, run.t_end,
            snapshot_times=run.snapshot_times,
            on_snapshot=lambda t, q: marks.append((t, q.copy())),
        )

    limit, _ = evaluate_limit(mesh, stencils, states, config)
    final_time = 0.0 if run.mode == "steady" else run.t_end
    snap = make_snapshot(mesh, states, gas, final_time, preset.reference, limit)

    result = CaseResult(
        run=run, mesh=mesh, stencils=stencils, config=config,
        states=states, snapshot=snap, history=history, snapshots=marks,
    )
    if write_outputs:
        result.outdir = _write_artifacts(result, preset)
    return result


def _write_artifacts(result: CaseResult, preset: CasePreset) -> Path:
    run = result.run
    outdir = Path(run.out)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config_resolved.txt").write_text(run.echo())
    save_mesh(result.mesh, outdir / "mesh.txt")
    write_snapshot(result.mesh, result.snapshot, outdir / "snapshot_final.vtk", "vtk")
    write_snapshot(result.mesh, result.snapshot, outdir / "snapshot_final.csv", "csv")

    gas = result.config.gas
    for t, q in result.snapshots:
        limit, _ = evaluate_limit(result.mesh, result.stencils, q, result.config)
        snap_t = make_snapshot(result.mesh, q, gas, t, preset.reference, limit)
        stem = f"snapshot_t{t:g}"
        write_snapshot(result.mesh, snap_t, outdir / f"{stem}.vtk", "vtk")
        write_snapshot(result.mesh, snap_t, outdir / f"{stem}.csv", "csv")

    cells = None
    if preset.centerline is not None:
        cells = extract_centerline(result.mesh, *preset.centerline)
        write_centerline_csv(
            result.mesh, result.snapshot, cells, outdir / "centerline.csv"
        )
    if result.history is not None:
        result.history.write(outdir / "residual_history.txt")

    if run.plots:
        from . import plots  # deferred: pulls in matplotlib

        plots.render_case_figures(outdir, result, preset, centerline_cells=cells)
    return outdir
