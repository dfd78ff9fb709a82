"""Unstructured 2-D finite-volume Euler solver with MLP-family slope limiters."""

from .errors import (
    CFLViolation,
    ConfigError,
    DegenerateGeometry,
    MalformedMesh,
    NonPhysicalState,
    ParseError,
    SolverError,
    VacuumFormation,
)
from .flux import ExactRiemann, exact_riemann_1d, hllc_flux, rusanov_flux
from .gradient import green_gauss, nodal_average
from .integrator import (
    ResidualHistory,
    RunConfig,
    assemble_residual,
    compute_dt,
    rk_step,
    run_steady,
    run_unsteady,
)
from .limiters import (
    CellBounds,
    LimiterSpec,
    LimitField,
    apply_limiters,
    f_bj,
    f_v,
    gather_bounds,
    limit_bj,
    limit_mlp,
    limit_mlp_pw,
    limit_venkat,
    pressure_weight,
)
from .mesh import (
    BoundaryPatch,
    Mesh,
    Stencils,
    build_stencils,
    generate_rect_tri_mesh,
    generate_step_mesh,
    generate_wedge_mesh,
    load_mesh,
    save_mesh,
)
from .state import (
    ConservativeState,
    GasModel,
    PrimitiveState,
    cons_to_prim,
    physical_flux,
    prim_to_cons,
    to_conservative,
    to_primitive,
)

__version__ = "0.1.0"
