"""Ghost-state construction for inflow, outflow, and slip-wall patches.

Ghost states are built from the reconstructed interior face value, so a
slip wall sees a mirror-symmetric Riemann problem (zero mass flux) and
supersonic outflow simply copies the interior.  Inflow prescribes the
patch freestream regardless of the interior state; all boundaries in
the supported cases are supersonic, so no characteristic blending is
needed.
"""

from __future__ import annotations

import numpy as np

from .mesh import BoundaryPatch
from .state import GasModel, prim_to_cons

__all__ = ["ghost_state"]


def ghost_state(interior, patch: BoundaryPatch, n, gas: GasModel):
    """Exterior conservative state(s) for boundary faces of one patch.

    ``interior`` is ``(m, 4)`` (or ``(4,)``) conservative data at the
    face, ``n`` the matching outward unit normal(s).
    """
    q = np.atleast_2d(np.asarray(interior, dtype=float))
    nn = np.atleast_2d(np.asarray(n, dtype=float))
    squeeze = np.asarray(interior).ndim == 1

    if patch.kind == "inflow":
        free = prim_to_cons(patch.state.as_array(), gas.gamma)
        ghost = np.broadcast_to(free, q.shape).copy()
    elif patch.kind == "outflow":
        ghost = q.copy()
    else:  # slip wall: mirror the normal momentum, keep density and energy
        mn = q[..., 1] * nn[..., 0] + q[..., 2] * nn[..., 1]
        ghost = q.copy()
        ghost[..., 1] -= 2.0 * mn * nn[..., 0]
        ghost[..., 2] -= 2.0 * mn * nn[..., 1]
    return ghost[0] if squeeze else ghost
