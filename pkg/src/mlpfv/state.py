"""Conservative/primitive gas states, the perfect-gas EOS, and the analytic flux.

Single states are small frozen dataclasses; the solver kernels work on
``(..., 4)`` float arrays where the last axis holds
``(rho, rho*u, rho*v, rho*E)`` for conservative data and
``(rho, u, v, p)`` for primitive data.  All quantities are dimensionless.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonPhysicalState

__all__ = [
    "GasModel",
    "PrimitiveState",
    "ConservativeState",
    "to_conservative",
    "to_primitive",
    "prim_to_cons",
    "cons_to_prim",
    "physical_flux",
    "sound_speed",
]


@dataclass(frozen=True)
class GasModel:
    """Calorically perfect gas; gamma = 1.4 is air at moderate conditions."""

    gamma: float = 1.4

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    u: float
    v: float
    p: float

    def __post_init__(self):
        if not (self.rho > 0.0 and self.p > 0.0):
            raise NonPhysicalState(
                f"primitive state needs rho > 0 and p > 0, got rho={self.rho}, p={self.p}"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.u, self.v, self.p], dtype=float)


@dataclass(frozen=True)
class ConservativeState:
    rho: float
    mom_x: float
    mom_y: float
    energy: float

    def as_array(self) -> np.ndarray:
        return np.array([self.rho, self.mom_x, self.mom_y, self.energy], dtype=float)


def prim_to_cons(w: np.ndarray, gamma: float) -> np.ndarray:
    """Convert primitive ``(rho, u, v, p)`` arrays to conservative variables.

    Total energy per unit volume is ``p/(gamma-1) + rho*(u^2+v^2)/2``.
    """
    w = np.asarray(w, dtype=float)
    rho, u, v, p = w[..., 0], w[..., 1], w[..., 2], w[..., 3]
    q = np.empty_like(w)
    q[..., 0] = rho
    q[..., 1] = rho * u
    q[..., 2] = rho * v
    q[..., 3] = p / (gamma - 1.0) + 0.5 * rho * (u * u + v * v)
    return q


def _bad_index(values) -> int | None:
    """Flat index of the first non-positive or non-finite entry, else None."""
    ok = (values > 0.0) & np.isfinite(values)
    if bool(np.all(ok)):
        return None
    return int(np.argmin(np.ravel(ok)))


def cons_to_prim(q: np.ndarray, gamma: float, *, where: str = "cell") -> np.ndarray:
    """Convert conservative arrays to primitive variables.

    Raises :class:`NonPhysicalState` when any density or derived pressure
    is non-positive; ``where`` names the index axis in the message
    (``"cell"`` or ``"face"``).
    """
    q = np.asarray(q, dtype=float)
    rho = q[..., 0]
    bad = _bad_index(rho)
    if bad is not None:
        raise NonPhysicalState(
            f"non-positive density {np.ravel(rho)[bad]}", **{where: bad}
        )
    u = q[..., 1] / rho
    v = q[..., 2] / rho
    p = (gamma - 1.0) * (q[..., 3] - 0.5 * rho * (u * u + v * v))
    bad = _bad_index(p)
    if bad is not None:
        raise NonPhysicalState(
            f"non-positive pressure {np.ravel(p)[bad]}", **{where: bad}
        )
    w = np.empty_like(q)
    w[..., 0] = rho
    w[..., 1] = u
    w[..., 2] = v
    w[..., 3] = p
    return w


def to_conservative(w: PrimitiveState, gas: GasModel) -> ConservativeState:
    q = prim_to_cons(w.as_array(), gas.gamma)
    return ConservativeState(*q)


def to_primitive(q: ConservativeState, gas: GasModel) -> PrimitiveState:
    w = cons_to_prim(q.as_array(), gas.gamma)
    return PrimitiveState(*w)


def sound_speed(rho: np.ndarray, p: np.ndarray, gamma: float) -> np.ndarray:
    return np.sqrt(gamma * p / rho)


def physical_flux(q: np.ndarray, n: np.ndarray, gamma: float) -> np.ndarray:
    """Analytic convective flux through a unit normal ``n``.

    Returns ``(rho*Vn, rho*u*Vn + p*nx, rho*v*Vn + p*ny, rho*H*Vn)`` with
    ``Vn = u*nx + v*ny`` and ``H = E + p/rho``.
    """
    q = np.asarray(q, dtype=float)
    n = np.asarray(n, dtype=float)
    w = cons_to_prim(q, gamma)
    rho, u, v, p = w[..., 0], w[..., 1], w[..., 2], w[..., 3]
    vn = u * n[..., 0] + v * n[..., 1]
    f = np.empty_like(q)
    f[..., 0] = rho * vn
    f[..., 1] = q[..., 1] * vn + p * n[..., 0]
    f[..., 2] = q[..., 2] * vn + p * n[..., 1]
    f[..., 3] = (q[..., 3] + p) * vn
    return f
