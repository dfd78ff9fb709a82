"""Numerical interface fluxes and the exact Riemann solver.

The HLLC flux restores the contact wave and resolves stationary contact
discontinuities exactly; Rusanov is the maximally dissipative monotone
fallback.  Both are vectorised over faces: states are ``(n, 4)``
conservative arrays and normals ``(n, 2)`` unit vectors.

The exact solver follows the classic pressure-function iteration and is
the verification oracle for the shock-tube cases; it never touches the
finite-volume code paths.
"""

from __future__ import annotations

import numpy as np

from .errors import NonPhysicalState, VacuumFormation
from .state import GasModel, PrimitiveState, sound_speed

__all__ = ["hllc_flux", "rusanov_flux", "ExactRiemann", "exact_riemann_1d"]


def _face_primitives(q, gamma, side):
    rho = q[..., 0]
    bad = ~((rho > 0.0) & np.isfinite(rho))
    if np.any(bad):
        raise NonPhysicalState(
            f"non-positive density in {side} flux state", face=int(np.argmax(bad))
        )
    u = q[..., 1] / rho
    v = q[..., 2] / rho
    p = (gamma - 1.0) * (q[..., 3] - 0.5 * rho * (u * u + v * v))
    bad = ~((p > 0.0) & np.isfinite(p))
    if np.any(bad):
        raise NonPhysicalState(
            f"non-positive pressure in {side} flux state", face=int(np.argmax(bad))
        )
    return rho, u, v, p


def _normal_flux(q, p, vn, nx, ny):
    """Convective flux from precomputed pressure and normal velocity."""
    f = np.empty_like(q)
    f[..., 0] = q[..., 0] * vn
    f[..., 1] = q[..., 1] * vn + p * nx
    f[..., 2] = q[..., 2] * vn + p * ny
    f[..., 3] = (q[..., 3] + p) * vn
    return f


def hllc_flux(q_left, q_right, n, gas: GasModel):
    """HLLC approximate Riemann flux through unit normal ``n``.

    Wave speeds are Einfeldt-type bounds: Roe-averaged eigenvalues
    floored by the single-state eigenvalues.  Consistent
    (``hllc(q, q, n) == physical_flux(q, n)``), rotationally invariant,
    and exact on stationary contacts.
    """
    gamma = gas.gamma
    qL = np.atleast_2d(np.asarray(q_left, dtype=float))
    qR = np.atleast_2d(np.asarray(q_right, dtype=float))
    nn = np.atleast_2d(np.asarray(n, dtype=float))
    squeeze = np.asarray(q_left).ndim == 1

    rhoL, uL, vL, pL = _face_primitives(qL, gamma, "left")
    rhoR, uR, vR, pR = _face_primitives(qR, gamma, "right")
    nx, ny = nn[..., 0], nn[..., 1]
    vnL = uL * nx + vL * ny
    vnR = uR * nx + vR * ny
    aL = sound_speed(rhoL, pL, gamma)
    aR = sound_speed(rhoR, pR, gamma)

    # Roe averages for the wave-speed estimates
    sL = np.sqrt(rhoL)
    sR = np.sqrt(rhoR)
    inv = 1.0 / (sL + sR)
    u_roe = (sL * uL + sR * uR) * inv
    v_roe = (sL * vL + sR * vR) * inv
    HL = (qL[..., 3] + pL) / rhoL
    HR = (qR[..., 3] + pR) / rhoR
    H_roe = (sL * HL + sR * HR) * inv
    a_roe = np.sqrt(
        np.maximum((gamma - 1.0) * (H_roe - 0.5 * (u_roe**2 + v_roe**2)), 1e-300)
    )
    vn_roe = u_roe * nx + v_roe * ny

    SL = np.minimum(vnL - aL, vn_roe - a_roe)
    SR = np.maximum(vnR + aR, vn_roe + a_roe)
    num = pR - pL + rhoL * vnL * (SL - vnL) - rhoR * vnR * (SR - vnR)
    den = rhoL * (SL - vnL) - rhoR * (SR - vnR)
    SM = num / den

    FL = _normal_flux(qL, pL, vnL, nx, ny)
    FR = _normal_flux(qR, pR, vnR, nx, ny)

    def star_state(q, rho, u, v, p, vn, S):
        coef = rho * (S - vn) / np.where(np.abs(S - SM) < 1e-300, 1e-300, S - SM)
        out = np.empty_like(q)
        out[..., 0] = coef
        out[..., 1] = coef * (u + (SM - vn) * nx)
        out[..., 2] = coef * (v + (SM - vn) * ny)
        out[..., 3] = coef * (
            q[..., 3] / rho + (SM - vn) * (SM + p / (rho * (S - vn)))
        )
        return out

    F_starL = FL + SL[..., None] * (star_state(qL, rhoL, uL, vL, pL, vnL, SL) - qL)
    F_starR = FR + SR[..., None] * (star_state(qR, rhoR, uR, vR, pR, vnR, SR) - qR)

    F = np.where(
        (SL >= 0.0)[..., None],
        FL,
        np.where(
            (SM >= 0.0)[..., None],
            F_starL,
            np.where((SR > 0.0)[..., None], F_starR, FR),
        ),
    )
    return F[0] if squeeze else F


def rusanov_flux(q_left, q_right, n, gas: GasModel):
    """Local Lax-Friedrichs flux; more dissipative than HLLC everywhere."""
    gamma = gas.gamma
    qL = np.atleast_2d(np.asarray(q_left, dtype=float))
    qR = np.atleast_2d(np.asarray(q_right, dtype=float))
    nn = np.atleast_2d(np.asarray(n, dtype=float))
    squeeze = np.asarray(q_left).ndim == 1

    rhoL, uL, vL, pL = _face_primitives(qL, gamma, "left")
    rhoR, uR, vR, pR = _face_primitives(qR, gamma, "right")
    nx, ny = nn[..., 0], nn[..., 1]
    vnL = uL * nx + vL * ny
    vnR = uR * nx + vR * ny
    s = np.maximum(
        np.abs(vnL) + sound_speed(rhoL, pL, gamma),
        np.abs(vnR) + sound_speed(rhoR, pR, gamma),
    )
    F = 0.5 * (
        _normal_flux(qL, pL, vnL, nx, ny) + _normal_flux(qR, pR, vnR, nx, ny)
    ) - 0.5 * s[..., None] * (qR - qL)
    return F[0] if squeeze else F


FLUX_SCHEMES = {"hllc": hllc_flux, "rusanov": rusanov_flux}


# ----------------------------------------------------------------------
# exact Riemann solver (verification oracle)


class ExactRiemann:
    """Exact solution of the 1-D Riemann problem for a perfect gas.

    Solves the pressure function by Newton iteration (relative tolerance
    1e-12) and samples the self-similar solution at ``xi = x/t``.  The
    transverse velocity is transported passively with the contact.
    Raises :class:`VacuumFormation` when the pressure positivity
    condition fails; the exception carries a sampler for the vacuum
    solution.
    """

    def __init__(self, left: PrimitiveState, right: PrimitiveState, gas: GasModel):
        self.left = left
        self.right = right
        self.gamma = g = gas.gamma
        self.aL = float(sound_speed(left.rho, left.p, g))
        self.aR = float(sound_speed(right.rho, right.p, g))

        du_crit = 2.0 * (self.aL + self.aR) / (g - 1.0)
        if du_crit <= right.u - left.u:
            raise VacuumFormation(
                "pressure positivity condition violated: vacuum opens",
                head_left=left.u - self.aL,
                head_right=right.u + self.aR,
                sample=self._vacuum_sampler(),
            )
        self.p_star, self.u_star = self._solve_star()

    # -- pressure function -------------------------------------------------

    def _fK(self, p, side: PrimitiveState, a):
        g = self.gamma
        if p > side.p:  # shock
            A = 2.0 / ((g + 1.0) * side.rho)
            B = (g - 1.0) / (g + 1.0) * side.p
            f = (p - side.p) * np.sqrt(A / (p + B))
            df = np.sqrt(A / (p + B)) * (1.0 - (p - side.p) / (2.0 * (p + B)))
        else:  # rarefaction
            f = 2.0 * a / (g - 1.0) * ((p / side.p) ** ((g - 1.0) / (2.0 * g)) - 1.0)
            df = (p / side.p) ** (-(g + 1.0) / (2.0 * g)) / (side.rho * a)
        return f, df

    def pressure_function(self, p):
        fL, _ = self._fK(p, self.left, self.aL)
        fR, _ = self._fK(p, self.right, self.aR)
        return fL + fR + (self.right.u - self.left.u)

    def _solve_star(self):
        L, R, g = self.left, self.right, self.gamma
        # two-rarefaction estimate is positive whenever no vacuum forms
        z = (g - 1.0) / (2.0 * g)
        p0 = (
            (self.aL + self.aR - 0.5 * (g - 1.0) * (R.u - L.u))
            / (self.aL / L.p**z + self.aR / R.p**z)
        ) ** (1.0 / z)
        p = max(p0, 1e-12)
        for _ in range(100):
            fL, dL = self._fK(p, L, self.aL)
            fR, dR = self._fK(p, R, self.aR)
            dp = (fL + fR + (R.u - L.u)) / (dL + dR)
            p_new = p - dp
            if p_new <= 0.0:
                p_new = 0.5 * p
            if abs(p_new - p) <= 1e-12 * max(p_new, p):
                p = p_new
                break
            p = p_new
        fL, _ = self._fK(p, L, self.aL)
        fR, _ = self._fK(p, R, self.aR)
        u = 0.5 * (L.u + R.u) + 0.5 * (fR - fL)
        return p, u

    # -- sampling ----------------------------------------------------------

    def sample(self, xi: float) -> PrimitiveState:
        """Self-similar state at xi = x/t."""
        g = self.gamma
        L, R = self.left, self.right
        p_star, u_star = self.p_star, self.u_star

        if xi <= u_star:  # left of the contact
            side, a, sgn, vt = L, self.aL, 1.0, L.v
        else:
            side, a, sgn, vt = R, self.aR, -1.0, R.v
        # work in the frame where the wave moves to the left (mirror right side)
        u_side = sgn * side.u
        u_st = sgn * u_star
        xi_s = sgn * xi

        if p_star > side.p:  # shock on this side
            ratio = p_star / side.p
            gm = (g - 1.0) / (g + 1.0)
            S = u_side - a * np.sqrt((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g))
            if xi_s <= S:
                return PrimitiveState(side.rho, sgn * u_side, vt, side.p)
            rho = side.rho * (ratio + gm) / (gm * ratio + 1.0)
            return PrimitiveState(rho, sgn * u_st, vt, p_star)
        # rarefaction on this side
        head = u_side - a
        a_star = a * (p_star / side.p) ** ((g - 1.0) / (2.0 * g))
        tail = u_st - a_star
        if xi_s <= head:
            return PrimitiveState(side.rho, sgn * u_side, vt, side.p)
        if xi_s >= tail:
            rho = side.rho * (p_star / side.p) ** (1.0 / g)
            return PrimitiveState(rho, sgn * u_st, vt, p_star)
        # inside the fan
        u_fan = 2.0 / (g + 1.0) * (a + 0.5 * (g - 1.0) * u_side + xi_s)
        a_fan = a - 0.5 * (g - 1.0) * (u_fan - u_side)
        rho = side.rho * (a_fan / a) ** (2.0 / (g - 1.0))
        p = side.p * (a_fan / a) ** (2.0 * g / (g - 1.0))
        return PrimitiveState(rho, sgn * u_fan, vt, p)

    def sample_array(self, xi: np.ndarray) -> np.ndarray:
        """Vectorised convenience wrapper: (n,) -> (n, 4) primitive array."""
        return np.array([self.sample(float(x)).as_array() for x in np.asarray(xi)])

    def _vacuum_sampler(self):
        g = self.gamma
        L, R = self.left, self.right
        aL, aR = self.aL, self.aR

        def sample(xi: float):
            headL, tailL = L.u - aL, L.u + 2.0 * aL / (g - 1.0)
            headR, tailR = R.u - 2.0 * aR / (g - 1.0), R.u + aR
            if xi <= headL:
                return L.as_array()
            if xi < tailL:
                u = 2.0 / (g + 1.0) * (aL + 0.5 * (g - 1.0) * L.u + xi)
                a = aL - 0.5 * (g - 1.0) * (u - L.u)
                rho = L.rho * (a / aL) ** (2.0 / (g - 1.0))
                return np.array([rho, u, L.v, L.p * (a / aL) ** (2.0 * g / (g - 1.0))])
            if xi <= tailR:
                return np.array([0.0, 0.5 * (tailL + tailR), 0.0, 0.0])
            if xi < headR:
                u = 2.0 / (g + 1.0) * (-aR + 0.5 * (g - 1.0) * R.u + xi)
                a = aR + 0.5 * (g - 1.0) * (u - R.u)
                rho = R.rho * (a / aR) ** (2.0 / (g - 1.0))
                return np.array([rho, u, R.v, R.p * (a / aR) ** (2.0 * g / (g - 1.0))])
            return R.as_array()

        return sample


def exact_riemann_1d(
    left: PrimitiveState, right: PrimitiveState, gas: GasModel, xi: float
) -> PrimitiveState:
    """Exact self-similar Riemann solution sampled at ``xi = x/t``."""
    return ExactRiemann(left, right, gas).sample(xi)
