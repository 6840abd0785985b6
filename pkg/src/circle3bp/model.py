"""Mass parameters and derived constants.

Three bodies on the unit circle with total mass 1, the two outer masses
equal: m1 = m2 = n, m3 = m, m + 2n = 1. Every other module reads its
constants from a MassContext built here. The derived quantities are

    A1 = sqrt(2/n), A2 = sqrt((m+1)/(2nm))   polar scale factors,
    theta_star = arctan(sqrt(m))             half-width of the shape sector,
    nu0 = sqrt(2 rU(0, 0))                   speed of the triple-collision
                                             equilibrium on the collision
                                             manifold,
    r_star                                   radius where U = 1 on the
                                             isosceles axis.

r_star comes from the closed form cot(r_star*A1/2) = a with a the positive
root of (4mn + n^2) a^2 - 2a - n^2 = 0, cross-checked against direct root
finding on U(r, 0) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.optimize import brentq


@dataclass(frozen=True)
class MassContext:
    """Masses and cached derived constants. Immutable; share freely."""

    m: float            # mass of body 3
    n: float            # common mass of bodies 1 and 2
    alpha1: float       # Jacobi weight m1/(m1+m2) = 1/2
    alpha2: float       # Jacobi weight m2/(m1+m2) = 1/2
    mu1: float          # reduced mass n/2
    mu2: float          # reduced mass 2nm
    A1: float
    A2: float
    theta_star: float
    nu0: float
    r_star: float


class InvalidMass(ValueError):
    pass


def _rU_axis(r: float, ctx_or_mn: tuple[float, float]) -> float:
    """r*U on the axis theta = 0: n^2 r cot(r A1) + 2mn r cot(r A1 / 2)."""
    m, n = ctx_or_mn
    A1 = math.sqrt(2.0 / n)
    return (n * n * r / math.tan(r * A1)
            + 2.0 * m * n * r / math.tan(r * A1 / 2.0))


def build_context(m: float) -> MassContext:
    """Build the full constant set for outer-mass parameter m in (0, 1).

    nu0 is computed from the r -> 0 limit of rU at theta = 0,
        nu0^2 = 2 (n^2/A1 + 2mn/(A2 sin theta_star)),
    and r_star from the quadratic for a = cot(r_star A1 / 2). Both routes
    for r_star (quadratic and root finding on U(r,0) = 1) must agree to
    1e-12 relative.
    """
    if not (0.0 < m < 1.0):
        raise InvalidMass(f"m must lie in (0, 1), got {m}")
    n = (1.0 - m) / 2.0
    mu1 = n / 2.0
    mu2 = 2.0 * n * m
    A1 = math.sqrt(2.0 / n)
    A2 = math.sqrt((m + 1.0) / (2.0 * n * m))
    theta_star = math.atan(math.sqrt(m))

    nu0 = math.sqrt(2.0 * (n * n / A1 + 2.0 * m * n / (A2 * math.sin(theta_star))))

    # positive root of (4mn + n^2) a^2 - 2a - n^2 = 0
    qa = 4.0 * m * n + n * n
    a = (1.0 + math.sqrt(1.0 + qa * n * n)) / qa
    r_star = (2.0 / A1) * math.atan(1.0 / a)

    # cross-check against direct root finding on U(r, 0) = 1
    g = lambda r: _rU_axis(r, (m, n)) / r - 1.0
    r_check = brentq(g, 1e-9, math.pi / A1 * 0.999, xtol=1e-15, rtol=8.9e-16)
    if abs(r_check - r_star) > 1e-12 * r_star:
        raise ArithmeticError(
            f"r_star routes disagree: quadratic {r_star!r} vs root {r_check!r}")

    return MassContext(m=m, n=n, alpha1=0.5, alpha2=0.5, mu1=mu1, mu2=mu2,
                       A1=A1, A2=A2, theta_star=theta_star, nu0=nu0,
                       r_star=r_star)


def axis_crossing(ctx: MassContext, h: float) -> float:
    """Radius where U(r, u=0) = -h on the isosceles axis (requires h < 0).

    Equals r_star at h = -1. This is the Hill-region bound on the axis and
    the r-cap of the Wazewski set at energy h.
    """
    if h >= 0.0:
        raise ValueError("axis crossing only exists for h < 0")
    g = lambda r: _rU_axis(r, (ctx.m, ctx.n)) / r + h
    return brentq(g, 1e-9, math.pi / ctx.A1 * 0.999, xtol=1e-15, rtol=8.9e-16)


def verify_estimates(ctx: MassContext) -> dict[str, bool]:
    """Truth values of the four closed-form estimates tied to r_star.

    g(m) = -7m^4 + 20m^3 - 18m^2 + 4m + 17 >= 16 holds with equality only
    in the limits m -> 0, 1.
    """
    m = ctx.m
    half = ctx.r_star * ctx.A1 / 2.0
    gm = -7.0 * m**4 + 20.0 * m**3 - 18.0 * m**2 + 4.0 * m + 17.0
    return {
        "cot_half_ge_7_2": 1.0 / math.tan(half) >= 3.5,
        "half_le_pi_10": half <= math.pi / 10.0,
        "span_lt_pi_5": ctx.r_star * ctx.A2 * math.sin(2.0 * ctx.theta_star) < math.pi / 5.0,
        "g_ge_16": gm >= 16.0,
    }


@dataclass(frozen=True)
class EnergyLevel:
    """Total energy. Shooting requires h <= -1; plotting accepts any h."""

    h: float

    def require_shootable(self) -> None:
        if self.h > -1.0:
            raise ValueError(f"shooting requires h <= -1, got {self.h}")
