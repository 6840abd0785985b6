"""Coordinate systems and the maps between them.

Chain of charts, innermost first:

    angles (phi1, phi2, phi3) on the circle, Sum m_i phi_i = 0 (mod 2pi)
      -> Jacobi (x1, x2) = (phi2 - phi1, phi3 - (phi1 + phi2)/2)
      -> polar (r, theta): x1 = r cos(theta)/sqrt(mu1),
                           x2 = r sin(theta)/sqrt(mu2)
      -> regularized (r, nu, u, gamma): theta = theta_star sin u,
                                        gamma = tau cos^2 u,
         with nu = r'/r and tau = theta' in the r^{3/2}-rescaled time.

The rotational first integral is removed by the normalization
Sum m_i phi_i = 0; the additive constants it would otherwise carry have no
runtime representation. u lives on all of R: the inverse map polar ->
regularized takes an explicit branch index k, u = k pi + (-1)^k arcsin(theta/theta_star),
so trajectories keep u continuous across double collisions.

Region classification follows the triangular decomposition of the
configuration space: the big triangle 0 <= x1 <= 2pi, |x2| <= x1/2 is cut
by the three antipodal mid-segments x1 = pi, x1/2 + x2 = pi, x1/2 - x2 = pi
into sub-triangles I (around the origin), II (central), III (top corner),
IV (bottom corner).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import MassContext

TWO_PI = 2.0 * math.pi


class OrderingError(ValueError):
    """Bodies are not in the anticlockwise order (m1, m3, m2)."""


class OutOfDomain(ValueError):
    pass


@dataclass(frozen=True)
class AngularConfig:
    phi1: float
    phi2: float
    phi3: float
    v1: float = 0.0
    v2: float = 0.0
    v3: float = 0.0

    def angular_momentum(self, ctx: MassContext) -> float:
        return ctx.n * (self.v1 + self.v2) + ctx.m * self.v3


@dataclass(frozen=True)
class JacobiState:
    x1: float
    x2: float
    u1: float = 0.0
    u2: float = 0.0


@dataclass(frozen=True)
class PolarState:
    r: float
    theta: float
    nu: float = 0.0
    tau: float = 0.0


@dataclass(frozen=True)
class RegularizedState:
    r: float
    nu: float
    u: float
    gamma: float


@dataclass(frozen=True)
class RegionLabel:
    region: str           # "I", "II", "III", "IV", or "Boundary"
    boundary_kind: str | None = None   # set only for region == "Boundary"

    def __str__(self) -> str:
        if self.region == "Boundary":
            return f"Boundary({self.boundary_kind})"
        return self.region


def _wrap(phi: float) -> float:
    """Wrap an angle into [-pi, pi)."""
    w = math.fmod(phi + math.pi, TWO_PI)
    if w < 0.0:
        w += TWO_PI
    return w - math.pi


def angles_to_jacobi(cfg: AngularConfig, ctx: MassContext) -> JacobiState:
    """Jacobi variables of a configuration in anticlockwise order m1, m3, m2.

    Representatives are lifted so phi1 <= phi3 <= phi2 within one turn of
    phi1 (the ordering convention); configurations whose cyclic order is
    (m1, m2, m3) instead cannot be normalized and are rejected.
    """
    p1 = _wrap(cfg.phi1)
    p3 = p1 + math.fmod(cfg.phi3 - cfg.phi1, TWO_PI)
    if p3 < p1:
        p3 += TWO_PI
    p2 = p1 + math.fmod(cfg.phi2 - cfg.phi1, TWO_PI)
    if p2 < p1:
        p2 += TWO_PI
    if p2 < p3:
        raise OrderingError(
            f"cyclic order is (m1, m2, m3); cannot lift to phi1 <= phi3 <= phi2 "
            f"(got {p1}, {p3}, {p2})")
    x1 = p2 - p1
    x2 = p3 - ctx.alpha1 * p1 - ctx.alpha2 * p2
    u1 = cfg.v2 - cfg.v1
    u2 = cfg.v3 - ctx.alpha1 * cfg.v1 - ctx.alpha2 * cfg.v2
    return JacobiState(x1=x1, x2=x2, u1=u1, u2=u2)


def jacobi_to_angles(js: JacobiState, ctx: MassContext) -> AngularConfig:
    """Inverse map; the result satisfies Sum m_i phi_i = 0 exactly."""
    m = ctx.m
    phi1 = -ctx.alpha2 * js.x1 - m * js.x2
    phi2 = ctx.alpha1 * js.x1 - m * js.x2
    phi3 = (2.0 * ctx.n) * js.x2
    v1 = -ctx.alpha2 * js.u1 - m * js.u2
    v2 = ctx.alpha1 * js.u1 - m * js.u2
    v3 = (2.0 * ctx.n) * js.u2
    return AngularConfig(phi1, phi2, phi3, v1, v2, v3)


def distances(js: JacobiState) -> tuple[float, float, float]:
    """Arc distances (d12, d13, d23), each in [0, pi]."""
    e1 = js.x1
    e2 = 0.5 * js.x1 + js.x2
    e3 = 0.5 * js.x1 - js.x2
    return (min(e1, TWO_PI - e1), min(e2, TWO_PI - e2), min(e3, TWO_PI - e3))


_BTOL = 1e-12


def classify_region(js: JacobiState) -> RegionLabel:
    """Label a configuration point by sub-triangle or boundary kind.

    Rejects points outside the closed big triangle. Boundary kinds:
    total-collision vertex, collision-antipodal point, double-collision
    side, antipodal mid-segment. Detection tolerance 1e-12.
    """
    x1 = js.x1
    e2 = 0.5 * x1 + js.x2
    e3 = 0.5 * x1 - js.x2
    if x1 < -_BTOL or x1 > TWO_PI + _BTOL or e2 < -_BTOL or e3 < -_BTOL:
        raise OutOfDomain(f"({js.x1}, {js.x2}) outside the configuration triangle")

    near = lambda v, t: abs(v - t) <= _BTOL
    # vertices first: all three distances vanish there
    if near(x1, 0.0) and near(e2, 0.0):
        return RegionLabel("Boundary", "total-collision vertex")
    if near(x1, TWO_PI) and (near(e2, 0.0) or near(e3, 0.0)):
        return RegionLabel("Boundary", "total-collision vertex")
    # pairwise intersections of mid-segments
    if (near(x1, math.pi) and (near(e2, math.pi) or near(e3, math.pi))) or \
            (near(e2, math.pi) and near(e3, math.pi)):
        return RegionLabel("Boundary", "collision-antipodal point")
    if near(x1, 0.0) or near(x1, TWO_PI) or near(e2, 0.0) or near(e3, 0.0):
        return RegionLabel("Boundary", "double-collision side")
    if near(x1, math.pi) or near(e2, math.pi) or near(e3, math.pi):
        return RegionLabel("Boundary", "antipodal mid-segment")

    if x1 < math.pi:
        return RegionLabel("I")
    if e2 > math.pi:
        return RegionLabel("III")
    if e3 > math.pi:
        return RegionLabel("IV")
    return RegionLabel("II")


def jacobi_to_polar(js: JacobiState, ctx: MassContext) -> PolarState:
    """Mass-weighted polar coordinates; nu, tau in the r^{3/2}-rescaled time.

    nu = sqrt(r) rdot, tau = r^{3/2} thetadot.
    """
    a = math.sqrt(ctx.mu1) * js.x1
    b = math.sqrt(ctx.mu2) * js.x2
    r = math.hypot(a, b)
    if r == 0.0:
        return PolarState(0.0, 0.0, 0.0, 0.0)
    theta = math.atan2(b, a)
    adot = math.sqrt(ctx.mu1) * js.u1
    bdot = math.sqrt(ctx.mu2) * js.u2
    rdot = (a * adot + b * bdot) / r
    thetadot = (a * bdot - b * adot) / (r * r)
    return PolarState(r=r, theta=theta, nu=math.sqrt(r) * rdot,
                      tau=r ** 1.5 * thetadot)


def polar_to_jacobi(ps: PolarState, ctx: MassContext) -> JacobiState:
    if ps.r < 0.0:
        raise OutOfDomain(f"r must be nonnegative, got {ps.r}")
    c, s = math.cos(ps.theta), math.sin(ps.theta)
    x1 = ps.r * c / math.sqrt(ctx.mu1)
    x2 = ps.r * s / math.sqrt(ctx.mu2)
    if ps.r == 0.0:
        return JacobiState(0.0, 0.0, 0.0, 0.0)
    rdot = ps.nu / math.sqrt(ps.r)
    thetadot = ps.tau / ps.r ** 1.5
    u1 = (rdot * c - ps.r * s * thetadot) / math.sqrt(ctx.mu1)
    u2 = (rdot * s + ps.r * c * thetadot) / math.sqrt(ctx.mu2)
    return JacobiState(x1=x1, x2=x2, u1=u1, u2=u2)


def polar_to_regularized(ps: PolarState, ctx: MassContext,
                         branch: int = 0) -> RegularizedState:
    """Regularized variables on the branch index k: u = k pi + (-1)^k asin(theta/theta_star)."""
    ratio = ps.theta / ctx.theta_star
    if abs(ratio) > 1.0 + 1e-14:
        raise OutOfDomain(f"|theta| = {abs(ps.theta)} exceeds theta_star")
    ratio = max(-1.0, min(1.0, ratio))
    base = math.asin(ratio)
    u = branch * math.pi + (base if branch % 2 == 0 else -base)
    cu = math.cos(u)
    return RegularizedState(r=ps.r, nu=ps.nu, u=u, gamma=ps.tau * cu * cu)


def regularized_to_polar(s: RegularizedState, ctx: MassContext) -> PolarState:
    """Inverse map; tau = gamma/cos^2 u is singular at u = pi/2 (mod pi)."""
    cu = math.cos(s.u)
    if cu == 0.0:
        raise OutOfDomain("tau undefined at u = pi/2 (mod pi)")
    return PolarState(r=s.r, theta=ctx.theta_star * math.sin(s.u),
                      nu=s.nu, tau=s.gamma / (cu * cu))


def branch_of(u: float) -> int:
    """Branch index k with u - k pi in [-pi/2, pi/2]."""
    return round(u / math.pi)


def regularized_to_jacobi(s: RegularizedState, ctx: MassContext) -> JacobiState:
    """Composite map used for trajectory output; valid away from u = pi/2 (mod pi)."""
    return polar_to_jacobi(regularized_to_polar(s, ctx), ctx)


def kinetic_energy_angles(cfg: AngularConfig, ctx: MassContext) -> float:
    return 0.5 * (ctx.n * cfg.v1 ** 2 + ctx.n * cfg.v2 ** 2 + ctx.m * cfg.v3 ** 2)


def kinetic_energy_jacobi(js: JacobiState, ctx: MassContext) -> float:
    """Equals the angle-space kinetic energy when the angular momentum vanishes."""
    return 0.5 * (ctx.mu1 * js.u1 ** 2 + ctx.mu2 * js.u2 ** 2)


TRAJECTORY_COLUMNS = ("sigma", "t_phys", "r", "nu", "u", "gamma", "theta",
                      "x1", "x2", "phi1", "phi2", "phi3", "energy_residual")
