"""Trapping block for the shooting construction and the collision equilibrium.

The block is

    W = { 0 <= r <= r_cap, nu <= 0, 0 <= u <= pi/2, gamma >= 0 }

intersected with the energy manifold, where r_cap is the radius at which the
zero-velocity curve meets the symmetry axis (r_star at h = -1). Orbits leave
W through exactly two faces:

    B1 = { u = pi/2 },
    B2 = { nu = 0, u < pi/2, F >= 0 },    F = 2rU + r^2 U_r + 2rh,

because nu' = theta_star cos^2(u) F at nu = 0: where F < 0 the flow folds
back inside, so only the F >= 0 part of { nu = 0 } is an exit. The slice
H = { u = 0, gamma = 0 } flows into the equilibrium P = (0, -nu0, 0, 0) and
never leaves. The exit map takes a start on the shooting segment

    S = { (r0, 0, 0, gamma(r0)) : 0 < r0 < r_cap }

to its first exit; its face changes from B2 (small r0) to B1 (r0 near
r_cap), and the crossover is the symmetric orbit the shooting module hunts.

The linearization at P is computed twice on purpose: the closed 3x3 matrix
in (r, u, gamma) with nu eliminated through the energy relation, and a
central-difference Jacobian of the same reduced field; they must agree to
1e-6. Eigenvalue signs (-, -, +) make P a saddle whose one-dimensional
unstable branch inside W runs along the collision manifold r = 0 and exits
through B1 with nu < 0, never reaching nu = 0 first; the slope bound
d nu / d u = (theta_star/2) w <= (theta_star/2) nu0 holds because
w^2 <= 2 rU cos^2 u <= nu0^2 on r = 0.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .coords import RegularizedState
from .dynamics import (
    EventSpec,
    IntegratorConfig,
    Trajectory,
    energy_residual,
    gamma_from_energy,
    integrate,
)
from .model import MassContext, axis_crossing
from .potential import F as F_field
from .potential import eval_fields_theta, scaled_terms

_FACE_TOL = 1e-8
_SIGMA_BUDGET = 200.0


class NoExit(RuntimeError):
    """Budget exhausted inside W; the start shadows the stable set of P."""

    def __init__(self, r0: float, sigma: float):
        self.r0 = r0
        self.sigma = sigma
        super().__init__(f"no exit from W within sigma = {sigma} for r0 = {r0}")


@dataclass(frozen=True)
class WazewskiMembership:
    inside: bool
    faces: tuple[str, ...]          # every face equality within tolerance
    immediate_exit: bool
    exit_face: str | None           # "B1" | "B2" when immediate_exit

    @property
    def face(self) -> str | None:
        return self.faces[0] if self.faces else None


@dataclass(frozen=True)
class ExitRecord:
    exit_state: RegularizedState
    exit_sigma: float
    exit_t_phys: float
    face: str                       # "B1" | "B2"
    on_T: bool
    trajectory: Trajectory | None = field(default=None, compare=False)


@dataclass(frozen=True)
class EquilibriumData:
    P: RegularizedState
    jacobian3: np.ndarray
    jacobian_fd: np.ndarray
    lambda1: float
    lambda2: float
    lambda3: float
    eigenvectors: np.ndarray        # columns matching (lambda1, lambda2, lambda3)


def r_cap(ctx: MassContext, h: float) -> float:
    """Outer radius of the block: axis crossing of U = -h (r_star at h = -1)."""
    if h == -1.0:
        return ctx.r_star
    return axis_crossing(ctx, h)


def shooting_point(r0: float, ctx: MassContext, h: float) -> RegularizedState:
    """Point of the shooting segment S at radius r0."""
    cap = r_cap(ctx, h)
    if not 0.0 < r0 < cap:
        raise ValueError(f"r0 = {r0} outside the open segment (0, {cap})")
    return RegularizedState(r=r0, nu=0.0, u=0.0,
                            gamma=gamma_from_energy(r0, 0.0, 0.0, ctx, h))


def membership(s: RegularizedState, ctx: MassContext, h: float,
               tol: float = _FACE_TOL) -> WazewskiMembership:
    """Classify a state against W, its faces, and the immediate exit set."""
    cap = r_cap(ctx, h)
    on_manifold = abs(energy_residual(s, ctx, h)) <= tol
    inside = (on_manifold
              and -tol <= s.r <= cap + tol
              and s.nu <= tol
              and -tol <= s.u <= 0.5 * math.pi + tol
              and s.gamma >= -tol)

    faces = []
    if inside:
        if abs(s.gamma) <= tol:
            faces.append("gamma=0")
        if abs(s.nu) <= tol:
            faces.append("nu=0")
        if abs(s.u) <= tol:
            faces.append("u=0")
        if abs(s.u - 0.5 * math.pi) <= tol:
            faces.append("u=pi/2")
        if abs(s.r) <= tol:
            faces.append("r=0")
        if abs(s.r - cap) <= tol:
            faces.append("r=rcap")

    on_H = "u=0" in faces and "gamma=0" in faces
    exit_face = None
    if inside and not on_H:
        if "u=pi/2" in faces:
            exit_face = "B1"
        elif ("nu=0" in faces and s.u < 0.5 * math.pi - tol
              and F_field(s.r, s.u, ctx, h) >= -tol):
            exit_face = "B2"
    return WazewskiMembership(inside=inside, faces=tuple(faces),
                              immediate_exit=exit_face is not None,
                              exit_face=exit_face)


@functools.lru_cache(maxsize=64)
def curve_F_endpoints(ctx: MassContext, h: float = -1.0) -> tuple[float, float]:
    """(r_A, u_B): ends of the F = 0 curve on the u = 0 axis and on r = r_cap."""
    cap = r_cap(ctx, h)
    axis = lambda r: F_field(r, 0.0, ctx, h)
    if not axis(1e-12) > 0.0 > axis(cap):
        raise ArithmeticError("F does not change sign along the axis")
    r_a = brentq(axis, 1e-12, cap, xtol=1e-13)
    # F -> +inf at the double-collision edge u = pi/2 when r > 0, so the
    # upper bracket stops one step short of it
    u_hi = 0.5 * math.pi - 1e-9
    rim = lambda u: F_field(cap, u, ctx, h)
    if not rim(0.0) < 0.0 < rim(u_hi):
        raise ArithmeticError("F does not change sign along r = r_cap")
    u_b = brentq(rim, 0.0, u_hi, xtol=1e-13)
    return r_a, u_b


def exit_map(s0: RegularizedState, ctx: MassContext, h: float,
             cfg: IntegratorConfig | None = None) -> ExitRecord:
    """Flow a shooting-segment start to its first exit from W."""
    if abs(s0.nu) > _FACE_TOL or abs(s0.u) > _FACE_TOL:
        raise ValueError("exit_map expects a start on the segment {nu = u = 0}")
    if s0.gamma <= 0.0:
        raise ValueError("start lies on H (gamma = 0); it never exits")

    if F_field(s0.r, s0.u, ctx, h) >= 0.0:
        # the segment near r = 0 is already exit material; the map is the
        # identity there
        return ExitRecord(exit_state=s0, exit_sigma=0.0, exit_t_phys=0.0,
                          face="B2", on_T=False, trajectory=None)

    events = (
        EventSpec("nu_up", "nu", 0.0, direction=+1, terminal=True),
        EventSpec("top", "u", 0.5 * math.pi, direction=+1, terminal=True),
    )
    if cfg is None:
        cfg = IntegratorConfig(sigma_max=_SIGMA_BUDGET, events=events)
    else:
        cfg = IntegratorConfig(rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                               max_step=cfg.max_step, first_step=cfg.first_step,
                               sigma_max=cfg.sigma_max,
                               energy_projection=cfg.energy_projection,
                               events=events)
    traj = integrate(s0, ctx, h, cfg)
    if traj.termination == "sigma_budget":
        raise NoExit(s0.r, cfg.sigma_max)
    hit = traj.events[-1]
    face = "B1" if hit.name == "top" else "B2"
    st = hit.state
    if face == "B2" and F_field(st.r, st.u, ctx, h) < -1e-10:
        raise ArithmeticError("nu upcrossing with F < 0; not a genuine exit")
    on_T = (abs(st.nu) <= _FACE_TOL
            and abs(st.u - 0.5 * math.pi) <= _FACE_TOL)
    return ExitRecord(exit_state=st, exit_sigma=float(hit.sigma),
                      exit_t_phys=float(hit.t_phys), face=face, on_T=on_T,
                      trajectory=traj)


def collision_rU_thetatheta(ctx: MassContext) -> float:
    """Second theta-derivative of rU on the collision manifold axis."""
    d = 1e-5
    a = eval_fields_theta(0.0, d, ctx).rU
    b = eval_fields_theta(0.0, 0.0, ctx).rU
    c = eval_fields_theta(0.0, -d, ctx).rU
    fd = (a - 2.0 * b + c) / (d * d)
    tstar = ctx.theta_star
    exact = (ctx.n ** 2 / ctx.A1
             + (ctx.m * ctx.n / ctx.A2) * 2.0 * (1.0 + math.cos(tstar) ** 2)
             / math.sin(tstar) ** 3)
    if abs(fd - exact) > 1e-4 * max(1.0, abs(exact)):
        raise ArithmeticError("closed-form rU_thetatheta disagrees with the "
                              f"second difference: {exact} vs {fd}")
    return exact


def _reduced_field(y: np.ndarray, ctx: MassContext, h: float) -> np.ndarray:
    """(r, u, gamma) field with nu eliminated by the energy relation, nu <= 0."""
    r, u, gamma = y
    ts = ctx.theta_star
    c = math.cos(u)
    c2 = c * c
    s = math.sin(u)
    g0, _, g4 = scaled_terms(r, u, ctx)
    w = gamma / c
    rad = 2.0 * (g0 + r * h * c2) - w * w
    nu = -math.sqrt(max(rad, 0.0)) / abs(c)
    return np.array([
        ts * nu * r * c2,
        w,
        -0.5 * ts * nu * gamma * c2 + ts * g4 - 2.0 * s * w * w,
    ])


def linearize_P(ctx: MassContext, h: float = -1.0,
                fd_step: float = 1e-5) -> EquilibriumData:
    """Saddle data at P: analytic 3x3 block plus a finite-difference check.

    The matrix is h-independent: the r-row contribution of h enters through
    r * d(nu)/dr which vanishes at r = 0.
    """
    ts = ctx.theta_star
    nu0 = ctx.nu0
    q = ts * ts * collision_rU_thetatheta(ctx)
    p = 0.5 * ts * nu0
    jac = np.array([
        [-ts * nu0, 0.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, q, p],
    ])

    y0 = np.zeros(3)
    fd = np.empty((3, 3))
    for j in range(3):
        e = np.zeros(3)
        e[j] = fd_step
        fd[:, j] = (_reduced_field(y0 + e, ctx, h)
                    - _reduced_field(y0 - e, ctx, h)) / (2.0 * fd_step)

    lam1 = -ts * nu0
    disc = math.sqrt(p * p + 4.0 * q)
    lam2 = 0.5 * (p - disc)
    lam3 = 0.5 * (p + disc)
    vecs = np.array([
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 1.0],
        [0.0, lam2, lam3],
    ])
    vecs[:, 1] /= np.linalg.norm(vecs[:, 1])
    vecs[:, 2] /= np.linalg.norm(vecs[:, 2])
    return EquilibriumData(P=RegularizedState(0.0, -nu0, 0.0, 0.0),
                           jacobian3=jac, jacobian_fd=fd,
                           lambda1=lam1, lambda2=lam2, lambda3=lam3,
                           eigenvectors=vecs)


def unstable_branch(ctx: MassContext, h: float = -1.0,
                    eps: float = 1e-8) -> tuple[Trajectory, ExitRecord]:
    """Trace the unstable direction of P inside {r = 0} out to u = pi/2.

    Starts at P + eps*(0, 1, lambda3) in (r, u, gamma), with nu refilled
    from the energy relation, and certifies along the way that nu stays
    negative and d nu / d u never exceeds (theta_star/2) nu0.
    """
    eq = linearize_P(ctx, h)
    u0 = eps
    gamma0 = eps * eq.lambda3
    c = math.cos(u0)
    g0 = scaled_terms(0.0, u0, ctx)[0]
    nu_start = -math.sqrt(2.0 * g0 - (gamma0 / c) ** 2) / c
    s0 = RegularizedState(0.0, nu_start, u0, gamma0)

    events = (
        EventSpec("top", "u", 0.5 * math.pi, direction=+1, terminal=True),
        EventSpec("nu_up", "nu", 0.0, direction=+1, terminal=True),
    )
    traj = integrate(s0, ctx, h, IntegratorConfig(sigma_max=_SIGMA_BUDGET,
                                                  events=events))
    if traj.termination != "event:top":
        raise RuntimeError("unstable branch failed to reach u = pi/2 first: "
                           f"{traj.termination}")
    if np.any(traj.states[:, 0] != 0.0):
        raise AssertionError("left the collision manifold")

    du = np.diff(traj.states[:, 2])
    dnu = np.diff(traj.states[:, 1])
    ok = du > 1e-12
    slope_max = float(np.max(dnu[ok] / du[ok]))
    bound = 0.5 * ctx.theta_star * ctx.nu0
    if slope_max > bound + 1e-9:
        raise AssertionError(f"d nu/d u = {slope_max} exceeds the bound {bound}")

    hit = traj.events[-1]
    record = ExitRecord(exit_state=hit.state, exit_sigma=float(hit.sigma),
                        exit_t_phys=float(hit.t_phys), face="B1",
                        on_T=abs(hit.state.nu) <= _FACE_TOL,
                        trajectory=traj)
    return traj, record


def leaving_set_constants(ctx: MassContext, grid: int = 256) -> dict:
    """Empirical (not certified) lower bounds used by the exit-set argument.

    c2_sq is the minimum of 2 rU cos^2 u on the u = pi/2 edge over
    r in [0, r_cap]; c3 the minimum of rU_theta cos^4 u / sin u over the
    interior quadrant.
    """
    cap = ctx.r_star
    rs = np.linspace(0.0, cap, grid)
    c2_sq = min(2.0 * scaled_terms(r, 0.5 * math.pi, ctx)[0] for r in rs)
    c3 = math.inf
    for r in rs:
        for u in np.linspace(1e-3, 0.5 * math.pi, grid // 2):
            g4 = scaled_terms(r, u, ctx)[2]
            c3 = min(c3, g4 / math.sin(u))
    return {"c2_sq": float(c2_sq), "c3": float(c3)}
