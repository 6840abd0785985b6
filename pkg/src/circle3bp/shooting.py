"""Bisection shot through the trapping block and assembly of the periodic orbit.

The exit face of the block is B2 for small starting radii and B1 near the
outer rim, so the radius where the face flips is bracketed by a scan and
then bisected. A start whose trajectory reaches the edge
{u = pi/2, nu = 0} is a quarter of the symmetric periodic orbit: the other
three quarters follow from the two flow symmetries

    R2: (r, nu, u, gamma)(sigma) -> (r, -nu, pi - u, -gamma)(-sigma),
    T:  (r, nu, u, gamma)(sigma) -> (r, nu, u + pi, -gamma)(sigma),

reflection about the collision time and the swap of the two equal masses.
Both flip gamma; at the junctions gamma vanishes (it scales like
w cos u -> 0 at a double collision), so the pieces join continuously. One
period advances u by 2 pi through two regularized double collisions, and
the assembled orbit is cross-checked by re-integrating the whole period
from scratch and measuring how far it misses its starting state.

Face bisection is robust far from the root but carries no rate
information, so once the bracket is tight a secant pass on the exit
velocity (as a function of the starting radius) sharpens the root. Starts
that exhaust the integration budget without leaving the block shadow the
stable set of the equilibrium; the bisector steps around them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coords import RegularizedState
from .dynamics import IntegratorConfig, Trajectory, integrate
from .model import EnergyLevel, MassContext
from .wazewski import ExitRecord, NoExit, exit_map, r_cap, shooting_point


class NoFaceChange(RuntimeError):
    """The scan over starting radii found no B2 -> B1 transition."""


class ClosureFailure(RuntimeError):
    """Re-integrated period misses its starting state beyond tolerance."""


@dataclass(frozen=True)
class ShootConfig:
    lo: float | None = None         # B2-side bracket end; auto-scanned if None
    hi: float | None = None         # B1-side bracket end
    residual_tol: float = 1e-8      # target |nu| at the u = pi/2 exit
    bracket_tol: float = 1e-14
    max_steps: int = 200
    scan: int = 24                  # auto-bracket resolution over (0, r_cap)
    integrator: IntegratorConfig | None = None

    def __post_init__(self):
        if self.residual_tol <= 0.0 or self.bracket_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.scan < 3:
            raise ValueError("scan needs at least 3 points")


@dataclass(frozen=True)
class QuarterOrbit:
    r0: float
    gamma0: float
    r1: float
    gamma1: float
    sigma1: float                   # rescaled-time length of the quarter
    t1: float                       # physical length
    residual: float                 # |nu| at the exit
    trajectory: Trajectory = field(compare=False)
    trace: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class PeriodicOrbit:
    r0: float
    gamma0: float
    r1: float
    gamma1: float
    m: float
    h: float
    sigma: np.ndarray = field(compare=False)
    states: np.ndarray = field(compare=False)   # (N, 4) rows (r, nu, u, gamma)
    t_phys: np.ndarray = field(compare=False)
    sigma_period: float = 0.0
    t_period: float = 0.0
    closure_error: float = math.inf
    closure_trajectory: Trajectory | None = field(default=None, compare=False)


@dataclass(frozen=True)
class PhysicalOrbit:
    t: np.ndarray
    phi1: np.ndarray
    phi2: np.ndarray
    phi3: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    d12: np.ndarray
    d13: np.ndarray
    d23: np.ndarray
    v1_at_quarter: float            # body-1 angular velocity at the collision


def signed_residual(rec: ExitRecord) -> float:
    """Sign changes across the target: nu < 0 on B1 exits, the remaining
    u-distance to the collision edge (> 0) on B2 exits."""
    if rec.face == "B1":
        return rec.exit_state.nu
    return 0.5 * math.pi - rec.exit_state.u


def _classify(r0: float, ctx: MassContext, h: float,
              cfg: ShootConfig) -> ExitRecord | None:
    try:
        return exit_map(shooting_point(r0, ctx, h), ctx, h, cfg.integrator)
    except NoExit:
        return None


def bracket_and_bisect(cfg: ShootConfig, ctx: MassContext,
                       h: float) -> QuarterOrbit:
    """Locate the face crossover on the shooting segment and polish it."""
    EnergyLevel(h).require_shootable()
    cap = r_cap(ctx, h)

    if cfg.lo is not None and cfg.hi is not None:
        lo, hi = cfg.lo, cfg.hi
        rec_lo = _classify(lo, ctx, h, cfg)
        rec_hi = _classify(hi, ctx, h, cfg)
        if rec_lo is None or rec_lo.face != "B2":
            raise ValueError(f"lo = {lo} does not exit through B2")
        if rec_hi is None or rec_hi.face != "B1":
            raise ValueError(f"hi = {hi} does not exit through B1")
    else:
        grid = np.linspace(cap * 1e-3, cap * (1.0 - 1e-5), cfg.scan)
        faces = []
        for r0 in grid:
            rec = _classify(r0, ctx, h, cfg)
            faces.append(rec.face if rec is not None else None)
        lo = hi = rec_hi = None
        for a, b, fa, fb in zip(grid, grid[1:], faces, faces[1:]):
            if fa == "B2" and fb == "B1":
                lo, hi = a, b
                rec_hi = _classify(b, ctx, h, cfg)
                break
        if lo is None:
            raise NoFaceChange(f"no B2 -> B1 transition among {cfg.scan} "
                               f"starts for m = {ctx.m}, h = {h}")

    trace = []
    best: tuple[float, ExitRecord] | None = None
    if rec_hi is not None and rec_hi.face == "B1":
        best = (hi, rec_hi)
    b1_samples: list[tuple[float, float]] = []

    for _ in range(cfg.max_steps):
        if hi - lo <= cfg.bracket_tol:
            break
        mid = 0.5 * (lo + hi)
        rec = _classify(mid, ctx, h, cfg)
        if rec is None:
            # dwells near the equilibrium: treat as the boundary itself and
            # step around it
            for delta in (1e-12, 1e-10):
                rm = _classify(mid - delta, ctx, h, cfg)
                rp = _classify(mid + delta, ctx, h, cfg)
                if rm is not None and rm.face == "B2":
                    lo = mid - delta
                if rp is not None and rp.face == "B1":
                    hi = mid + delta
                    rec = rp
                    mid = hi
                if rec is not None:
                    break
            if rec is None:
                hi = mid  # give up on this cell from above
                continue
        trace.append((mid, rec.face, signed_residual(rec)))
        if rec.face == "B2":
            lo = mid
        else:
            hi = mid
            b1_samples.append((mid, rec.exit_state.nu))
            if best is None or abs(rec.exit_state.nu) < abs(best[1].exit_state.nu):
                best = (mid, rec)
            if abs(rec.exit_state.nu) <= cfg.residual_tol:
                break

    # secant sharpening on the B1-side exit velocity
    for _ in range(3):
        if len(b1_samples) < 2 or abs(best[1].exit_state.nu) <= cfg.residual_tol:
            break
        (ra, na), (rb, nb) = b1_samples[-2], b1_samples[-1]
        if nb == na:
            break
        rs = rb - nb * (rb - ra) / (nb - na)
        if not lo < rs < hi + (hi - lo):
            break
        rec = _classify(rs, ctx, h, cfg)
        if rec is None or rec.face != "B1":
            break
        trace.append((rs, rec.face, signed_residual(rec)))
        b1_samples.append((rs, rec.exit_state.nu))
        if abs(rec.exit_state.nu) < abs(best[1].exit_state.nu):
            best = (rs, rec)

    if best is None:
        raise NoFaceChange("bisection never produced a B1 exit")
    r0, rec = best
    s0 = shooting_point(r0, ctx, h)
    st = rec.exit_state
    return QuarterOrbit(r0=r0, gamma0=s0.gamma, r1=st.r, gamma1=st.gamma,
                        sigma1=rec.exit_sigma, t1=rec.exit_t_phys,
                        residual=abs(st.nu), trajectory=rec.trajectory,
                        trace=tuple(trace))


def assemble_period(q: QuarterOrbit, ctx: MassContext, h: float,
                    samples_per_quarter: int = 600,
                    closure_tol: float = 1e-5) -> PeriodicOrbit:
    """Mirror the quarter into a full period and measure true closure.

    Quarter 2 is the R2 reflection of quarter 1 about the collision time;
    the second half is the T image of the first. The symmetry construction
    closes exactly by design, so the reported closure error comes from an
    independent re-integration of the whole period.
    """
    if q.residual > 1e-6:
        raise ValueError(f"quarter residual {q.residual} too large to mirror")
    n = samples_per_quarter
    s1 = np.linspace(0.0, q.sigma1, n)
    a = q.trajectory.sample(s1)                  # columns r, nu, u, gamma, t
    r, nu, u, gm, t = a.T

    # R2 about sigma = sigma1: traverse quarter 1 backwards, flip nu and gamma,
    # reflect u about pi/2
    rev = slice(-2, None, -1)
    q2 = np.column_stack([r[rev], -nu[rev], math.pi - u[rev], -gm[rev]])
    t2 = 2.0 * q.t1 - t[rev]
    half_states = np.vstack([np.column_stack([r, nu, u, gm]), q2])
    half_t = np.concatenate([t, t2])
    half_sigma = np.linspace(0.0, 2.0 * q.sigma1, 2 * n - 1)

    # T image: same motion with the equal masses swapped, u shifted by pi
    sh = half_states[1:].copy()
    sh[:, 2] += math.pi
    sh[:, 3] *= -1.0
    states = np.vstack([half_states, sh])
    t_phys = np.concatenate([half_t, half_t[1:] + 2.0 * q.t1])
    sigma = np.concatenate([half_sigma, half_sigma[1:] + 2.0 * q.sigma1])

    s0 = RegularizedState(*states[0])
    period = 4.0 * q.sigma1
    cfg = IntegratorConfig(sigma_max=period)
    closure = integrate(s0, ctx, h, cfg)
    fin = closure.final_state
    err = max(abs(fin.r - s0.r), abs(fin.nu - s0.nu),
              abs(fin.u - (s0.u + 2.0 * math.pi)), abs(fin.gamma - s0.gamma))
    if err > closure_tol:
        raise ClosureFailure(f"period misses its start by {err}")

    return PeriodicOrbit(r0=q.r0, gamma0=q.gamma0, r1=q.r1, gamma1=q.gamma1,
                         m=ctx.m, h=h, sigma=sigma, states=states,
                         t_phys=t_phys, sigma_period=period,
                         t_period=4.0 * q.t1, closure_error=err,
                         closure_trajectory=closure)


def _body1_velocity(s: RegularizedState, ctx: MassContext) -> float:
    """Angular velocity of the far body, stable through the 2-3 collision.

    v1 = [nu C1(theta) + w C2(theta)/cos u] / sqrt(r) with
    C1 = -alpha2 cos(theta)/sqrt(mu1) - m sin(theta)/sqrt(mu2) and
    C2 = alpha2 sin(theta)/sqrt(mu1) - m cos(theta)/sqrt(mu2). C2 vanishes
    at theta = theta_star for every m (tan^2 theta_star = m), which is why
    the far body never feels the colliding pair's divergent velocities; the
    quotient C2/cos u is evaluated through that zero explicitly inside a
    band around the collision.
    """
    ts = ctx.theta_star
    theta = ts * math.sin(s.u)
    c = math.cos(s.u)
    ct, st = math.cos(theta), math.sin(theta)
    sq1, sq2 = math.sqrt(ctx.mu1), math.sqrt(ctx.mu2)
    c1 = -ctx.alpha2 * ct / sq1 - ctx.m * st / sq2
    c2 = ctx.alpha2 * st / sq1 - ctx.m * ct / sq2
    if abs(c) >= 1e-4:
        quot = c2 / c
    else:
        # C2 ~ C2'(theta)(theta - theta_star) with
        # theta - theta_star = -theta_star cos^2 u / (1 + sin u)
        d_c2 = ctx.alpha2 * ct / sq1 + ctx.m * st / sq2
        quot = -d_c2 * ts * c / (1.0 + math.sin(s.u))
    w = 0.0 if c == 0.0 else s.gamma / c
    return (s.nu * c1 + w * quot) / math.sqrt(s.r)


def render_physical(orbit: PeriodicOrbit, ctx: MassContext) -> PhysicalOrbit:
    """Angle-space picture of the assembled orbit with its narrative checks.

    At t = 0 the light body sits at the midpoint of the other two; at the
    end of the first quarter bodies 2 and 3 collide while body 1 is
    momentarily at rest; at the half period the configuration repeats with
    the equal masses exchanged.
    """
    r = orbit.states[:, 0]
    u = orbit.states[:, 2]
    theta = ctx.theta_star * np.sin(u)
    x1 = r * np.cos(theta) / math.sqrt(ctx.mu1)
    x2 = r * np.sin(theta) / math.sqrt(ctx.mu2)
    phi1 = -ctx.alpha2 * x1 - ctx.m * x2
    phi2 = ctx.alpha1 * x1 - ctx.m * x2
    phi3 = 2.0 * ctx.n * x2
    d12 = x1
    d13 = 0.5 * x1 + x2
    d23 = 0.5 * x1 - x2

    if abs((phi3[0] - phi1[0]) - (phi2[0] - phi3[0])) > 1e-9:
        raise ArithmeticError("initial configuration is not isosceles")
    nq = (len(u) + 3) // 4
    jq = nq - 1
    if abs(d23[jq]) > 1e-10:
        raise ArithmeticError("no double collision at the quarter junction")
    v1 = _body1_velocity(RegularizedState(*orbit.states[jq]), ctx)
    if abs(v1) > 1e-6:
        raise ArithmeticError(f"body 1 moving at the collision: v1 = {v1}")

    return PhysicalOrbit(t=orbit.t_phys, phi1=phi1, phi2=phi2, phi3=phi3,
                         x1=x1, x2=x2, d12=d12, d13=d13, d23=d23,
                         v1_at_quarter=v1)
