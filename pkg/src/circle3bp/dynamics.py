"""Regularized vector field, energy bookkeeping, and adaptive integration.

The state is (r, nu, u, gamma) with one extra quadrature component for
physical time. In the final rescaled time sigma the field reads

    r'     = theta* nu r cos^2 u
    nu'    = theta* cos^2 u (-nu^2/2 + 2rh + 2rU + r^2 U_r)
    u'     = gamma / cos u
    gamma' = -(theta*/2) nu gamma cos^2 u + theta* rU_theta cos^4 u
             - 2 sin u gamma^2 / cos^2 u

subject to the energy relation

    (nu^2 cos^2 u + gamma^2/cos^2 u)/2 - rU cos^2 u = rh cos^2 u.

Near u = pi/2 (mod pi) every cos-u division goes through the auxiliary
velocity w = gamma/cos u recovered from the energy relation, which is what
lets trajectories cross double collisions as ordinary points. The identity
gamma^2/cos^2 u = w * gamma keeps gamma' exact in the same regime.

Integration drives scipy's DOP853 stepper directly: each accepted step is
followed by optional energy projection (rescale gamma, or nu when gamma is
essentially zero), event root-finding by bisection on the dense output, and
accumulation of the physical clock dt/dsigma = r^{3/2} theta* cos^2 u.

A deliberately unregularized oracle flow in Jacobi variables provides an
independent cross-check away from collisions.
"""

from __future__ import annotations

import bisect as _bisect
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import DOP853, solve_ivp

from .coords import JacobiState, OutOfDomain, RegularizedState
from .model import MassContext
from .potential import scaled_terms

# |cos u| below which w comes from the energy relation. Wide on purpose: in
# the band gamma ~ w cos u is small and carries an absolute integration error
# near abs_tol, so the quotient gamma/cos u hands the trajectory a physical
# energy error of order abs_tol/cutoff^2 at the band edge. At 1e-2 that seed
# sits near 1e-9, while the energy-relation w is ulp-accurate throughout.
_W_CUTOFF = 1e-2


class ImaginaryGamma(ValueError):
    """Requested energy state lies outside the Hill region."""


class StepFailure(RuntimeError):
    """The adaptive step controller underflowed its minimum step."""


@dataclass(frozen=True)
class FieldEval:
    dr: float
    dnu: float
    du: float
    dgamma: float


def _w_value(r, nu, u, gamma, c, g0, h):
    """gamma/cos u through the energy relation; finite at u = pi/2 (mod pi)."""
    c2 = c * c
    rad = 2.0 * (g0 + r * h * c2) - nu * nu * c2
    w = math.sqrt(max(rad, 0.0))
    if (gamma >= 0.0) != (c >= 0.0):
        w = -w
    return w


def _rhs(y, ctx, h):
    r, nu, u, gamma = y[0], y[1], y[2], y[3]
    ts = ctx.theta_star
    s = math.sin(u)
    c = math.cos(u)
    c2 = c * c
    g0, g2, g4 = scaled_terms(r, u, ctx)
    if abs(c) >= _W_CUTOFF:
        w = gamma / c
    else:
        w = _w_value(r, nu, u, gamma, c, g0, h)
    dr = ts * nu * r * c2
    dnu = ts * (c2 * (-0.5 * nu * nu + 2.0 * r * h) + g2)
    du = w
    dgamma = -0.5 * ts * nu * gamma * c2 + ts * g4 - 2.0 * s * w * w
    dt = r * math.sqrt(r) * ts * c2 if r > 0.0 else 0.0
    return np.array([dr, dnu, du, dgamma, dt])


def vector_field(s: RegularizedState, ctx: MassContext, h: float) -> FieldEval:
    """Right-hand side at one state; OutOfDomain past the blow-up radius."""
    theta = ctx.theta_star * math.sin(s.u)
    if s.r * ctx.A1 * math.cos(theta) >= math.pi:
        raise OutOfDomain(f"r = {s.r} beyond the blow-up bound at u = {s.u}")
    d = _rhs(np.array([s.r, s.nu, s.u, s.gamma, 0.0]), ctx, h)
    return FieldEval(dr=d[0], dnu=d[1], du=d[2], dgamma=d[3])


def energy_residual(s: RegularizedState, ctx: MassContext, h: float) -> float:
    """(nu^2 c^2 + (gamma/c)^2)/2 - rU c^2 - rh c^2; zero on the manifold.

    Inside the w band (|cos u| < _W_CUTOFF) the gamma/cos u quotient would amplify gamma's
    float error by 1/cos^2 u, while gamma itself carries no observable
    information there (gamma = w cos u -> 0 regardless of w, and the field
    reconstructs w from the energy relation in that band). The stable form
    therefore substitutes the manifold value w^2 = max(radicand, 0), which
    reports exactly the nu-side deficit: 0 inside the Hill region,
    -radicand/2 beyond it.
    """
    c = math.cos(s.u)
    c2 = c * c
    g0 = scaled_terms(s.r, s.u, ctx)[0]
    if abs(c) >= _W_CUTOFF:
        w2 = (s.gamma / c) ** 2
    else:
        w2 = max(2.0 * (g0 + s.r * h * c2) - s.nu * s.nu * c2, 0.0)
    return 0.5 * (s.nu * s.nu * c2 + w2) - g0 - s.r * h * c2


def gamma_from_energy(r: float, nu: float, u: float, ctx: MassContext,
                      h: float) -> float:
    """Nonnegative gamma closing the energy relation at (r, nu, u)."""
    c = math.cos(u)
    c2 = c * c
    g0 = scaled_terms(r, u, ctx)[0]
    rad = 2.0 * (g0 + r * h * c2) - nu * nu * c2
    if rad < -1e-12:
        raise ImaginaryGamma(
            f"radicand {rad} < 0: point outside the Hill region")
    return abs(c) * math.sqrt(max(rad, 0.0))


@dataclass(frozen=True)
class EventSpec:
    """Scalar event g = 0 on a trajectory.

    kind selects g: "u", "nu", "r", "gamma" give component - value; "custom"
    uses fn(sigma, y). direction +1 detects rising crossings, -1 falling,
    0 both. Roots are bisected on the dense output to |g| <= 1e-12.
    """
    name: str
    kind: str = "custom"
    value: float = 0.0
    direction: int = 0
    terminal: bool = False
    fn: object = None

    def __call__(self, sigma, y) -> float:
        if self.kind == "u":
            return y[2] - self.value
        if self.kind == "nu":
            return y[1] - self.value
        if self.kind == "r":
            return y[0] - self.value
        if self.kind == "gamma":
            return y[3] - self.value
        return self.fn(sigma, y)


@dataclass(frozen=True)
class EventHit:
    name: str
    sigma: float
    t_phys: float
    state: RegularizedState


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-11
    abs_tol: float = 1e-13
    max_step: float = 0.05
    first_step: float = 1e-4
    sigma_max: float = 200.0
    energy_projection: bool = True
    events: tuple[EventSpec, ...] = ()

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")


@dataclass
class Trajectory:
    """Accepted steps of one integration plus dense interpolants."""
    sigma: np.ndarray
    states: np.ndarray          # columns r, nu, u, gamma
    t_phys: np.ndarray
    energy_res: np.ndarray
    events: list[EventHit]
    termination: str
    m: float
    h: float
    _dense: list = field(default_factory=list, repr=False)

    @property
    def final_state(self) -> RegularizedState:
        r, nu, u, gamma = self.states[-1]
        return RegularizedState(r=r, nu=nu, u=u, gamma=gamma)

    @property
    def final_sigma(self) -> float:
        return float(self.sigma[-1])

    def sample(self, sigmas) -> np.ndarray:
        """Dense-output samples; columns r, nu, u, gamma, t_phys."""
        sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
        lo = self.sigma[0]
        hi = self.sigma[-1]
        out = np.empty((len(sigmas), 5))
        bounds = [d.t for d in self._dense]
        for k, sg in enumerate(sigmas):
            if not lo - 1e-12 <= sg <= hi + 1e-12:
                raise ValueError(f"sigma {sg} outside [{lo}, {hi}]")
            if not self._dense:
                out[k] = np.append(self.states[0], self.t_phys[0])
                continue
            i = min(_bisect.bisect_left(bounds, sg), len(self._dense) - 1)
            out[k] = self._dense[i](min(max(sg, lo), hi))
        return out


def _project(y, ctx, h):
    """Rescale gamma (or nu when |gamma| <= 1e-13) onto the energy manifold."""
    r, nu, u, gamma = y[0], y[1], y[2], y[3]
    c = math.cos(u)
    c2 = c * c
    g0 = scaled_terms(r, u, ctx)[0]
    if abs(gamma) > 1e-13:
        rad = 2.0 * (g0 + r * h * c2) - nu * nu * c2
        if rad < 0.0:
            return False
        target = abs(c) * math.sqrt(rad)
        if abs(target - abs(gamma)) > 1e-6 * max(1.0, abs(gamma)):
            return False
        y[3] = math.copysign(target, gamma)
        return True
    w = gamma / c
    rad = 2.0 * (g0 + r * h * c2) - w * w
    if rad < 0.0:
        return False
    target = math.sqrt(rad) / abs(c)
    if abs(target - abs(nu)) > 1e-6 * max(1.0, abs(nu)):
        return False
    y[1] = math.copysign(target, nu) if nu != 0.0 else target
    return True


_EVENT_TOL = 1e-12


def _bisect_event(spec, dense, s_lo, s_hi, g_lo):
    """Root of g on [s_lo, s_hi] given a sign change; |g| <= 1e-12 at exit."""
    lo, hi = s_lo, s_hi
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        gm = spec(mid, dense(mid))
        if abs(gm) <= _EVENT_TOL or hi - lo < 1e-15:
            break
        if (gm > 0.0) == (g_lo > 0.0):
            lo = mid
        else:
            hi = mid
    return mid


def integrate(s0: RegularizedState, ctx: MassContext, h: float,
              cfg: IntegratorConfig | None = None) -> Trajectory:
    """Flow s0 forward in sigma until a terminal event or the sigma budget.

    The initial state must satisfy the energy relation to 1e-9.
    """
    cfg = cfg or IntegratorConfig()
    res0 = energy_residual(s0, ctx, h)
    if abs(res0) > 1e-9:
        raise ValueError(f"initial energy residual {res0:.3e} exceeds 1e-9")

    y0 = np.array([s0.r, s0.nu, s0.u, s0.gamma, 0.0])
    solver = DOP853(lambda t, y: _rhs(y, ctx, h), 0.0, y0, cfg.sigma_max,
                    rtol=cfg.rel_tol, atol=cfg.abs_tol,
                    max_step=cfg.max_step, first_step=cfg.first_step)
    sig = [0.0]
    rows = [y0[:4].copy()]
    tps = [0.0]
    res = [res0]
    hits: list[EventHit] = []
    dense_segs = []
    g_prev = [spec(0.0, y0) for spec in cfg.events]
    termination = "sigma_budget"

    while True:
        msg = solver.step()
        if solver.status == "failed":
            raise StepFailure(msg or "step size underflow")
        dense = solver.dense_output()
        dense_segs.append(dense)
        s_old, s_new = dense.t_old, dense.t
        y_new = solver.y

        cut = None
        for i, spec in enumerate(cfg.events):
            g_new = spec(s_new, y_new)
            crossed = g_prev[i] * g_new < 0.0
            if crossed and spec.direction != 0:
                crossed = (g_new > 0.0) == (spec.direction > 0)
            if crossed:
                s_hit = _bisect_event(spec, dense, s_old, s_new, g_prev[i])
                yh = dense(s_hit)
                hit = EventHit(name=spec.name, sigma=s_hit, t_phys=yh[4],
                               state=RegularizedState(r=yh[0], nu=yh[1],
                                                      u=yh[2], gamma=yh[3]))
                hits.append(hit)
                if spec.terminal and (cut is None or s_hit < cut[0]):
                    cut = (s_hit, yh, spec.name)
            g_prev[i] = g_new

        if cut is not None:
            s_hit, yh, name = cut
            hits = [x for x in hits if x.sigma <= s_hit + 1e-15]
            y_end = yh.copy()
            if cfg.energy_projection:
                _project(y_end, ctx, h)
            sig.append(s_hit)
            rows.append(y_end[:4].copy())
            tps.append(y_end[4])
            res.append(energy_residual(RegularizedState(*y_end[:4]), ctx, h))
            termination = f"event:{name}"
            break

        if cfg.energy_projection and _project(y_new, ctx, h):
            solver.y = y_new
            solver.f = _rhs(y_new, ctx, h)
        sig.append(s_new)
        rows.append(y_new[:4].copy())
        tps.append(y_new[4])
        res.append(energy_residual(RegularizedState(*y_new[:4]), ctx, h))
        if solver.status == "finished":
            break

    return Trajectory(sigma=np.array(sig), states=np.array(rows),
                      t_phys=np.array(tps), energy_res=np.array(res),
                      events=hits, termination=termination,
                      m=ctx.m, h=h, _dense=dense_segs)


@dataclass(frozen=True)
class OracleTrajectory:
    t: np.ndarray
    states: np.ndarray          # columns x1, x2, u1, u2
    termination: str
    sol: object = None

    def sample(self, times) -> np.ndarray:
        return self.sol(np.asarray(times, dtype=float)).T


_MARGIN = 0.05


def oracle_flow(js0: JacobiState, ctx: MassContext,
                duration: float) -> OracleTrajectory:
    """Unregularized second-order flow in Jacobi variables (cross-check only).

    Integrates mu1 x1'' = U_x1, mu2 x2'' = U_x2 in physical time and stops
    at the guard band: every d_ij >= 0.05 and |d_ij - pi| >= 0.05.
    """
    n2 = ctx.n * ctx.n
    mn = ctx.m * ctx.n

    def rhs(t, y):
        x1, x2, v1, v2 = y
        s1 = math.sin(x1)
        s2 = math.sin(0.5 * x1 + x2)
        s3 = math.sin(0.5 * x1 - x2)
        ux1 = -n2 / (s1 * s1) - 0.5 * mn * (1.0 / (s2 * s2) + 1.0 / (s3 * s3))
        ux2 = -mn / (s2 * s2) + mn / (s3 * s3)
        return [v1, v2, ux1 / ctx.mu1, ux2 / ctx.mu2]

    def guard(side):
        def g(t, y):
            d = (y[0], 0.5 * y[0] + y[1], 0.5 * y[0] - y[1])[side % 3]
            d = min(d, 2.0 * math.pi - d)
            return (d - _MARGIN) if side < 3 else (math.pi - _MARGIN - d)
        g.terminal = True
        return g

    events = [guard(k) for k in range(6)]
    for k, d in enumerate((js0.x1, 0.5 * js0.x1 + js0.x2,
                           0.5 * js0.x1 - js0.x2)):
        dd = min(d, 2.0 * math.pi - d)
        if dd < _MARGIN or math.pi - dd < _MARGIN:
            raise ValueError(f"initial distance {k} inside the guard band")

    sol = solve_ivp(rhs, (0.0, duration),
                    [js0.x1, js0.x2, js0.u1, js0.u2],
                    method="DOP853", rtol=1e-11, atol=1e-13,
                    dense_output=True, events=events)
    term = "margin" if sol.status == 1 else "duration"
    return OracleTrajectory(t=sol.t, states=sol.y.T, termination=term,
                            sol=sol.sol)


def reversal(s: RegularizedState) -> RegularizedState:
    """The reflection (r, nu, u, gamma) -> (r, -nu, pi - u, -gamma).

    Conjugates the flow with time reversal: if s(sigma) is a solution then
    reversal(s)(-sigma) is one too.
    """
    return RegularizedState(r=s.r, nu=-s.nu, u=math.pi - s.u, gamma=-s.gamma)


def shift(s: RegularizedState) -> RegularizedState:
    """The equivariance (r, nu, u, gamma) -> (r, nu, u + pi, -gamma)."""
    return RegularizedState(r=s.r, nu=s.nu, u=s.u + math.pi, gamma=-s.gamma)
