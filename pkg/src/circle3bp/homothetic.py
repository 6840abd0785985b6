"""One-degree-of-freedom isosceles slice: symmetric pair orbiting a body at rest.

With m1 = m2 = n placed at +-x1/2 and m3 = m fixed at the midpoint, the
shape variable x2 vanishes for all time and the motion reduces to

    H = p1^2 / (2 mu1) - U_iso(x1),    mu1 = (1 - m)/4,

on x1 in (0, pi) union (pi, 2pi). The cotangent potential collapses to

    U_iso = (1-m)^2/4 * ( +-cot(x1) + 4m/(1-m) cot(x1/2) ),

plus sign on (0, pi), minus on (pi, 2pi); on the upper interval the same
function can be rewritten as

    (1/2) tan(x1/2) + (9m-1)/(2(1-m)) cot(x1/2),

which makes the sign of 9m - 1 the whole story there: below the threshold
every motion runs into the collision-antipodal end x1 = 2pi with unbounded
velocity, at the threshold the end is reached with finite velocity whenever
h >= 0, and above it -U_iso has a single well with bottom h0 at x1_eq, so
levels h > h0 oscillate and h = h0 sits still. x1 = 0 is the total
collision, x1 = pi the antipodal barrier (-U_iso -> +inf, unreachable).

Endings are diagnosed, not regularized: the ODE stops a fixed margin from a
singular endpoint and the remaining stretch is handled by the energy
quadrature t = integral mu1 dx / p1(x), including the location where p1
first exceeds 1e6 (the velocity blow-up flag).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

_EDGE = 1e-3              # stop the ODE this far from a singular endpoint
_P_BLOWUP = 1e6
_NINTH_TOL = 1e-14        # |9m - 1| below this counts as the threshold case


@dataclass(frozen=True)
class IsoscelesState:
    """Separation x1 and conjugate momentum p1 = mu1 * dx1/dt."""
    x1: float
    p1: float


@dataclass(frozen=True)
class TrichotomyReport:
    regime: str                     # "m<1/9" | "m=1/9" | "m>1/9"
    x1_eq: float | None = None      # only for m > 1/9
    h0: float | None = None
    motion: str | None = None       # classification at the queried energy
    velocity_blowup: bool = False
    h: float | None = None


@dataclass
class IsoTrajectory:
    t: np.ndarray
    states: np.ndarray              # columns x1, p1
    diagnosis: str
    h: float
    turning_times: list = field(default_factory=list)
    velocity_blowup: bool = False
    t_blowup: float | None = None   # clock reading when p1 passes 1e6
    t_singularity: float | None = None
    _sol: object = field(default=None, repr=False)

    @property
    def final_state(self) -> IsoscelesState:
        return IsoscelesState(x1=self.states[-1, 0], p1=self.states[-1, 1])

    def sample(self, times) -> np.ndarray:
        """Dense-output samples, rows (x1, p1)."""
        return self._sol.sol(np.asarray(times, dtype=float)).T


def _check_interval(x1):
    if not (0.0 < x1 < 2.0 * math.pi) or x1 == math.pi:
        raise ValueError(f"x1 = {x1} is at or beyond a singular endpoint")


def iso_potential(x1: float, m: float) -> float:
    """Physical potential of the isosceles configuration at separation x1.

    The upper branch is evaluated as (1/2)tan(x1/2) + C cot(x1/2) with
    C = (9m-1)/(2(1-m)): the raw -cot(x1) + k cot(x1/2) form subtracts two
    1/(2pi - x1) poles near the far end and loses all precision there.
    """
    _check_interval(x1)
    if not 0.0 < m < 1.0:
        raise ValueError("mass fraction m must lie in (0, 1)")
    pref = 0.25 * (1.0 - m) ** 2
    if x1 < math.pi:
        k = 4.0 * m / (1.0 - m)
        return pref * (1.0 / math.tan(x1) + k / math.tan(0.5 * x1))
    coef = (9.0 * m - 1.0) / (2.0 * (1.0 - m))
    return pref * (0.5 * math.tan(0.5 * x1) + coef / math.tan(0.5 * x1))


def iso_potential_slope(x1: float, m: float) -> float:
    """d U_iso / d x1."""
    _check_interval(x1)
    pref = 0.25 * (1.0 - m) ** 2
    if x1 < math.pi:
        k = 4.0 * m / (1.0 - m)
        return pref * (-1.0 / math.sin(x1) ** 2
                       - 0.5 * k / math.sin(0.5 * x1) ** 2)
    coef = (9.0 * m - 1.0) / (2.0 * (1.0 - m))
    return pref * (0.25 / math.cos(0.5 * x1) ** 2
                   - 0.5 * coef / math.sin(0.5 * x1) ** 2)


def iso_energy(s: IsoscelesState, m: float) -> float:
    mu1 = 0.25 * (1.0 - m)
    return 0.5 * s.p1 ** 2 / mu1 - iso_potential(s.x1, m)


def _momentum(x1, m, h):
    """|p1| from the energy relation; nan where the level is forbidden."""
    rad = 2.0 * 0.25 * (1.0 - m) * (h + iso_potential(x1, m))
    return math.sqrt(rad) if rad >= 0.0 else math.nan


def equilibrium_separation(m: float) -> float:
    """Stationary separation on (pi, 2pi); exists only for 9m - 1 > 0."""
    if 9.0 * m - 1.0 <= _NINTH_TOL:
        raise ValueError("no interior equilibrium for 9m - 1 <= 0")
    return 2.0 * (math.pi - math.atan(math.sqrt((9.0 * m - 1.0) / (1.0 - m))))


def classify_trichotomy(m: float, h: float | None = None) -> TrichotomyReport:
    """Regime by sign of 9m - 1, plus the motion type on (pi, 2pi) at energy h."""
    if not 0.0 < m < 1.0:
        raise ValueError("mass fraction m must lie in (0, 1)")
    d = 9.0 * m - 1.0
    if abs(d) <= _NINTH_TOL:
        motion = None
        if h is not None:
            # -U_iso decreases to exactly 0 at the far end, so levels h >= 0
            # run out to it with finite velocity; below that nothing moves
            motion = "collision-antipodal" if h >= 0.0 else "forbidden"
        return TrichotomyReport(regime="m=1/9", motion=motion, h=h)
    if d < 0.0:
        motion = None if h is None else "collision-antipodal"
        return TrichotomyReport(regime="m<1/9", motion=motion,
                                velocity_blowup=h is not None, h=h)
    x1_eq = equilibrium_separation(m)
    h0 = -iso_potential(x1_eq, m)
    motion = None
    if h is not None:
        if h > h0:
            motion = "periodic"
        elif h == h0:
            motion = "equilibrium"
        else:
            motion = "forbidden"
    return TrichotomyReport(regime="m>1/9", x1_eq=x1_eq, h0=h0,
                            motion=motion, h=h)


def _tail_quadrature(m, h, x_end, toward):
    """Remaining physical time from x_end to the singular endpoint.

    toward = 0 integrates down to the total collision, toward = 2pi up to
    the collision-antipodal end. Also locates where |p1| passes 1e6; absence
    of such a point (finite terminal velocity) clears the blow-up flag.
    """
    mu1 = 0.25 * (1.0 - m)
    # probe as deep as doubles represent; near 2pi that is one ulp away
    target = (math.nextafter(2.0 * math.pi, 0.0) if toward > math.pi
              else 1e-30)

    def speed(x):
        p = _momentum(x, m, h)
        return p if p == p and p > 0.0 else 1e-300

    t_tail = quad(lambda x: mu1 / speed(x), min(x_end, target),
                  max(x_end, target), limit=200)[0]

    x_blow = None
    g = lambda x: speed(x) - _P_BLOWUP
    if g(x_end) < 0.0 < g(target):
        x_blow = brentq(g, min(x_end, target), max(x_end, target),
                        xtol=1e-14)
    blow = g(target) > 0.0
    t_blow = None
    if x_blow is not None:
        t_blow = quad(lambda x: mu1 / speed(x), min(x_end, x_blow),
                      max(x_end, x_blow), limit=200)[0]
    return t_tail, blow, t_blow


def integrate_iso(s0: IsoscelesState, m: float, duration: float,
                  rel_tol: float = 1e-11, abs_tol: float = 1e-13) -> IsoTrajectory:
    """Run the 1-DOF flow and diagnose how it ends.

    Diagnoses: "triple-collision" (reached the x1 = 0 margin),
    "collision-antipodal" (the x1 = 2pi margin), "periodic" (two or more
    turning points, no margin hit), "equilibrium" (never left the start),
    "duration". A step-controller failure near a margin is folded into the
    corresponding collision diagnosis; elsewhere it raises.
    """
    _check_interval(s0.x1)
    h = iso_energy(s0, m)
    mu1 = 0.25 * (1.0 - m)

    # stage points of a long step may poke past a wall before the terminal
    # margin event gets a chance to cut the step; clamping keeps those
    # evaluations defined (the huge clamped slope then rejects the step)
    lo, hi = 1e-12, 2.0 * math.pi - 1e-12

    def rhs(t, y):
        x = min(max(y[0], lo), hi)
        if abs(x - math.pi) < 1e-12:
            x = math.pi + math.copysign(1e-12, x - math.pi)
        return [y[1] / mu1, iso_potential_slope(x, m)]

    def low_edge(t, y):
        return y[0] - _EDGE

    def high_edge(t, y):
        return y[0] - (2.0 * math.pi - _EDGE)

    def turning(t, y):
        return y[1]

    def runaway(t, y):
        return abs(y[1]) - _P_BLOWUP

    low_edge.terminal, low_edge.direction = True, -1
    high_edge.terminal, high_edge.direction = True, +1
    turning.terminal = False
    runaway.terminal, runaway.direction = True, +1

    sol = solve_ivp(rhs, (0.0, duration), [s0.x1, s0.p1], method="DOP853",
                    rtol=rel_tol, atol=abs_tol, dense_output=True,
                    events=(low_edge, high_edge, turning, runaway))
    t = sol.t
    states = sol.y.T
    turning_times = [float(v) for v in sol.t_events[2]]

    traj = IsoTrajectory(t=t, states=states, diagnosis="duration", h=h,
                         turning_times=turning_times, _sol=sol)
    x_end = states[-1, 0]

    hit_low = sol.status == 1 and len(sol.t_events[0]) > 0
    hit_high = sol.status == 1 and len(sol.t_events[1]) > 0
    hit_runaway = sol.status == 1 and len(sol.t_events[3]) > 0
    if sol.status == -1:
        # the controller died heading into an endpoint; attribute it
        if x_end < _EDGE * 2.0:
            hit_low = True
        elif x_end > 2.0 * math.pi - _EDGE * 2.0:
            hit_high = True
        else:
            raise RuntimeError(f"integration failed at x1 = {x_end}: "
                               f"{sol.message}")

    if hit_low or hit_high or hit_runaway:
        toward = 0.0 if (hit_low or x_end < math.pi) else 2.0 * math.pi
        traj.diagnosis = ("triple-collision" if toward == 0.0
                          else "collision-antipodal")
        t_tail, blow, t_blow = _tail_quadrature(m, h, x_end, toward)
        traj.velocity_blowup = blow
        traj.t_singularity = float(t[-1]) + t_tail
        if hit_runaway:
            traj.velocity_blowup = True
            traj.t_blowup = float(t[-1])
        elif t_blow is not None:
            traj.t_blowup = float(t[-1]) + t_blow
        return traj

    # stationarity first: a resting point generates spurious p1 = 0
    # crossings at rounding level that would read as turning points
    if (np.max(np.abs(states[:, 0] - s0.x1)) < 1e-8
            and np.max(np.abs(states[:, 1])) < 1e-10):
        traj.diagnosis = "equilibrium"
    elif len(turning_times) >= 2:
        traj.diagnosis = "periodic"
    return traj
