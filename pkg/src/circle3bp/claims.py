"""Inequality suite behind the trapping-block argument, as checkable numerics.

Each verifier turns one structural fact about the potential into a grid
check with an explicit worst-case margin:

  1. parity: rU and r^2 U_r even in theta, rU_theta odd in theta and even
     in r, and -r^2 U_r -> rU at the triple collision at rate r^2;
  2. rU_thetatheta(0, 0) > 0, closed form against Richardson differences;
  3. the collision-manifold profile 2 rU cos^2 u peaks at u = 0, via the
     nonnegativity of cos^2 th - cos^2 th* - (1 - cos^2 th*) cos^2 u cos th;
  4. 2 rU cos^2 u has a positive r-independent limit at the double
     collision edge u = pi/2;
  5. rU_theta cos^4 u / sin u is bounded below away from u = 0, with the
     edge limit 4mn/(A2 theta*^2) and the positivity of the two-center
     difference g(r, theta);
  6. F = 2rU + r^2 U_r + 2rh has F_u > 0 off the axis, so the F = 0 curve
     is a graph from its axis end A to its rim end B.

Strict inequalities pass when the margin clears 1e-10 after doubling the
grid once; identities are held to 1e-12. Every result records where the
worst margin occurred so a failure is reproducible by evaluation at a
point. Limits that a derivation fixes in closed form are recorded next to
their measured values rather than asserted, when the two disagree the
measured value wins (see claim 4's stated-vs-measured constant).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .model import MassContext
from .potential import (
    collision_manifold_rU_cos2u,
    eval_fields_theta,
    f_aux_prime,
    f_aux_second,
    scaled_terms,
    shape_inequality,
)
from .wazewski import curve_F_endpoints, r_cap

_STRICT = 1e-10   # margin floor for strict inequalities
_ZERO = 1e-12     # tolerance for exact identities


@dataclass(frozen=True)
class ClaimResult:
    name: str
    status: str               # "pass" | "fail" | "indeterminate"
    margin: float             # worst margin over the grid (sign carries verdict)
    worst_at: tuple | None
    details: dict


@dataclass(frozen=True)
class ClaimReport:
    m: float
    grid: int
    claims: tuple[ClaimResult, ...]
    constants: dict

    @property
    def all_pass(self) -> bool:
        return all(c.status == "pass" for c in self.claims)

    def claim(self, name: str) -> ClaimResult:
        for c in self.claims:
            if c.name == name:
                return c
        raise KeyError(name)


def _verdict(margin: float, tol: float = _STRICT) -> str:
    if margin >= tol:
        return "pass"
    return "fail" if margin < 0.0 else "indeterminate"


def verify_claim1(ctx: MassContext, grid: int = 41) -> ClaimResult:
    """Parity of the weighted fields and the triple-collision limit rate."""
    cap = ctx.r_star
    rs = np.linspace(0.0, cap, grid)
    # stop short of theta = theta_star: the plain fields are genuinely
    # singular on the double-collision rim (and at Q when r = 0)
    ths = np.linspace(0.0, ctx.theta_star * (1.0 - 1e-9), grid)
    worst = 0.0
    where = None
    for r in rs:
        for th in ths:
            a = eval_fields_theta(r, th, ctx)
            b = eval_fields_theta(r, -th, ctx)
            c = eval_fields_theta(-r, th, ctx)
            res = max(abs(a.rU - b.rU), abs(a.r2U_r - b.r2U_r),
                      abs(a.rU_theta + b.rU_theta),
                      abs(a.rU_theta - c.rU_theta))
            if res > worst:
                worst, where = res, (float(r), float(th))
    axis = max(abs(eval_fields_theta(r, 0.0, ctx).rU_theta)
               for r in rs[1:])

    # -r^2 U_r approaches rU quadratically at the triple collision
    th_probe = ctx.theta_star * math.sin(0.7)
    errs = []
    for r in (1e-3, 1e-4, 1e-5):
        s = eval_fields_theta(r, th_probe, ctx)
        errs.append(abs(-s.r2U_r - s.rU))
    rates = [errs[0] / errs[1], errs[1] / errs[2]]
    rate_ok = all(30.0 < q < 300.0 for q in rates)

    ok = worst <= _ZERO and axis <= _ZERO and errs[1] <= 1e-7 and rate_ok
    return ClaimResult(
        name="claim1", status="pass" if ok else "fail",
        margin=_ZERO - max(worst, axis), worst_at=where,
        details={"parity_residual": worst, "axis_rU_theta": axis,
                 "limit_errors": errs, "limit_rates": rates})


def _rU_thth_closed(ctx: MassContext) -> float:
    ts = ctx.theta_star
    return (ctx.n ** 2 / ctx.A1
            + (ctx.m * ctx.n / ctx.A2) * 2.0 * (1.0 + math.cos(ts) ** 2)
            / math.sin(ts) ** 3)


def _rU_thth_richardson(ctx: MassContext, d: float = 1e-3) -> float:
    def second(step):
        a = eval_fields_theta(0.0, step, ctx).rU
        b = eval_fields_theta(0.0, 0.0, ctx).rU
        c = eval_fields_theta(0.0, -step, ctx).rU
        return (a - 2.0 * b + c) / (step * step)
    return (4.0 * second(0.5 * d) - second(d)) / 3.0


def verify_claim2(ctx: MassContext) -> ClaimResult:
    """Convexity of the collision-manifold potential in the shape angle."""
    closed = _rU_thth_closed(ctx)
    fd = _rU_thth_richardson(ctx)
    agree = abs(closed - fd)
    ok = closed > _STRICT and agree <= 1e-8 * max(1.0, abs(closed))
    return ClaimResult(
        name="claim2", status="pass" if ok else "fail",
        margin=closed, worst_at=None,
        details={"closed_form": closed, "richardson": fd, "agreement": agree,
                 "first_term_per_n2": 1.0 / ctx.A1})


def verify_claim3(ctx: MassContext, grid: int = 201) -> ClaimResult:
    """2 rU cos^2 u on r = 0 peaks at the isosceles configuration u = 0."""
    us = np.linspace(0.0, 0.5 * math.pi, grid)
    prof = np.array([2.0 * collision_manifold_rU_cos2u(u, ctx) for u in us])
    peak = prof[0]
    if int(np.argmax(prof)) != 0:
        return ClaimResult("claim3", "fail", float(peak - prof.max()),
                           (float(us[np.argmax(prof)]),),
                           {"profile_peak_at": float(us[np.argmax(prof)])})
    margin = float(peak - prof[us >= 0.1].max())

    # the inequality driving the monotonicity, over its full triangle
    jmin = math.inf
    jat = None
    for tstar in np.linspace(0.01, 0.25 * math.pi, 60):
        for u in np.linspace(0.0, 0.5 * math.pi, 60):
            v = shape_inequality(tstar, u)
            if v < jmin:
                jmin, jat = v, (float(tstar), float(u))
    corner = abs(shape_inequality(ctx.theta_star, 0.5 * math.pi))
    # partial derivative in theta*, as stated: 2 s c (1 - cos^2 u cos th) >= 0
    dmin = min(
        2.0 * math.sin(t) * math.cos(t)
        * (1.0 - math.cos(u) ** 2 * math.cos(t * math.sin(u)))
        for t in np.linspace(0.01, 0.25 * math.pi, 40)
        for u in np.linspace(0.0, 0.5 * math.pi, 40))

    ok = margin >= _STRICT and jmin >= -_ZERO and corner <= _ZERO and dmin >= -_ZERO
    return ClaimResult(
        name="claim3", status="pass" if ok else "fail",
        margin=margin, worst_at=jat,
        details={"peak": float(peak), "margin_u_ge_0.1": margin,
                 "shape_inequality_min": float(jmin), "corner": corner,
                 "partial_min": float(dmin)})


def verify_claim4(ctx: MassContext) -> ClaimResult:
    """Positive r-independent limit of 2 rU cos^2 u at the collision edge."""
    cap = ctx.r_star
    limits = [2.0 * scaled_terms(r, 0.5 * math.pi, ctx)[0]
              for r in (1e-3, 0.1 * cap, 0.5 * cap, cap)]
    measured = limits[0]
    spread = max(limits) - min(limits)
    # convergence from below the edge
    near = 2.0 * scaled_terms(0.5 * cap, 0.5 * math.pi - 1e-3, ctx)[0]
    conv = abs(near - measured) / measured
    stated = ctx.m * ctx.n / (2.0 * ctx.theta_star * ctx.A2)
    ok = measured > _STRICT and spread <= 1e-8 and conv <= 0.01
    return ClaimResult(
        name="claim4", status="pass" if ok else "fail",
        margin=measured, worst_at=None,
        details={"measured_limit": measured, "r_spread": spread,
                 "convergence_at_1e-3": conv,
                 "stated_limit": stated,
                 "measured_over_stated": measured / (2.0 * stated)})


def verify_claim5(ctx: MassContext, u0: float = 0.05,
                  grid: int = 96) -> ClaimResult:
    """Lower bound for rU_theta cos^4 u / sin u away from the axis."""
    cap = ctx.r_star
    best = math.inf
    where = None
    for r in np.linspace(0.0, cap, grid):
        for u in np.linspace(u0, 0.5 * math.pi, grid):
            v = scaled_terms(r, u, ctx)[2] / math.sin(u)
            if v < best:
                best, where = v, (float(r), float(u))

    # the edge limit of the double-collision term, measured one step in
    formula = 4.0 * ctx.m * ctx.n / (ctx.A2 * ctx.theta_star ** 2)
    r_probe = 0.5 * cap
    d = 1e-4
    u = 0.5 * math.pi - d
    th = ctx.theta_star * math.sin(u)
    xi = r_probe * ctx.A2 * math.sin(ctx.theta_star - th)
    second = (ctx.m * ctx.n * r_probe ** 2 * ctx.A2
              * math.cos(ctx.theta_star - th) / math.sin(xi) ** 2
              * math.cos(u) ** 4 / math.sin(u))
    limit_err = abs(second - formula) / formula

    # positivity of the two-center difference g under the pi/5 bound
    gmin = math.inf
    seen_interior = -math.inf
    for r in np.linspace(cap * 1e-3, cap, grid // 2):
        for th in np.linspace(0.0, ctx.theta_star * (1.0 - 1e-9), grid // 2):
            g = _g_two_center(r, th, ctx)
            gmin = min(gmin, g if th > 0.0 else math.inf)
            if abs(th - 0.5 * ctx.theta_star) < 1e-2:
                seen_interior = max(seen_interior, g)
    g_axis = max(abs(_g_two_center(r, 0.0, ctx))
                 for r in np.linspace(cap * 1e-3, cap, 7))
    bound = cap * ctx.A2 * math.sin(2.0 * ctx.theta_star)

    ok = (best >= _STRICT and limit_err <= 1e-6 and gmin > 0.0
          and g_axis <= _ZERO and bound < math.pi / 5.0)
    return ClaimResult(
        name="claim5", status="pass" if ok else "fail",
        margin=best, worst_at=where,
        details={"min_unscaled": best,
                 "min_scaled": ctx.theta_star * best,
                 "edge_limit_formula": formula,
                 "edge_limit_measured": second,
                 "edge_limit_rel_err": limit_err,
                 "g_min": gmin, "g_axis": g_axis,
                 "g_interior_sample": seen_interior,
                 "pi5_bound": bound})


def _g_two_center(r: float, th: float, ctx: MassContext) -> float:
    """mn r^2 A2 [cos(th*-th)/sin^2(r A2 sin(th*-th)) - cos(th*+th)/sin^2(...)]."""
    ts = ctx.theta_star
    a2 = ctx.A2
    dm = r * a2 * math.sin(ts - th)
    dp = r * a2 * math.sin(ts + th)
    return (ctx.m * ctx.n * r * r * a2
            * (math.cos(ts - th) / math.sin(dm) ** 2
               - math.cos(ts + th) / math.sin(dp) ** 2))


def _F_scaled(r: float, u: float, ctx: MassContext, h: float) -> float:
    c = math.cos(u)
    return scaled_terms(r, u, ctx)[1] / (c * c) + 2.0 * r * h


def verify_claim6(ctx: MassContext, grid: int = 41,
                  h: float = -1.0) -> ClaimResult:
    """F increases off the axis, making its zero set a graph from A to B."""
    cap = r_cap(ctx, h)
    d = 1e-5
    worst = math.inf
    where = None
    for r in np.linspace(0.0, cap, grid):
        for u in np.linspace(0.05, 0.5 * math.pi, grid):
            fu = (_F_scaled(r, u + d, ctx, h)
                  - _F_scaled(r, u - d, ctx, h)) / (2.0 * d)
            if fu < worst:
                worst, where = fu, (float(r), float(u))

    r_a, u_b = curve_F_endpoints(ctx, h)
    fu_a = (_F_scaled(r_a, d, ctx, h) - _F_scaled(r_a, -d, ctx, h)) / (2.0 * d)
    d2 = 1e-3
    fuu_a = (_F_scaled(r_a, d2, ctx, h) - 2.0 * _F_scaled(r_a, 0.0, ctx, h)
             + _F_scaled(r_a, -d2, ctx, h)) / (d2 * d2)

    # continuation of F = 0 from the axis end to the rim end
    us = np.linspace(0.0, u_b, 60)
    curve = [r_a]
    fmax = 0.0
    for u in us[1:]:
        prev = curve[-1]
        lo = prev
        # the rim endpoint sits exactly on r = r_cap, so the bracket must be
        # allowed to overshoot the Hill radius slightly (F stays regular there)
        hi = min(prev + 0.2 * cap, 1.05 * cap)
        flo = _F_scaled(lo, u, ctx, h)
        if flo < 0.0:
            lo, hi = max(prev - 0.05 * cap, 1e-9), prev
        root = brentq(lambda rr: _F_scaled(rr, u, ctx, h), lo, hi, xtol=1e-13)
        fmax = max(fmax, abs(_F_scaled(root, u, ctx, h)))
        curve.append(root)
    monotone = all(b >= a - 1e-12 for a, b in zip(curve, curve[1:]))
    hits_b = abs(curve[-1] - cap) <= 1e-6

    # convexity package for f and the argument bounds feeding it
    xs = np.linspace(1e-4, math.pi / 5.0, 200)
    fp_max = max(f_aux_prime(x) for x in xs)
    fs_min = min(f_aux_second(x) for x in xs)
    dmax = 0.0
    for r in np.linspace(0.0, cap, grid):
        for u in np.linspace(0.0, 0.5 * math.pi, grid):
            th = ctx.theta_star * math.sin(u)
            dmax = max(dmax,
                       r * ctx.A1 * math.cos(th),
                       r * ctx.A2 * math.sin(ctx.theta_star + th),
                       r * ctx.A2 * math.sin(ctx.theta_star - th))

    ok = (worst >= _STRICT and abs(fu_a) <= 1e-8 and fuu_a >= _STRICT
          and monotone and hits_b and fmax <= 1e-10
          and fp_max < 0.0 and fs_min >= -_ZERO and dmax < math.pi / 5.0)
    return ClaimResult(
        name="claim6", status="pass" if ok else "fail",
        margin=worst, worst_at=where,
        details={"Fu_min": worst, "Fu_at_A": fu_a, "Fuu_at_A": fuu_a,
                 "A": (r_a, 0.0), "B": (cap, u_b),
                 "curve_monotone": monotone, "curve_F_max": fmax,
                 "f_prime_max": fp_max, "f_second_min": fs_min,
                 "max_argument": dmax, "pi5": math.pi / 5.0})


def verify_all(ctx: MassContext, grid: int = 41, u0: float = 0.05,
               h: float = -1.0) -> ClaimReport:
    """Run the six verifiers and collect the shared empirical constants."""
    claims = (
        verify_claim1(ctx, grid),
        verify_claim2(ctx),
        verify_claim3(ctx, max(grid, 101)),
        verify_claim4(ctx),
        verify_claim5(ctx, u0=u0, grid=max(grid, 64)),
        verify_claim6(ctx, grid, h=h),
    )
    c4 = claims[3].details
    c5 = claims[4].details
    c6 = claims[5].details
    constants = {
        "rU_thetatheta_00": claims[1].details.get("closed_form"),
        "c2_sq_measured": c4["measured_limit"],
        "c2_sq_stated_doubled": 2.0 * c4["stated_limit"],
        "c3_unscaled": c5["min_unscaled"],
        "c3_scaled": c5["min_scaled"],
        "claim5_edge_limit": c5["edge_limit_formula"],
        "A": c6.get("A"),
        "B": c6.get("B"),
    }
    return ClaimReport(m=ctx.m, grid=grid, claims=claims, constants=constants)
