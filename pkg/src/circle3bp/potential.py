"""Cotangent potential on the shape triangle and every scalar field built from it.

The potential of three bodies on the circle with mutual arc distances d_ij is

    U = n^2 cot(d12) + mn cot(d13) + mn cot(d23),

with masses (n, n, m). In the blown-up polar chart the distances along a
region-I ray are rho = r A1 cos(theta), xi = r A2 sin(theta* - theta),
eta = r A2 sin(theta* + theta), and the dynamics only ever needs the three
combinations rU, rU_theta and r^2 U_r. All of them stay finite as r -> 0,
which is what makes {r = 0} an invariant collision manifold; the limits are
obtained here by writing every cot through x*cot(x) (series below 1e-2,
direct above) so that r = 0 evaluates exactly, never by extrapolation.

Two charts are exposed:

  * eval_fields / eval_fields_theta: the plain fields. Singular at double
    collisions with r > 0 (a side distance vanishes) and at antipodal
    configurations (a distance reaches pi).
  * scaled_terms: the combinations rU cos^2 u, (2rU + r^2 U_r) cos^2 u and
    rU_theta cos^4 u appearing in the regularized vector field. These are
    finite at u = pi/2 (the double collision); the cancellation
    cos^2 u / sin(theta*(1 - sin u)) is resolved through
    1 - sin u = cos^2 u / (1 + sin u), see invDm/invDp below.

Zero-velocity curves U = -h are extracted by marching squares over a
region-masked grid with one bisection refinement per crossing edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from skimage import measure

from .model import MassContext

TWO_PI = 2.0 * math.pi


class Singular(ValueError):
    """Evaluation at a collision, antipodal, or collision-antipodal point."""


_SERIES_CUT = 1e-2

# x*cot(x) = 1 - x^2/3 - x^4/45 - 2x^6/945 - x^8/4725 - 2x^10/93555 - ...
_XCOT_C = (-1.0 / 3.0, -1.0 / 45.0, -2.0 / 945.0, -1.0 / 4725.0,
           -2.0 / 93555.0)

# f(x) - 1/x for f(x) = 2cot(x) - x/sin^2(x):
# -x - x^3/9 - 2x^5/135 - x^7/525 - 2x^9/8505 - ...
_FR_C = (-1.0, -1.0 / 9.0, -2.0 / 135.0, -1.0 / 525.0, -2.0 / 8505.0)


def _xcot(x: float) -> float:
    """x * cot(x), exact 1 at x = 0."""
    if abs(x) < _SERIES_CUT:
        x2 = x * x
        acc = 0.0
        for c in reversed(_XCOT_C):
            acc = (acc + c) * x2
        return 1.0 + acc
    return x * math.cos(x) / math.sin(x)


def _fr(x: float) -> float:
    """f(x) - 1/x where f(x) = 2cot(x) - x/sin^2(x); odd, ~ -x near 0."""
    if abs(x) < _SERIES_CUT:
        x2 = x * x
        acc = 0.0
        for c in reversed(_FR_C):
            acc = acc * x2 + c
        return acc * x
    sx = math.sin(x)
    return 2.0 * math.cos(x) / sx - x / (sx * sx) - 1.0 / x


def _xosin(x: float) -> float:
    """x / sin(x); no cancellation, only the x = 0 limit needs filling."""
    return 1.0 if x == 0.0 else x / math.sin(x)


def _sinc(x: float) -> float:
    return 1.0 if x == 0.0 else math.sin(x) / x


@dataclass(frozen=True)
class PotentialSample:
    """The three plain fields at one point; all even functions of r."""
    rU: float
    rU_theta: float
    r2U_r: float
    valid: bool = True


def _fields_core(r: float, ct: float, st: float, dm: float, dp: float,
                 ctx: MassContext) -> PotentialSample:
    """Shared body for both plain charts.

    ct, st = cos/sin of theta; dm, dp = theta* -+ theta, supplied by the
    caller so the u-chart can form them without cancellation.
    """
    sdm = math.sin(dm)
    sdp = math.sin(dp)
    rho = r * ctx.A1 * ct
    xi = r * ctx.A2 * sdm
    eta = r * ctx.A2 * sdp
    if max(abs(rho), abs(xi), abs(eta)) >= math.pi - 1e-12:
        raise Singular("antipodal configuration")
    if min(abs(dm), abs(dp)) < 1e-25 or (r != 0.0 and sdm * sdp == 0.0):
        raise Singular("collision-antipodal limit on r = 0" if r == 0.0
                       else "double collision with r > 0")

    n2 = ctx.n * ctx.n
    mn = ctx.m * ctx.n
    den1 = ctx.A1 * ct
    denm = ctx.A2 * sdm
    denp = ctx.A2 * sdp

    rU = n2 * _xcot(rho) / den1 + mn * (_xcot(xi) / denm + _xcot(eta) / denp)

    o1 = _xosin(rho) ** 2
    om = _xosin(xi) ** 2
    op = _xosin(eta) ** 2
    r2U_r = -n2 * o1 / den1 - mn * (om / denm + op / denp)

    rU_theta = (n2 * st * o1 / (ctx.A1 * ct * ct)
                + mn * (math.cos(dm) * om / (ctx.A2 * sdm * sdm)
                        - math.cos(dp) * op / (ctx.A2 * sdp * sdp)))
    return PotentialSample(rU=rU, rU_theta=rU_theta, r2U_r=r2U_r)


def eval_fields_theta(r: float, theta: float, ctx: MassContext) -> PotentialSample:
    """Plain fields in the (r, theta) chart, |theta| <= theta_star.

    r = 0 returns the exact collision-manifold limits; r may be negative
    (the fields are even in r, used by finite differencing). Near
    theta = +-theta* the subtraction theta* - theta is inherently lossy in
    this chart; prefer eval_fields(u) there.
    """
    ts = ctx.theta_star
    if abs(theta) > ts + 1e-14:
        raise Singular(f"|theta| = {abs(theta)} exceeds theta_star = {ts}")
    return _fields_core(r, math.cos(theta), math.sin(theta),
                        ts - theta, ts + theta, ctx)


def eval_fields(r: float, u: float, ctx: MassContext) -> PotentialSample:
    """Plain fields at the regularized shape variable u (theta = theta* sin u).

    theta* - theta = theta*(1 - sin u) is formed through
    1 - sin u = cos^2 u/(1 + sin u), so evaluations arbitrarily close to the
    double collision u = pi/2 keep full precision.
    """
    ts = ctx.theta_star
    s = math.sin(u)
    c = math.cos(u)
    c2 = c * c
    if s > 0.5:
        q = 1.0 + s
        p = c2 / q
    elif s < -0.5:
        p = 1.0 - s
        q = c2 / p
    else:
        p = 1.0 - s
        q = 1.0 + s
    theta = ts * s
    return _fields_core(r, math.cos(theta), math.sin(theta),
                        ts * p, ts * q, ctx)


def scaled_terms(r: float, u: float, ctx: MassContext) -> tuple[float, float, float]:
    """(rU cos^2 u, (2rU + r^2 U_r) cos^2 u, rU_theta cos^4 u), stable everywhere.

    This is the hot path of the regularized vector field. The identity
    2rU + r^2 U_r = n^2 r f(rho) + mn r (f(xi) + f(eta)) with
    f(x) = 2cot(x) - x/sin^2(x) = 1/x + fr(x) splits each term into the
    1/distance part (absorbed into invDm/invDp, finite at u = pi/2) and a
    smooth remainder fr. At u = pi/2 the values tend to r-independent
    limits, reached here without taking limits:

        rU cos^2 u -> 2mn/(A2 theta*),
        (2rU + r^2 U_r) cos^2 u -> 2mn/(A2 theta*),
        rU_theta cos^4 u -> 4mn/(A2 theta*^2).
    """
    ts = ctx.theta_star
    s = math.sin(u)
    c = math.cos(u)
    c2 = c * c
    # p = 1 - sin u, q = 1 + sin u without cancellation
    if s > 0.5:
        q = 1.0 + s
        p = c2 / q
    elif s < -0.5:
        p = 1.0 - s
        q = c2 / p
    else:
        p = 1.0 - s
        q = 1.0 + s
    theta = ts * s
    ct = math.cos(theta)
    st = math.sin(theta)
    zm = ts * p                      # theta* - theta
    zp = ts * q                      # theta* + theta
    rho = r * ctx.A1 * ct
    xi = r * ctx.A2 * math.sin(zm)
    eta = r * ctx.A2 * math.sin(zp)
    if max(abs(rho), abs(xi), abs(eta)) >= math.pi - 1e-12:
        raise Singular("antipodal configuration")

    # invDm = cos^2 u / sin(theta* - theta), finite 2/theta* at u = pi/2
    invDm = q / (ts * _sinc(zm))
    invDp = p / (ts * _sinc(zp))

    n2 = ctx.n * ctx.n
    mn = ctx.m * ctx.n
    ax = c2 / (ctx.A1 * ct)
    g0 = n2 * _xcot(rho) * ax + (mn / ctx.A2) * (_xcot(xi) * invDm
                                                 + _xcot(eta) * invDp)
    g2 = (n2 * ax + (mn / ctx.A2) * (invDm + invDp)
          + r * c2 * (n2 * _fr(rho) + mn * (_fr(xi) + _fr(eta))))
    g4 = (n2 * st * c2 * c2 / (ctx.A1 * ct * ct * _sinc(rho) ** 2)
          + (mn / ctx.A2) * (math.cos(zm) * invDm * invDm / _sinc(xi) ** 2
                             - math.cos(zp) * invDp * invDp / _sinc(eta) ** 2))
    return g0, g2, g4


def collision_manifold_rU_cos2u(u: float, ctx: MassContext) -> float:
    """rU cos^2 u restricted to r = 0; removable singularity at u = pi/2 filled."""
    return scaled_terms(0.0, u, ctx)[0]


def F(r: float, u: float, ctx: MassContext, h: float = -1.0) -> float:
    """2rU + r^2 U_r + 2rh: the sign field controlling exits through nu = 0.

    h may be an EnergyLevel or a plain float. Singular at u = pi/2 (mod pi)
    for r > 0; use scaled_terms for the cos^2 u-regularized version.
    """
    hval = getattr(h, "h", h)
    sample = eval_fields(r, u, ctx)
    return 2.0 * sample.rU + sample.r2U_r + 2.0 * r * hval


def f_aux(x: float) -> float:
    """f(x) = 2cot(x) - x/sin^2(x) on (0, pi/5] (monotonicity domain)."""
    _check_f_domain(x)
    return 1.0 / x + _fr(x)


def f_aux_prime(x: float) -> float:
    """f'(x) = -(3 - 2x cot x)/sin^2 x; strictly negative on the domain."""
    _check_f_domain(x)
    sx = math.sin(x)
    return -(3.0 - 2.0 * _xcot(x)) / (sx * sx)


def f_aux_second(x: float) -> float:
    """f''(x) = (2/sin^4 x)(2 sin 2x - 2x - x cos 2x); nonnegative on the domain."""
    _check_f_domain(x)
    sx = math.sin(x)
    return 2.0 * (2.0 * math.sin(2.0 * x) - 2.0 * x - x * math.cos(2.0 * x)) / sx ** 4


def k_aux(x: float) -> float:
    """k(x) = 2 sin 2x - 3x, nonnegative on [0, pi/5]; feeds the f'' bound."""
    return 2.0 * math.sin(2.0 * x) - 3.0 * x


def _check_f_domain(x: float) -> None:
    if not 0.0 < x <= math.pi / 5.0 + 1e-15:
        raise ValueError(f"f_aux domain is (0, pi/5], got {x}")


def shape_inequality(theta_star: float, u: float) -> float:
    """cos^2 th - cos^2 th* - (1 - cos^2 th*) cos^2 u cos th at th = th* sin u.

    Nonnegative for 0 < theta* <= pi/4; vanishes at u = 0 and u = pi/2.
    """
    th = theta_star * math.sin(u)
    cth = math.cos(th)
    cts = math.cos(theta_star)
    cu = math.cos(u)
    return cth * cth - cts * cts - (1.0 - cts * cts) * cu * cu * cth


def potential_value(x1, x2, ctx: MassContext):
    """U at Jacobi points; numpy-broadcasting, +-inf at collisions/antipodes."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    e = (x1, 0.5 * x1 + x2, 0.5 * x1 - x2)
    mass = (ctx.n * ctx.n, ctx.m * ctx.n, ctx.m * ctx.n)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = sum(w / np.tan(np.minimum(ei, TWO_PI - ei))
                  for w, ei in zip(mass, e))
    return out


@dataclass(frozen=True)
class ContourPolyline:
    """One ordered zero-velocity polyline; every vertex has |U + h| <= tol."""
    points: np.ndarray          # shape (N, 2), columns x1, x2
    region: str
    h: float

    def __len__(self) -> int:
        return len(self.points)


def _region_chart(region: str):
    """Map the unit square (sigma, beta) onto one region triangle.

    sigma sweeps x1, beta sweeps the cross-section; every singular side of
    the triangle is a square edge, so edge-clustered grids resolve the cot
    tails there. One square edge collapses onto the triangle vertex.
    """
    pi = math.pi
    if region == "I":
        # vertices (0,0) -- (pi, +-pi/2); collapses at the total collision
        def chart(S, B):
            x1 = pi * S
            return x1, x1 * (B - 0.5)
    elif region == "II":
        def chart(S, B):
            x1 = pi * (1.0 + S)
            return x1, (pi - 0.5 * x1) * (2.0 * B - 1.0)
    elif region == "III":
        def chart(S, B):
            x1 = pi * (1.0 + S)
            return x1, (pi - 0.5 * x1) + B * (x1 - pi)
    elif region == "IV":
        def chart(S, B):
            x1 = pi * (1.0 + S)
            return x1, -((pi - 0.5 * x1) + B * (x1 - pi))
    else:
        raise ValueError(f"unknown region {region!r}")
    return chart


def zero_velocity_curve(ctx: MassContext, h: float, region: str = "I",
                        grid: int = 512, tol: float = 1e-8) -> list[ContourPolyline]:
    """Marching-squares extraction of U = -h inside one region.

    Returns [] when the level set misses the region. The march runs on the
    arctan-compressed field over a chart grid with cosine clustering toward
    the singular sides; each vertex sits on a grid edge (a straight segment
    in the plane) and is refined by bisection along it until |U + h| <= tol.
    """
    chart = _region_chart(region)
    w = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, grid)))
    Sg, Bg = np.meshgrid(w, w, indexing="ij")
    X1, X2 = chart(Sg, Bg)
    vals = potential_value(X1, X2, ctx)
    vals = np.where(np.isfinite(vals), vals, np.nan)
    polylines = []
    for raw in measure.find_contours(np.arctan(vals), level=math.atan(-h)):
        pts = _refine_contour(raw, X1, X2, vals, ctx, h, tol)
        if len(pts) >= 2:
            polylines.append(ContourPolyline(points=pts, region=region, h=h))
    polylines.sort(key=lambda p: (-len(p.points),
                                  p.points[0, 0], p.points[0, 1]))
    return polylines


def _refine_contour(raw, X1, X2, vals, ctx, h, tol):
    """Bisect each marching-squares vertex along its (mapped) grid edge."""
    i = raw[:, 0]
    j = raw[:, 1]
    i0 = np.floor(i).astype(int)
    j0 = np.floor(j).astype(int)
    fi = i - i0
    fj = j - j0
    vary_i = fi > 1e-9
    on_node = (fi <= 1e-9) & (fj <= 1e-9)
    ib = np.where(vary_i, i0 + 1, i0)
    jb = np.where(vary_i, j0, np.where(on_node, j0, j0 + 1))

    pa = np.column_stack([X1[i0, j0], X2[i0, j0]])
    pb = np.column_stack([X1[ib, jb], X2[ib, jb]])
    ga = vals[i0, j0] + h
    gb = vals[ib, jb] + h
    t = np.where(vary_i, fi, fj)
    ok = (np.sign(ga) != np.sign(gb)) & np.isfinite(ga) & np.isfinite(gb) \
        & ~on_node

    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    glo = ga.copy()
    tm = t.copy()
    for _ in range(60):
        tm = 0.5 * (lo + hi)
        mx1 = pa[:, 0] + tm * (pb[:, 0] - pa[:, 0])
        mx2 = pa[:, 1] + tm * (pb[:, 1] - pa[:, 1])
        gm = potential_value(mx1, mx2, ctx) + h
        if np.all(~ok | (np.abs(gm) <= tol)):
            break
        take_lo = np.sign(gm) == np.sign(glo)
        lo = np.where(take_lo, tm, lo)
        glo = np.where(take_lo, gm, glo)
        hi = np.where(take_lo, hi, tm)
    t = np.where(ok, tm, t)
    pts = pa + t[:, None] * (pb - pa)
    # near collision-antipodal corners |grad U| can exceed what double
    # precision positions resolve; drop the few vertices that cannot meet
    # the tolerance so the polyline invariant holds for every vertex kept
    gfin = potential_value(pts[:, 0], pts[:, 1], ctx) + h
    pts = pts[np.abs(gfin) <= tol]
    if len(pts) == 0:
        return pts
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.max(np.abs(np.diff(pts, axis=0)), axis=1) > 1e-13
    return pts[keep]


_MID_SEGMENTS = (
    # (start, end) in (x1, x2); endpoints are collision-antipodal points
    ((math.pi, -0.5 * math.pi), (math.pi, 0.5 * math.pi)),
    ((math.pi, 0.5 * math.pi), (TWO_PI, 0.0)),      # e2 = pi
    ((math.pi, -0.5 * math.pi), (TWO_PI, 0.0)),     # e3 = pi
)


def repelling_strip_max(ctx: MassContext, delta: float = 1e-6,
                        samples: int = 256) -> float:
    """max U over thin strips flanking the three antipodal mid-segments.

    Strips sit at perpendicular-ish offset delta on both sides, with 10%
    margins to stay clear of the collision-antipodal endpoints. The Hill
    region excludes the strips for every h with max U < -|h|.
    """
    t = np.linspace(0.1, 0.9, samples)
    worst = -math.inf
    for (a1, a2), (b1, b2) in _MID_SEGMENTS:
        x1 = a1 + (b1 - a1) * t
        x2 = a2 + (b2 - a2) * t
        if a1 == b1:                      # vertical segment x1 = pi
            offs = ((x1 - delta, x2), (x1 + delta, x2))
        else:                             # slanted segments: offset in x2
            offs = ((x1, x2 - delta), (x1, x2 + delta))
        for ox1, ox2 in offs:
            worst = max(worst, float(np.max(potential_value(ox1, ox2, ctx))))
    return worst
