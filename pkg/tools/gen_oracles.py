"""Generate frozen oracle constants for the test suite.

Computes reference values with mpmath at 50 digits, independently of the
library code (no imports from the package). Prints a Python fragment that
is pasted into tests/_oracles.py. Series coefficients are cross-checked
against sympy expansions.

Run: python tools/gen_oracles.py
"""

import mpmath as mp
import sympy as sp

mp.mp.dps = 50


def derived(m):
    """All mass-derived constants for one value of m."""
    m = mp.mpf(m)
    n = (1 - m) / 2
    mu1 = n / 2
    mu2 = 2 * n * m
    A1 = mp.sqrt(2 / n)
    A2 = mp.sqrt((m + 1) / (2 * n * m))
    th = mp.atan(mp.sqrt(m))
    # nu0^2/2 = rU at r=0, theta=0
    rU0 = n**2 / A1 + 2 * m * n / (A2 * mp.sin(th))
    nu0 = mp.sqrt(2 * rU0)
    # positive root of (4mn+n^2) a^2 - 2a - n^2 = 0
    qa = 4 * m * n + n**2
    a = (2 + mp.sqrt(4 + 4 * qa * n**2)) / (2 * qa)
    rstar = (2 / A1) * mp.atan(1 / a)
    return dict(n=n, mu1=mu1, mu2=mu2, A1=A1, A2=A2, theta_star=th,
                nu0=nu0, a=a, r_star=rstar)


def rU_axis(r, m):
    """r*U on the axis theta=0 (region I)."""
    d = derived(m)
    r = mp.mpf(r)
    return (d["n"]**2 * r * mp.cot(r * d["A1"])
            + 2 * m * d["n"] * r * mp.cot(r * d["A1"] / 2))


def axis_crossing(m, h):
    """Radius where U(r, u=0) = -h (bisection; U decreasing in r)."""
    g = lambda r: rU_axis(r, m) / r + mp.mpf(h)
    lo, hi = mp.mpf("1e-8"), derived(m)["r_star"] * 2
    for _ in range(200):
        mid = (lo + hi) / 2
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def fmt(x, name):
    return '%s = %s' % (name, mp.nstr(x, 17))


def main():
    m3 = mp.mpf(1) / 3
    d = derived(m3)
    print("# Frozen oracle values, mpmath 50 dps. Regenerate: python tools/gen_oracles.py")
    for k in ("n", "mu1", "mu2", "A1", "A2", "theta_star", "nu0", "a", "r_star"):
        print(fmt(d[k], "M13_" + k.upper()))

    # cross-check r_star by direct root finding on U(r,0)=1
    rs2 = axis_crossing(m3, -1)
    print(fmt(rs2, "M13_R_STAR_ROOTFIND"))
    assert abs(rs2 - d["r_star"]) < mp.mpf("1e-40")

    print(fmt(d["r_star"] * d["A1"], "M13_ZVC_AXIS_X1"))
    print(fmt(axis_crossing(m3, -2), "M13_R_HILL_HM2"))
    print(fmt(rU_axis(mp.mpf("0.1"), m3), "M13_RU_AT_01"))
    print(fmt(mp.sqrt(2 * (rU_axis(mp.mpf("0.1"), m3) - mp.mpf("0.1"))),
              "M13_GAMMA_ENERGY_01"))

    n, A1, A2, th = d["n"], d["A1"], d["A2"], d["theta_star"]
    ruthth = n**2 / A1 + (m3 * n / A2) * 2 * (1 + mp.cos(th)**2) / mp.sin(th)**3
    print(fmt(ruthth, "M13_RU_THTH"))

    lam1 = -th * d["nu0"]
    b = th * d["nu0"] / 2
    disc = mp.sqrt(b**2 + 4 * th**2 * ruthth)
    lam2 = (b - disc) / 2
    lam3 = (b + disc) / 2
    print(fmt(lam1, "M13_LAMBDA1"))
    print(fmt(lam2, "M13_LAMBDA2"))
    print(fmt(lam3, "M13_LAMBDA3"))

    # u -> pi/2 limits on the collision side
    print(fmt(2 * m3 * n / (A2 * th), "M13_RU_COS2U_LIMIT"))       # lim rU cos^2 u
    print(fmt(4 * m3 * n / (A2 * th), "M13_C2SQ"))                 # lim 2 rU cos^2 u
    print(fmt(4 * m3 * n / (A2 * th**2), "M13_CLAIM5_TERM2_LIMIT"))
    print(fmt(m3 * n / (2 * th * A2), "M13_CLAIM4_STATED"))        # differs from measured

    x = mp.pi / 5
    f = 2 * mp.cot(x) - x / mp.sin(x)**2
    fp = -(3 - 2 * x * mp.cot(x)) / mp.sin(x)**2
    print(fmt(f, "F_AUX_PI5"))
    print(fmt(fp, "F_AUX_PRIME_PI5"))

    for mm, tag in ((mp.mpf("0.2"), "M02"), (mp.mpf("0.6"), "M06")):
        dd = derived(mm)
        print(fmt(dd["nu0"], tag + "_NU0"))
        print(fmt(dd["r_star"], tag + "_R_STAR"))
        print(fmt(axis_crossing(mm, -2), tag + "_R_HILL_HM2"))

    # isosceles equilibrium for m = 0.2 (critical point of -U on (pi, 2pi))
    mm = mp.mpf("0.2")
    x1eq = 2 * (mp.pi - mp.atan(mp.sqrt((9 * mm - 1) / (1 - mm))))
    pref = (1 - mm)**2 / 4
    uiso = pref * (-mp.cot(x1eq) + (4 * mm / (1 - mm)) * mp.cot(x1eq / 2))
    print(fmt(x1eq, "M02_X1_EQ"))
    print(fmt(-uiso, "M02_H0"))
    assert abs(x1eq - 3 * mp.pi / 2) < mp.mpf("1e-45")
    assert abs(-uiso - mp.mpf("0.16")) < mp.mpf("1e-45")

    # series checks (sympy): x*cot x and f(x) - 1/x
    xs = sp.symbols("x")
    ser = sp.series(xs * sp.cot(xs), xs, 0, 14).removeO()
    print("# x*cot x series:", sp.nsimplify(ser))
    fr = sp.series(2 * sp.cot(xs) - xs / sp.sin(xs)**2 - 1 / xs, xs, 0, 10).removeO()
    print("# f(x)-1/x series:", sp.nsimplify(fr))
    # truncation error of the 6-term x*cot x series at the 1e-2 seam
    x0 = mp.mpf("0.01")
    approx = 1 - x0**2/3 - x0**4/45 - 2*x0**6/945 - x0**8/4725 - 2*x0**10/93555
    print("# xcot 6-term error at 1e-2:", mp.nstr(abs(approx - x0 * mp.cot(x0)), 3))

    # estimate booleans across the mass grid
    bad = []
    for i in range(1, 20):
        mm = mp.mpf(i) / 20
        dd = derived(mm)
        lhs = mp.cot(dd["r_star"] * dd["A1"] / 2)
        ok = (lhs >= mp.mpf(7) / 2 and dd["r_star"] * dd["A1"] / 2 <= mp.pi / 10
              and dd["r_star"] * dd["A2"] * mp.sin(2 * dd["theta_star"]) < mp.pi / 5
              and -7*mm**4 + 20*mm**3 - 18*mm**2 + 4*mm + 17 >= 16)
        if not ok:
            bad.append(mm)
    print("# estimate failures on m grid:", bad)


if __name__ == "__main__":
    main()
