"""Exit criteria for the package, one numbered check per test.

Each test prints a single PASS/FAIL line (bypassing capture, so the lines
show up under a plain ``pytest -v`` run) and then asserts. The criteria
pin the tolerances the construction is expected to meet on a desktop;
wall-clock budgets are asserted where the criterion carries one.
"""

import math
import sys
import time

import numpy as np
import pytest

from circle3bp.coords import (
    AngularConfig,
    JacobiState,
    RegularizedState,
    angles_to_jacobi,
    jacobi_to_angles,
    jacobi_to_polar,
    polar_to_jacobi,
    polar_to_regularized,
    regularized_to_jacobi,
    regularized_to_polar,
)
from circle3bp.claims import verify_all
from circle3bp.dynamics import (
    IntegratorConfig,
    gamma_from_energy,
    integrate,
    oracle_flow,
    reversal,
)
from circle3bp.homothetic import (
    IsoscelesState,
    classify_trichotomy,
    integrate_iso,
    iso_potential,
)
from circle3bp.model import axis_crossing, build_context
from circle3bp.potential import repelling_strip_max, zero_velocity_curve
from circle3bp.shooting import ShootConfig, assemble_period, bracket_and_bisect
from circle3bp.wazewski import (
    exit_map,
    linearize_P,
    r_cap,
    shooting_point,
    unstable_branch,
)

_CACHE = {}
_CAPSYS = None


@pytest.fixture(autouse=True)
def _capture_bridge(capsys):
    """Let _emit punch through fd-level capture for its one-line verdicts."""
    global _CAPSYS
    _CAPSYS = capsys
    yield
    _CAPSYS = None


def _emit(num: int, ok: bool, detail: str) -> None:
    line = f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'} {detail}"
    if _CAPSYS is not None:
        with _CAPSYS.disabled():
            print(line, flush=True)
    else:
        print(line, file=sys.__stdout__, flush=True)


def _converge(m: float, h: float):
    ctx = build_context(m)
    quarter = bracket_and_bisect(ShootConfig(), ctx, h)
    orbit = assemble_period(quarter, ctx, h)
    return ctx, quarter, orbit


def test_criterion_01_schubart_reference_orbit(ctx13):
    t0 = time.perf_counter()
    ctx, quarter, orbit = _converge(1.0 / 3.0, -1.0)
    elapsed = time.perf_counter() - t0
    _CACHE["orbit13"] = orbit
    ok = (0.0 < orbit.r0 < ctx.r_star
          and abs(quarter.residual) <= 1e-8
          and orbit.closure_error <= 1e-5
          and elapsed <= 60.0)
    _emit(1, ok, f"m=1/3 h=-1: r0={orbit.r0:.9f} "
                 f"residual={abs(quarter.residual):.1e} "
                 f"closure={orbit.closure_error:.1e} ({elapsed:.1f}s)")
    assert ok
    assert ctx.r_star == pytest.approx(0.21809, abs=5e-5)


def test_criterion_02_orbit_family_over_m_and_h():
    rows = []
    ok = True
    for m in (1.0 / 3.0, 0.2, 0.6):
        for h in (-1.0, -2.0):
            t0 = time.perf_counter()
            ctx, quarter, orbit = _converge(m, h)
            elapsed = time.perf_counter() - t0
            good = (0.0 < orbit.r0 < r_cap(ctx, h)
                    and abs(quarter.residual) <= 1e-8
                    and orbit.closure_error <= 1e-5
                    and elapsed <= 120.0)
            ok = ok and good
            rows.append(f"({m:.2f},{h:g}):{orbit.closure_error:.0e}")
    _emit(2, ok, "closures " + " ".join(rows))
    assert ok


def test_criterion_03_exit_dichotomy_scan(ctx13):
    cap = r_cap(ctx13, -1.0)
    faces = []
    for r0 in np.linspace(cap / 201.0, cap * (1.0 - 1.0 / 201.0), 200):
        rec = exit_map(shooting_point(r0, ctx13, -1.0), ctx13, -1.0)
        faces.append(rec.face)
    flips = sum(a != b for a, b in zip(faces, faces[1:]))
    ok = (set(faces) == {"B1", "B2"} and faces[0] == "B2"
          and faces[-1] == "B1" and flips >= 1)
    _emit(3, ok, f"200-point scan: faces B2*{faces.count('B2')} "
                 f"B1*{faces.count('B1')}, flips={flips}")
    assert ok


def test_criterion_04_equilibrium_linearization(ctx13):
    eq = linearize_P(ctx13)
    gap = float(np.max(np.abs(eq.jacobian3 - eq.jacobian_fd)))
    lams = (eq.lambda1, eq.lambda2, eq.lambda3)
    target = (-0.3527, -0.5188, 0.6951)
    near = all(abs(l - t) <= 1e-4 for l, t in zip(lams, target))
    signs = True
    for m in (0.1, 0.2, 1.0 / 3.0, 0.6, 0.9):
        e = linearize_P(build_context(m))
        signs = signs and e.lambda1 < 0 and e.lambda2 < 0 and e.lambda3 > 0
    ok = gap <= 1e-6 and near and signs
    _emit(4, ok, f"fd gap={gap:.1e}, eigenvalues "
                 f"({lams[0]:.4f}, {lams[1]:.4f}, {lams[2]:+.4f}), "
                 f"signs (-,-,+) on scan: {signs}")
    assert ok


def test_criterion_05_unstable_branch_slope(ctx13):
    traj, rec = unstable_branch(ctx13)
    nu0 = -linearize_P(ctx13).P.nu
    bound = 0.5 * ctx13.theta_star * nu0 + 1e-9
    worst = -math.inf
    for k in range(len(traj.sigma) - 1):
        du = traj.states[k + 1, 2] - traj.states[k, 2]
        if du > 1e-12:
            worst = max(worst,
                        (traj.states[k + 1, 1] - traj.states[k, 1]) / du)
    ok = (rec.face == "B1" and rec.exit_state.nu < 0.0
          and np.all(traj.states[:, 0] == 0.0) and worst <= bound)
    _emit(5, ok, f"branch exit nu={rec.exit_state.nu:.6f}, "
                 f"max dnu/du={worst:.6f} <= {bound:.6f}")
    assert ok


def test_criterion_06_claims_across_masses():
    ok = True
    fails = []
    for k in range(1, 10):
        m = k / 10.0
        rep = verify_all(build_context(m))
        d5 = rep.claim("claim5").details
        d4 = rep.claim("claim4").details
        good = (rep.all_pass
                and d5["edge_limit_rel_err"] <= 1e-6
                and d4["measured_limit"] > 0.0
                and d4["r_spread"] <= 1e-8
                and "stated_limit" in d4)
        ok = ok and good
        if not good:
            fails.append(m)
    _emit(6, ok, "all six claims pass for m in 0.1..0.9"
          + (f" EXCEPT {fails}" if fails else
             "; claim-4 constant recorded (x4 of the stated value)"))
    assert ok


def test_criterion_07_estimate_constants():
    ok = True
    worst_cot, worst_arg = math.inf, 0.0
    for k in range(1, 10):
        ctx = build_context(k / 10.0)
        arg = 0.5 * ctx.r_star * ctx.A1
        worst_cot = min(worst_cot, 1.0 / math.tan(arg))
        worst_arg = max(worst_arg, arg)
        ok = ok and 1.0 / math.tan(arg) >= 3.5 and arg <= math.pi / 10.0
    ctx = build_context(1.0 / 3.0)
    agree = abs(ctx.r_star - axis_crossing(ctx, -1.0))
    ok = ok and agree <= 1e-10
    _emit(7, ok, f"min cot(r*A1/2)={worst_cot:.3f} >= 3.5, "
                 f"max r*A1/2={worst_arg:.4f} <= pi/10, "
                 f"quadratic-vs-root gap={agree:.1e}")
    assert ok


def test_criterion_08_homothetic_trichotomy():
    light = classify_trichotomy(0.05, -1.0)
    a = light.motion == "collision-antipodal" and light.velocity_blowup

    heavy = classify_trichotomy(0.2, 0.2)
    mu1 = 0.2  # n / 2 at m = 0.2
    p0 = math.sqrt(2.0 * mu1 * (0.2 + iso_potential(heavy.x1_eq, 0.2)))
    osc = integrate_iso(IsoscelesState(heavy.x1_eq, p0), 0.2, 40.0)
    tx = np.sort(np.interp(osc.turning_times, osc.t, osc.states[:, 0]))
    clusters = 1 + int(np.sum(np.diff(tx) > 1e-2)) if len(tx) else 0
    b = (heavy.h0 == pytest.approx(0.16, abs=1e-12)
         and heavy.motion == "periodic"
         and osc.diagnosis == "periodic"
         and len(tx) >= 2 and clusters == 2)

    rest = integrate_iso(IsoscelesState(1.5 * math.pi, 0.0), 0.2, 40.0)
    drift = float(np.max(np.abs(rest.states[:, 0] - 1.5 * math.pi)))
    c = drift <= 1e-6

    ok = a and b and c
    _emit(8, ok, f"m=0.05 blowup: {a}; m=0.2 h=0.2>h0=0.16 periodic "
                 f"({clusters} turning values): {b}; "
                 f"equilibrium drift={drift:.1e}")
    assert ok


def test_criterion_09_oracle_equivalence(ctx13):
    s0 = shooting_point(0.12, ctx13, -1.0)
    reg = integrate(s0, ctx13, -1.0,
                    IntegratorConfig(sigma_max=1.5, energy_projection=False))
    js0 = regularized_to_jacobi(s0, ctx13)
    ora = oracle_flow(js0, ctx13, duration=float(reg.t_phys[-1]))
    ref = ora.sample(reg.t_phys)
    worst = 0.0
    min_d = math.inf
    for i in range(len(reg.t_phys)):
        js = regularized_to_jacobi(RegularizedState(*reg.states[i]), ctx13)
        min_d = min(min_d, js.x1, js.x1 / 2 + js.x2, js.x1 / 2 - js.x2)
        worst = max(worst,
                    abs(js.x1 - ref[i, 0]), abs(js.x2 - ref[i, 1]),
                    abs(js.u1 - ref[i, 2]), abs(js.u2 - ref[i, 3]))
    ok = ora.termination == "duration" and min_d >= 0.05 and worst <= 1e-6
    _emit(9, ok, f"regularized vs direct integration: max gap={worst:.1e}, "
                 f"min distance={min_d:.3f}")
    assert ok


def test_criterion_10_invariant_suites(ctx13):
    orbit = _CACHE.get("orbit13")
    if orbit is None:
        orbit = _converge(1.0 / 3.0, -1.0)[2]
    eres = float(np.max(np.abs(orbit.closure_trajectory.energy_res)))

    # collision manifold {r = 0} stays exact
    g0 = gamma_from_energy(0.0, -0.3, 0.2, ctx13, -1.0)
    cm = integrate(RegularizedState(0.0, -0.3, 0.2, g0), ctx13, -1.0,
                   IntegratorConfig(sigma_max=1.0))
    r_exact = bool(np.all(cm.states[:, 0] == 0.0))

    # homothetic set {u = 0, gamma = 0} stays exact
    from circle3bp.potential import scaled_terms
    g0_h = scaled_terms(0.15, 0.0, ctx13)[0]
    nu_h = -math.sqrt(2.0 * (g0_h + 0.15 * -1.0))
    hs = integrate(RegularizedState(0.15, nu_h, 0.0, 0.0), ctx13, -1.0,
                   IntegratorConfig(sigma_max=1.0))
    h_exact = bool(np.all(hs.states[:, 2] == 0.0)
                   and np.all(hs.states[:, 3] == 0.0))

    # reversal symmetry round trip
    s0 = shooting_point(0.15, ctx13, -1.0)
    fwd = integrate(s0, ctx13, -1.0, IntegratorConfig(sigma_max=2.0))
    back = integrate(reversal(fwd.final_state), ctx13, -1.0,
                     IntegratorConfig(sigma_max=2.0))
    ret = reversal(back.final_state)
    rev_gap = max(abs(ret.r - s0.r), abs(ret.nu - s0.nu),
                  abs(ret.u - s0.u), abs(ret.gamma - s0.gamma))

    # coordinate chart round trips (configs in the zero-mean gauge)
    cfgs = AngularConfig(phi1=-0.4, phi2=0.3, phi3=0.1,
                         v1=0.2, v2=-0.1, v3=-0.1)
    js = angles_to_jacobi(cfgs, ctx13)
    back_cfg = jacobi_to_angles(js, ctx13)
    c_gap = max(abs(back_cfg.phi1 - cfgs.phi1),
                abs(back_cfg.phi2 - cfgs.phi2),
                abs(back_cfg.phi3 - cfgs.phi3))
    js2 = JacobiState(x1=0.5, x2=0.1, u1=0.2, u2=-0.3)
    ps = jacobi_to_polar(js2, ctx13)
    jb = polar_to_jacobi(ps, ctx13)
    j_gap = max(abs(jb.x1 - js2.x1), abs(jb.x2 - js2.x2),
                abs(jb.u1 - js2.u1), abs(jb.u2 - js2.u2))
    rs = polar_to_regularized(ps, ctx13, branch=0)
    ps2 = regularized_to_polar(rs, ctx13)
    p_gap = max(abs(ps2.r - ps.r), abs(ps2.theta - ps.theta),
                abs(ps2.nu - ps.nu), abs(ps2.tau - ps.tau))

    ok = (eres <= 1e-9 and r_exact and h_exact and rev_gap <= 1e-7
          and c_gap <= 1e-12 and j_gap <= 1e-12 and p_gap <= 1e-12)
    _emit(10, ok, f"energy={eres:.1e}, r=0 exact: {r_exact}, H exact: "
                  f"{h_exact}, reversal={rev_gap:.1e}, charts="
                  f"{max(c_gap, j_gap, p_gap):.1e}")
    assert ok


def test_criterion_11_hill_region_and_repulsion(ctx13):
    counts = []
    nonempty = True
    for h in (-100.0, 0.0, 100.0):
        polys = zero_velocity_curve(ctx13, h, region="I", grid=256)
        total = sum(len(p) for p in polys)
        counts.append(f"h={h:g}:{total}")
        nonempty = nonempty and total >= 2
    strip = repelling_strip_max(ctx13)
    ok = nonempty and strip < -100.0
    _emit(11, ok, f"region-I contour vertices {' '.join(counts)}; "
                  f"strip max U={strip:.1f} < -100")
    assert ok
