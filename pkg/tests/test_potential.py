import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circle3bp import coords as C
from circle3bp import potential as P
from circle3bp.model import build_context

import _oracles as orc

CTX = build_context(1.0 / 3.0)
MN = CTX.m * CTX.n


class TestPlainFields:
    def test_equal_mass_value(self):
        s = P.eval_fields(0.1, 0.0, CTX)
        assert s.rU == pytest.approx(orc.M13_RU_AT_01, rel=1e-13)
        # cross-check against the axis form n^2 r cot(x1) + 2mn r cot(x1/2)
        x1 = 0.1 * CTX.A1
        axis = (CTX.n ** 2 * 0.1 / math.tan(x1)
                + 2.0 * MN * 0.1 / math.tan(x1 / 2.0))
        assert s.rU == pytest.approx(axis, rel=1e-13)

    def test_r_zero_limit_is_nu0(self):
        s = P.eval_fields(0.0, 0.0, CTX)
        assert s.rU == pytest.approx(0.5 * CTX.nu0 ** 2, rel=1e-14)
        assert -s.r2U_r == s.rU                      # exact at r = 0

    def test_rU_theta_vanishes_on_axis(self):
        for r in (0.0, 0.05, 0.13, 0.2):
            assert P.eval_fields(r, 0.0, CTX).rU_theta == 0.0

    @given(st.floats(min_value=0.0, max_value=0.2),
           st.floats(min_value=-0.5, max_value=0.5))
    @settings(max_examples=60, deadline=None)
    def test_parity(self, r, tfrac):
        th = tfrac * CTX.theta_star
        a = P.eval_fields_theta(r, th, CTX)
        b = P.eval_fields_theta(r, -th, CTX)
        assert a.rU == pytest.approx(b.rU, abs=1e-12)
        assert a.r2U_r == pytest.approx(b.r2U_r, abs=1e-12)
        assert a.rU_theta == pytest.approx(-b.rU_theta, abs=1e-12)
        c = P.eval_fields_theta(-r, th, CTX)
        assert (a.rU, a.rU_theta, a.r2U_r) == (c.rU, c.rU_theta, c.r2U_r)

    @pytest.mark.parametrize("u", [0.0, 0.3, 1.0, math.pi / 2.0 - 0.1])
    def test_limit_rate(self, u):
        # -r^2 U_r -> rU at rate O(r^2)
        gaps = []
        for r in (0.02, 0.01):
            s = P.eval_fields(r, u, CTX)
            gaps.append(abs(-s.r2U_r - s.rU))
        assert gaps[1] < 1e-3
        assert 3.0 < gaps[0] / gaps[1] < 5.0

    def test_singularities(self):
        with pytest.raises(P.Singular):
            P.eval_fields(0.1, math.pi / 2.0, CTX)    # double collision
        with pytest.raises(P.Singular):
            P.eval_fields(0.0, math.pi / 2.0, CTX)    # CA limit on r = 0
        with pytest.raises(P.Singular):
            P.eval_fields_theta(1.3, 0.0, CTX)        # d12 past pi
        with pytest.raises(P.Singular):
            P.eval_fields_theta(0.1, 2.0 * CTX.theta_star, CTX)

    def test_cross_chart_consistency(self):
        for (r, th) in [(0.1, 0.05), (0.18, -0.3), (0.03, 0.5)]:
            js = C.polar_to_jacobi(C.PolarState(r, th * CTX.theta_star), CTX)
            u_direct = float(P.potential_value(js.x1, js.x2, CTX))
            s = P.eval_fields_theta(r, th * CTX.theta_star, CTX)
            assert s.rU / r == pytest.approx(u_direct, rel=1e-12)


class TestScaledTerms:
    @given(st.floats(min_value=0.0, max_value=0.2),
           st.floats(min_value=0.0, max_value=math.pi / 2.0 - 1e-3))
    @settings(max_examples=80, deadline=None)
    def test_matches_plain_fields(self, r, u):
        c2 = math.cos(u) ** 2
        s = P.eval_fields(r, u, CTX)
        g0, g2, g4 = P.scaled_terms(r, u, CTX)
        assert g0 == pytest.approx(s.rU * c2, rel=1e-11, abs=1e-13)
        assert g2 == pytest.approx((2.0 * s.rU + s.r2U_r) * c2,
                                   rel=1e-11, abs=1e-13)
        assert g4 == pytest.approx(s.rU_theta * c2 * c2, rel=1e-10, abs=1e-13)

    def test_collision_limits(self):
        lim0 = 2.0 * MN / (CTX.A2 * CTX.theta_star)
        lim4 = 4.0 * MN / (CTX.A2 * CTX.theta_star ** 2)
        for r in (0.0, 0.05, 0.15):
            g0, g2, g4 = P.scaled_terms(r, math.pi / 2.0, CTX)
            assert g0 == pytest.approx(lim0, rel=1e-13)
            assert g2 == pytest.approx(lim0, rel=1e-13)
            assert g4 == pytest.approx(lim4, rel=1e-13)
        assert lim0 == pytest.approx(orc.M13_RU_COS2U_LIMIT, rel=1e-14)
        assert lim4 == pytest.approx(orc.M13_CLAIM5_TERM2_LIMIT, rel=1e-14)

    def test_stable_near_collision(self):
        # plain evaluation just below u = pi/2 agrees with the exact limit
        u = math.pi / 2.0 - 1e-6
        s = P.eval_fields(u=u, r=0.1, ctx=CTX)
        c4 = math.cos(u) ** 4
        lim4 = 4.0 * MN / (CTX.A2 * CTX.theta_star ** 2)
        assert s.rU_theta * c4 / math.sin(u) == pytest.approx(lim4, rel=1e-6)
        g4 = P.scaled_terms(0.1, u, CTX)[2]
        assert g4 == pytest.approx(lim4, rel=1e-6)

    def test_axis_term_cancels_exactly(self):
        # the theta-odd bracket vanishes in floating point on theta = 0,
        # making {u = 0, gamma = 0} exactly invariant downstream
        for r in (0.0, 0.07, 0.19):
            assert P.scaled_terms(r, 0.0, CTX)[2] == 0.0

    def test_series_seam(self):
        for f in (P._xcot, P._fr):
            lo = f(math.nextafter(1e-2, 0.0))
            hi = f(math.nextafter(1e-2, 1.0))
            assert lo == pytest.approx(hi, rel=1e-13)


class TestCollisionManifold:
    def test_endpoint_values(self):
        v0 = P.collision_manifold_rU_cos2u(0.0, CTX)
        assert v0 == pytest.approx(0.5 * CTX.nu0 ** 2, rel=1e-14)
        vhalf = P.collision_manifold_rU_cos2u(math.pi / 2.0, CTX)
        assert vhalf == pytest.approx(orc.M13_RU_COS2U_LIMIT, rel=1e-13)
        assert vhalf > 0.0

    def test_maximum_at_zero(self):
        us = np.linspace(0.0, math.pi / 2.0, 201)
        vals = [P.collision_manifold_rU_cos2u(u, CTX) for u in us]
        assert int(np.argmax(vals)) == 0
        assert all(v < vals[0] for v in vals[1:])


class TestF:
    def test_bottom_is_rU(self):
        for u in (0.0, 0.4, 1.2):
            assert P.F(0.0, u, CTX, -1.0) == pytest.approx(
                P.eval_fields(0.0, u, CTX).rU, rel=1e-14)
            assert P.F(0.0, u, CTX, -1.0) > 0.0

    def test_vertex_is_negative(self):
        assert P.F(CTX.r_star, 0.0, CTX, -1.0) < 0.0

    def test_increasing_in_u(self):
        us = np.linspace(0.01, math.pi / 2.0 - 0.01, 120)
        vals = [P.F(CTX.r_star / 2.0, u, CTX, -1.0) for u in us]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_energy_level_argument(self):
        from circle3bp.model import EnergyLevel
        assert P.F(0.1, 0.2, CTX, EnergyLevel(-2.0)) == pytest.approx(
            P.F(0.1, 0.2, CTX, -2.0), rel=1e-15)


class TestAuxiliaries:
    def test_f_aux_values(self):
        x = math.pi / 5.0
        assert P.f_aux(x) == pytest.approx(orc.F_AUX_PI5, rel=1e-13)
        assert P.f_aux_prime(x) == pytest.approx(orc.F_AUX_PRIME_PI5, rel=1e-13)
        # published approximations hold loosely
        assert P.f_aux(x) == pytest.approx(0.93417, abs=1e-4)
        assert P.f_aux_prime(x) == pytest.approx(-3.67676, abs=1e-3)

    def test_f_aux_monotonicity(self):
        xs = np.linspace(1e-3, math.pi / 5.0, 200)
        for x in xs:
            assert P.f_aux_prime(x) < 0.0
            assert P.f_aux_second(x) >= 0.0
        assert P.f_aux(1e-4) > 1e3         # 1/x blow-up toward 0

    def test_f_aux_domain(self):
        for bad in (0.0, -0.1, math.pi / 5.0 + 0.01):
            with pytest.raises(ValueError):
                P.f_aux(bad)

    def test_k_aux_nonnegative(self):
        xs = np.linspace(0.0, math.pi / 5.0, 300)
        assert all(P.k_aux(x) >= -1e-15 for x in xs)

    @given(st.floats(min_value=0.01, max_value=math.pi / 4.0),
           st.floats(min_value=0.0, max_value=math.pi / 2.0))
    @settings(max_examples=100, deadline=None)
    def test_shape_inequality(self, ts, u):
        assert P.shape_inequality(ts, u) >= -1e-15

    def test_shape_inequality_endpoints(self):
        assert P.shape_inequality(CTX.theta_star, 0.0) == 0.0
        assert abs(P.shape_inequality(CTX.theta_star, math.pi / 2.0)) < 1e-30


class TestZeroVelocityCurve:
    def test_axis_crossing(self):
        polys = P.zero_velocity_curve(CTX, -1.0, "I")
        assert polys
        target = CTX.r_star * CTX.A1
        best = math.inf
        for p in polys:
            pts = p.points
            for a, b in zip(pts[:-1], pts[1:]):
                if a[1] * b[1] <= 0.0:
                    t = abs(a[1]) / (abs(a[1]) + abs(b[1]) + 1e-300)
                    best = min(best, abs(a[0] + t * (b[0] - a[0]) - target))
        assert best < 1e-3
        assert target == pytest.approx(orc.M13_ZVC_AXIS_X1, rel=1e-13)

    @pytest.mark.parametrize("h", [-100.0, 0.0, 100.0])
    def test_nonempty_levels(self, h):
        polys = P.zero_velocity_curve(CTX, h, "I")
        assert polys
        for p in polys:
            res = P.potential_value(p.points[:, 0], p.points[:, 1], CTX) + h
            assert float(np.max(np.abs(res))) <= 1e-8
            assert p.region == "I" and p.h == h

    def test_level_missing_region(self):
        # equal masses: U < 0 throughout the central triangle
        assert P.zero_velocity_curve(CTX, -1.0, "II", grid=128) == []

    def test_outer_regions(self):
        for reg in ("III", "IV"):
            assert P.zero_velocity_curve(CTX, 0.0, reg, grid=128)

    def test_repelling_strips(self):
        worst = P.repelling_strip_max(CTX)
        assert worst < -100.0
