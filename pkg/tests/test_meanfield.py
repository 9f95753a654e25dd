"""Classical amplitude/phase flow: radii, potential, reduced phase dynamics."""

import math

import numpy as np
import pytest

from common import (
    DEEP_EXACT,
    DEEP_ROUNDED,
    SHALLOW,
    SHALLOW_R1,
    SHALLOW_RC,
    SHALLOW_R2,
    circ_dist,
    shallow,
    vdp,
)
from twinlc import (
    CoupledParams,
    NonConvergenceError,
    OscillatorParams,
    coupled_fixed_point,
    default_sector_boundary,
    perturbative_radii,
    phase_fixed_points,
    potential,
    radii,
    rates_from_radii,
    relative_phase_rhs,
    relative_phase_rhs_diff,
    relative_phase_rhs_same,
    rhs_coupled,
    rhs_single,
    single_fixed_point,
    standard_lc_phase,
    standard_lc_relative_phase,
)


class TestRadii:
    def test_rates_from_radii_deep_family(self):
        g = rates_from_radii(1.0, 4.0, 8.0, gamma1=1.0)
        # Vieta on the radial cubic gives exact dyadic rationals here
        assert g == (1.0, 0.5390625, 0.0263671875, 0.000244140625)
        assert g[3] == g[0] / 4096.0

    @pytest.mark.parametrize("gamma1", [1.0, 2.0, 0.37])
    def test_deep_roundtrip_exact(self, gamma1):
        g = rates_from_radii(1.0, 4.0, 8.0, gamma1=gamma1)
        assert g[3] == pytest.approx(gamma1 / 4096.0, rel=1e-14)
        rr = radii(OscillatorParams.from_gamma(g))
        assert rr.r1 == pytest.approx(1.0, abs=1e-10)
        assert rr.rc == pytest.approx(4.0, abs=1e-10)
        assert rr.r2 == pytest.approx(8.0, abs=1e-10)

    def test_gamma4_pivot_roundtrip(self):
        g = rates_from_radii(1.0, 4.0, 8.0, gamma4=2.0)
        assert g[0] == pytest.approx(8192.0, rel=1e-13)
        rr = radii(OscillatorParams.from_gamma(g))
        assert (rr.r1, rr.rc, rr.r2) == pytest.approx((1, 4, 8), abs=1e-9)

    def test_rounded_rates_shift_outer_ring(self):
        rr = radii(DEEP_ROUNDED)
        assert rr.r1 == pytest.approx(1.0001214005974, rel=1e-12)
        assert rr.rc == pytest.approx(3.994768912953778, rel=1e-12)
        assert rr.r2 == pytest.approx(8.011811249634613, rel=1e-12)

    def test_shallow_radii_regression(self):
        rr = radii(SHALLOW)
        assert rr.r1 == pytest.approx(SHALLOW_R1, rel=1e-12)
        assert rr.rc == pytest.approx(SHALLOW_RC, rel=1e-12)
        assert rr.r2 == pytest.approx(SHALLOW_R2, rel=1e-12)
        assert not rr.degenerate

    def test_shallow_boundary(self):
        assert round(radii(SHALLOW).rc ** 2) == 2
        assert default_sector_boundary(SHALLOW) == 2

    def test_single_ring_degenerate(self):
        rr = radii(vdp(gamma2=2.5))
        assert rr.degenerate
        assert rr.roots[0] == pytest.approx(math.sqrt(1.0 / 5.0), rel=1e-12)

    def test_radial_cubic_roots_satisfy_bracket(self):
        # r^2 values of the three rings are the roots of the cubic factor
        g1, g2, g3, g4 = SHALLOW.gamma
        rr = radii(SHALLOW)
        for r in (rr.r1, rr.rc, rr.r2):
            u = r * r
            val = g1 / 2 - g2 * u + 1.5 * g3 * u * u - 2 * g4 * u**3
            assert abs(val) < 1e-12

    def test_invalid_radius_ordering(self):
        with pytest.raises(ValueError):
            rates_from_radii(4.0, 1.0, 8.0, gamma1=1.0)
        with pytest.raises(ValueError):
            rates_from_radii(-1.0, 4.0, 8.0, gamma1=1.0)


class TestPotential:
    def test_quartic_well_closed_form(self):
        g1, g2, g3, g4 = SHALLOW.gamma
        V = potential(SHALLOW)
        for r in (0.2, 0.7, 1.3, 2.0, 2.9):
            want = (-g1 * r**2 + g2 * r**4 - g3 * r**6 + g4 * r**8) / 4.0
            assert V(r) == pytest.approx(want, rel=1e-14)

    def test_deep_barriers(self):
        V = potential(DEEP_EXACT)
        assert V.barrier_inner == pytest.approx(7.62176513671875, rel=1e-12)
        assert V.barrier_outer == pytest.approx(175.5, rel=1e-12)

    def test_barriers_are_positive_depth_differences(self):
        V = potential(SHALLOW)
        rr = radii(SHALLOW)
        assert V.barrier_inner == pytest.approx(V(rr.rc) - V(rr.r1), rel=1e-12)
        assert V.barrier_outer == pytest.approx(V(rr.rc) - V(rr.r2), rel=1e-12)
        assert V.barrier_inner > 0
        assert V.barrier_outer > V.barrier_inner


class TestSingleFlow:
    def test_rings_are_radial_equilibria(self):
        rr = radii(SHALLOW)
        for r in (rr.r1, rr.rc, rr.r2):
            dr, _ = rhs_single(r, 0.3, SHALLOW)
            assert abs(dr) < 1e-12

    def test_ring_stability_signs(self):
        rr = radii(SHALLOW)
        h = 1e-6
        for r, stable in ((rr.r1, True), (rr.rc, False), (rr.r2, True)):
            slope = (
                rhs_single(r + h, 0.0, SHALLOW)[0]
                - rhs_single(r - h, 0.0, SHALLOW)[0]
            ) / (2 * h)
            assert (slope < 0) == stable

    def test_phase_flow_closed_form(self):
        p = shallow(delta=0.4, kerr=0.15, drive=0.3)
        for r, phi in ((0.7, 0.2), (1.4, -2.0), (2.3, 2.9)):
            _, dphi = rhs_single(r, phi, p)
            want = -0.4 - 2 * 0.15 * r * r - (0.3 / r) * math.cos(phi)
            assert dphi == pytest.approx(want, rel=1e-13)

    def test_drive_enters_radial_flow(self):
        p = shallow(drive=0.3)
        dr, _ = rhs_single(1.0, 0.0, p)
        dr0, _ = rhs_single(1.0, 0.0, SHALLOW)
        # at phi=0 the drive term -Omega sin(phi) vanishes
        assert dr == pytest.approx(dr0, abs=1e-15)
        dr_locked, _ = rhs_single(1.0, -math.pi / 2, p)
        assert dr_locked == pytest.approx(dr0 + 0.3, rel=1e-13)

    def test_locked_point_near_outer_ring(self):
        p = shallow(drive=0.2)
        r, phi = single_fixed_point(p, (SHALLOW_R2, -math.pi / 2))
        assert abs(r - SHALLOW_R2) < 0.05
        assert circ_dist(phi, -math.pi / 2) < 0.05
        dr, dphi = rhs_single(r, phi, p)
        assert max(abs(dr), abs(dphi)) < 1e-9

    def test_fixed_point_requires_convergence(self):
        # undriven but detuned: the phase rotates forever, no equilibrium
        with pytest.raises(NonConvergenceError):
            single_fixed_point(shallow(delta=1.0), (1.0, 2.0))


class TestPhaseFixedPoints:
    def test_sine_flow(self):
        pts = phase_fixed_points(math.sin)
        assert len(pts) == 2
        lookup = {round(phi, 6): st for phi, st in pts}
        assert lookup[0.0] is False
        assert lookup[round(math.pi, 6)] is True

    def test_cosine_flow(self):
        pts = dict(
            (round(phi, 9), st) for phi, st in phase_fixed_points(math.cos)
        )
        assert round(math.pi / 2, 9) in pts
        assert pts[round(math.pi / 2, 9)] is True
        assert pts[round(-math.pi / 2, 9)] is False

    def test_flat_flow_empty(self):
        assert phase_fixed_points(lambda phi: 0.0) == []


class TestCoupledFlow:
    def test_relative_phase_matches_component_flows(self):
        pa = shallow(delta=0.1, kerr=0.2)
        pb = shallow(delta=0.25, kerr=0.2)
        p = CoupledParams(pa, pb, coupling=0.05)
        rA, phiA, rB, phiB = 0.6, 0.4, 2.1, 1.1
        dA = rhs_coupled(rA, phiA, rB, phiB, p)
        dphi_rel = relative_phase_rhs(phiB - phiA, rA, rB, p)
        assert dphi_rel == pytest.approx(dA[3] - dA[1], rel=1e-10)

    def test_coupling_exchanges_amplitude(self):
        p = CoupledParams(shallow(), coupling=0.05)
        rA, rB, phi = 0.6, 2.1, 0.7
        drA = rhs_coupled(rA, 0.0, rB, phi, p)[0]
        drA0 = rhs_single(rA, 0.0, shallow())[0]
        assert drA == pytest.approx(drA0 + 0.05 * rB * math.sin(phi), rel=1e-12)

    def test_same_ring_flow_is_bistable(self):
        p = CoupledParams(shallow(), coupling=0.05)
        for branch in (1, 2):
            pts = phase_fixed_points(
                lambda phi: relative_phase_rhs_same(phi, branch, p)
            )
            stable = sorted(phi for phi, st in pts if st)
            assert len(pts) == 4
            assert len(stable) == 2
            assert circ_dist(stable[0], 0.0) < 1e-9 or circ_dist(
                stable[0], math.pi
            ) < 1e-9
            assert any(circ_dist(s, 0.0) < 1e-9 for s in stable)
            assert any(circ_dist(s, math.pi) < 1e-9 for s in stable)

    def test_different_ring_flow_locks_at_quarter_turn(self):
        p = CoupledParams(shallow(), coupling=0.05)
        pts_12 = phase_fixed_points(
            lambda phi: relative_phase_rhs_diff(phi, (1, 2), p)
        )
        stable_12 = [phi for phi, st in pts_12 if st]
        assert len(stable_12) == 1
        assert circ_dist(stable_12[0], math.pi / 2) < 1e-9

        pts_21 = phase_fixed_points(
            lambda phi: relative_phase_rhs_diff(phi, (2, 1), p)
        )
        stable_21 = [phi for phi, st in pts_21 if st]
        assert len(stable_21) == 1
        assert circ_dist(stable_21[0], -math.pi / 2) < 1e-9

    def test_reduced_flows_require_equal_rates(self):
        p = CoupledParams(shallow(), shallow(gamma2=2.6), coupling=0.05)
        with pytest.raises(ValueError):
            relative_phase_rhs_same(0.3, 1, p)

    def test_coupled_fixed_point_symmetric_lock(self):
        p = CoupledParams(shallow(), coupling=0.05)
        fp = coupled_fixed_point(p, (SHALLOW_R1, SHALLOW_R1, 0.0))
        assert fp.r_a == pytest.approx(fp.r_b, rel=1e-9)
        assert circ_dist(fp.phi_ba, 0.0) < 1e-9
        assert fp.stable == all(ev.real < 0 for ev in fp.eigenvalues)

    def test_coupled_fixed_point_residual(self):
        p = CoupledParams(shallow(), coupling=0.03)
        fp = coupled_fixed_point(p, (SHALLOW_R1, SHALLOW_R2, math.pi / 2))
        g = p.coupling
        drA = rhs_single(fp.r_a, 0.0, shallow())[0] + g * fp.r_b * math.sin(
            fp.phi_ba
        )
        drB = rhs_single(fp.r_b, 0.0, shallow())[0] - g * fp.r_a * math.sin(
            fp.phi_ba
        )
        dphi = relative_phase_rhs(fp.phi_ba, fp.r_a, fp.r_b, p)
        assert max(abs(drA), abs(drB), abs(dphi)) < 1e-9


class TestStandardCycle:
    def test_locks_opposite_drive_at_resonance(self):
        for p in (vdp(gamma2=2.5, drive=0.1),
                  OscillatorParams(gamma3=1.0, gamma4=3.75, drive=0.1)):
            stable = [
                phi for phi, st in phase_fixed_points(
                    lambda phi: standard_lc_phase(phi, p)
                ) if st
            ]
            assert len(stable) == 1
            assert circ_dist(stable[0], -math.pi / 2) < 1e-12

    @pytest.mark.parametrize(
        "p,r",
        [
            (vdp(gamma2=2.5, drive=0.01), math.sqrt(1.0 / 5.0)),
            (
                OscillatorParams(gamma3=1.0, gamma4=3.75, drive=0.01),
                math.sqrt(3.0 / 15.0),
            ),
        ],
    )
    def test_detuning_slope(self, p, r):
        # d(phi_max)/d(delta) = -r/drive at the resonant lock
        h = 1e-4 * p.drive.real
        phis = []
        for s in (+1, -1):
            q = OscillatorParams(
                delta=s * h, kerr=0.0, drive=p.drive,
                gamma1=p.gamma1, gamma2=p.gamma2,
                gamma3=p.gamma3, gamma4=p.gamma4,
            )
            stable = [
                phi for phi, st in phase_fixed_points(
                    lambda phi: standard_lc_phase(phi, q)
                ) if st
            ]
            phis.append(stable[0])
        slope = (phis[0] - phis[1]) / (2 * h)
        assert slope == pytest.approx(-r / p.drive.real, rel=1e-4)

    @pytest.mark.parametrize(
        "gamma,r",
        [
            ((1.0, 2.5, 0.0, 0.0), math.sqrt(1.0 / 5.0)),
            ((0.0, 0.0, 1.0, 3.75), math.sqrt(3.0 / 15.0)),
        ],
    )
    def test_anharmonicity_slope(self, gamma, r):
        # d(phi_max)/dK -> -2 r^3 / drive in the weak-drive limit; the
        # finite-drive correction is O(1), so extrapolate drive -> 0.
        def slope_times_drive(drive):
            h = 1e-4 * drive
            phis = []
            for s in (+1, -1):
                q = OscillatorParams.from_gamma(gamma, kerr=s * h, drive=drive)
                stable = [
                    phi for phi, st in phase_fixed_points(
                        lambda phi: standard_lc_phase(phi, q)
                    ) if st
                ]
                phis.append(stable[0])
            return drive * (phis[0] - phis[1]) / (2 * h)

        q1 = slope_times_drive(0.01)
        q2 = slope_times_drive(0.005)
        extrapolated = 2 * q2 - q1
        assert extrapolated == pytest.approx(-2 * r**3, rel=1e-5)

    def test_mixed_rate_pattern_rejected(self):
        with pytest.raises(ValueError):
            standard_lc_phase(0.0, shallow(drive=0.1))

    def test_coupled_standard_lock_classes(self):
        # equal dampings lock bistably at {0, pi}; unequal at +-pi/2
        # coupling small enough that the second-order term cannot spawn
        # extra equilibria away from the first-order lock
        def stable_of(g2a, g2b):
            p = CoupledParams(
                vdp(gamma2=g2a), vdp(gamma2=g2b), coupling=0.01
            )
            return [
                phi for phi, st in phase_fixed_points(
                    lambda phi: standard_lc_relative_phase(phi, p)
                ) if st
            ]

        eq = sorted(stable_of(2.5, 2.5))
        assert len(eq) == 2
        assert circ_dist(eq[0], 0.0) < 1e-9 or circ_dist(eq[0], math.pi) < 1e-9
        big_a = stable_of(3.0, 2.5)
        assert len(big_a) == 1 and circ_dist(big_a[0], math.pi / 2) < 0.2
        small_a = stable_of(2.0, 2.5)
        assert len(small_a) == 1 and circ_dist(small_a[0], -math.pi / 2) < 0.2


class TestPerturbativeRadii:
    def test_same_branch_antisymmetric_first_order(self):
        p = CoupledParams(shallow(), coupling=0.01)
        pr = perturbative_radii(p, "same", 0.7, branch=1)
        assert pr.base_a == pr.base_b == pytest.approx(SHALLOW_R1, rel=1e-12)
        assert pr.r_a1 == pytest.approx(-pr.r_b1, rel=1e-12)
        assert pr.r_a2 == pytest.approx(pr.r_b2, rel=1e-12)

    def test_first_order_vanishes_at_lock_poles(self):
        p = CoupledParams(shallow(), coupling=0.01)
        for phi in (0.0, math.pi):
            pr = perturbative_radii(p, "diff", phi, branch=(1, 2))
            assert pr.r_a1 == pytest.approx(0.0, abs=1e-15)
            assert pr.r_b1 == pytest.approx(0.0, abs=1e-15)

    def test_diff_branch_bases(self):
        p = CoupledParams(shallow(), coupling=0.01)
        pr = perturbative_radii(p, "diff", 0.4, branch=(2, 1))
        assert pr.base_a == pytest.approx(SHALLOW_R2, rel=1e-12)
        assert pr.base_b == pytest.approx(SHALLOW_R1, rel=1e-12)
        assert pr.r_a2 is None and pr.r_b2 is None

    def test_bad_case_label(self):
        p = CoupledParams(shallow(), coupling=0.01)
        with pytest.raises(ValueError):
            perturbative_radii(p, "mixed", 0.0)
