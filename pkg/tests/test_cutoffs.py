"""
Tests for the refined cutoffs and the periodic partition of unity.
"""

import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from cascade_scope.fields import Grid  # noqa: E402
from cascade_scope.localization import (  # noqa: E402
    Covering,
    CutoffFamily,
    certify_family,
    certify_profile,
    family_for_covering,
    lattice_covering,
    make_space_cutoff,
    make_time_cutoff,
    partition_of_unity,
    theorem_constant,
    verify_family_sandwich,
)
from cascade_scope.localization.cutoffs import profile_exponent, sample_ratios  # noqa: E402

L = 2.0 * math.pi


def _coords(N: int = 16):
    return (Grid(N).x,) * 3


class TestProfile:
    @pytest.mark.parametrize("delta, m", [(0.75, 4), (0.6, 3), (0.9, 10)])
    def test_exponent(self, delta, m):
        assert profile_exponent(delta) == m

    def test_gradient_constant_for_three_quarters(self):
        # m = 4 makes the gradient ratio 4|χ′|, whose maximum is 4 · 30/16
        c_grad, c_lap = certify_profile(0.75, 3)
        assert c_grad == pytest.approx(7.5, rel=1e-9)
        assert math.isfinite(c_lap) and c_lap > 0

    def test_certification_is_stable_under_refinement(self):
        coarse = certify_profile(0.75, 3, 4)
        fine = certify_profile(0.75, 3, 8)
        assert fine[0] == pytest.approx(coarse[0], rel=1e-2)
        assert fine[1] == pytest.approx(coarse[1], rel=1e-2)

    @pytest.mark.parametrize("delta", [0.5, 1.0, 0.3])
    def test_rejects_delta_out_of_range(self, delta):
        with pytest.raises(ValueError):
            certify_profile(delta, 3)


class TestSpaceCutoff:
    def test_support(self):
        psi = make_space_cutoff((1.0, 2.0, 3.0), R=1.0)
        values, _, _ = psi.radial(np.array([0.0, 0.5, 1.0, 2.0, 2.5]))
        np.testing.assert_allclose(values, [1.0, 1.0, 1.0, 0.0, 0.0], atol=1e-15)

    @pytest.mark.parametrize("R", [0.4, 0.6, 0.9, 1.2, math.pi / 2.0])
    def test_certified_bounds_hold_on_grid(self, R):
        psi = make_space_cutoff((math.pi, 2.0, 0.3), R=R)
        g, lap = sample_ratios(psi, psi.sample(_coords(32)))
        assert g <= psi.C0_grad * (1.0 + 1e-5)
        assert lap <= psi.C0_lap * (1.0 + 1e-5)

    def test_constant_is_scale_and_center_independent(self):
        constants = [make_space_cutoff((c, c, c), R=R).C0 for c, R in zip(np.linspace(0, 5, 5), (0.3, 0.5, 0.8, 1.1, 1.5))]
        np.testing.assert_allclose(constants, constants[0], rtol=1e-8)

    def test_sample_wraps_around_the_box(self):
        psi = make_space_cutoff((0.0, 0.0, 0.0), R=0.5)
        smp = psi.sample(_coords(16))
        # points on both sides of x = 0 are kept
        assert 0 in smp.index[0] and 15 in smp.index[0]

    def test_rejects_scale_above_quarter_box(self):
        with pytest.raises(ValueError):
            make_space_cutoff((0.0, 0.0, 0.0), R=2.0, L=L)

    def test_rejects_nonpositive_scale(self):
        with pytest.raises(ValueError):
            make_space_cutoff((0.0, 0.0, 0.0), R=0.0)


class TestTimeCutoff:
    def test_plateau_and_endpoints(self):
        eta = make_time_cutoff(10.0)
        assert float(eta.value(5.0)) == 1.0
        assert float(eta.value(0.0)) == 0.0
        assert float(eta.value(10.0)) == 0.0
        assert float(eta.value(-1.0)) == 0.0

    def test_constant(self):
        eta = make_time_cutoff(10.0, rho=0.25)
        assert eta.C0 == pytest.approx(certify_profile(0.75, 1)[0] / 0.25)

    def test_derivative_bound(self):
        T = 4.0
        eta = make_time_cutoff(T, rho=0.2)
        t = np.linspace(0.0, T, 2001)
        lhs = np.abs(eta.derivative(t))
        rhs = eta.C0 / T * eta.value(t) ** eta.delta
        assert np.all(lhs <= rhs * (1.0 + 1e-9) + 1e-15)

    def test_mean_lies_between_plateau_and_one(self):
        eta = make_time_cutoff(1.0, rho=0.25)
        assert 0.5 < eta.c_eta < 1.0
        assert eta.moments["eta_sq"] < eta.c_eta < eta.moments["eta_delta"]

    def test_mean_tends_to_one_for_short_ramps(self):
        assert make_time_cutoff(1.0, rho=1e-4).c_eta > 0.999

    def test_moments_are_converged(self):
        a = make_time_cutoff(1.0, panels=10_000)
        b = make_time_cutoff(1.0, panels=40_000)
        for key, value in a.moments.items():
            assert b.moments[key] == pytest.approx(value, abs=1e-10)

    @pytest.mark.parametrize("kwargs", [{"T": 0.0}, {"T": 1.0, "rho": 0.0}, {"T": 1.0, "rho": 0.6}])
    def test_rejects_bad_arguments(self, kwargs):
        with pytest.raises(ValueError):
            make_time_cutoff(**kwargs)

    def test_theorem_constant_takes_the_larger(self):
        eta = make_time_cutoff(1.0, rho=0.25)
        assert theorem_constant(1.0, eta) == eta.C0
        assert theorem_constant(1e3, eta) == 1e3


class TestPartitionOfUnity:
    def test_sums_to_one(self):
        coords = _coords(24)
        total = sum(el.sample(coords).psi for el in partition_of_unity(L))
        np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_elements_lie_in_unit_interval(self):
        coords = _coords(16)
        for el in partition_of_unity(L):
            psi = el.sample(coords).psi
            assert psi.min() >= 0.0 and psi.max() <= 1.0 + 1e-15

    def test_first_factor_support(self):
        factor = partition_of_unity(L)[0].factors[0]
        x = np.array([0.0, L / 12.0, L / 3.0, L / 2.0, 2.0 * L / 3.0, 11.0 * L / 12.0])
        f, _, _ = factor.evaluate(x)
        np.testing.assert_allclose(f, [0.0, 0.0, 1.0, 1.0, 1.0, 0.0], atol=1e-15)
        lo, hi = factor.support_interval()
        assert hi - lo < L

    def test_shifted_factor_support_fits_a_period(self):
        factor = partition_of_unity(L)[-1].factors[0]
        lo, hi = factor.support_interval()
        assert hi - lo < L


class TestFamilySandwich:
    def test_lattice_family_passes(self):
        cov = lattice_covering(L, math.pi / 2.0)
        report = verify_family_sandwich(family_for_covering(cov), _coords(16))
        assert report.passed
        assert report.min_sum >= 1.0

    def test_single_ball_fails_lower_bound(self):
        cov = Covering(1.0, L, np.array([[1.0, 1.0, 1.0]]), 1, 1, math.pi / 2.0)
        report = verify_family_sandwich(family_for_covering(cov), _coords(16))
        assert not report.lower_ok
        assert report.upper_ok

    def test_stacked_balls_fail_upper_bound(self):
        cov = Covering(1.0, L, np.array([[1.0, 1.0, 1.0]] * 3), 1, 2, math.pi / 2.0)
        report = verify_family_sandwich(family_for_covering(cov), _coords(16))
        assert report.max_sum == pytest.approx(3.0)
        assert not report.upper_ok


class TestFamilyCertificate:
    def test_lattice_family_is_certified(self):
        coords = _coords(32)
        cov = lattice_covering(L, 1.2, grid_or_coords=coords)
        cert = certify_family(family_for_covering(cov), coords)
        assert cert.n == cov.n
        assert 0.0 < cert.grad_ratio <= cert.C0_grad * (1.0 + 1e-5)
        assert cert.bounds_ok and cert.sandwich.passed and cert.passed

    def test_single_ball_fails_only_the_sandwich(self):
        family = CutoffFamily((make_space_cutoff((1.0, 1.0, 1.0), R=1.0),), 1.0, 0.75)
        cert = certify_family(family, _coords(16), K2=1)
        assert cert.bounds_ok
        assert not cert.sandwich.lower_ok
        assert not cert.passed

    def test_understated_constant_fails_the_bounds(self):
        psi = make_space_cutoff((math.pi, 2.0, 0.3), R=1.2)
        weak = replace(psi, C0_grad=0.5 * psi.C0_grad)
        cert = certify_family(CutoffFamily((weak,), 1.2, 0.75), _coords(32), K2=1)
        assert cert.grad_ratio > cert.C0_grad
        assert not cert.bounds_ok

    def test_empty_family(self):
        with pytest.raises(ValueError):
            certify_family(CutoffFamily((), 1.0, 0.75), _coords(16), K2=1)
