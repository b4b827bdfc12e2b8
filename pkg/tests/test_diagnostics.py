"""
Tests for scales, adimensional numbers and the theorem evaluators.
"""

import json
import math
import sys
from pathlib import Path

import numpy as np
import pytest

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from cascade_scope.budget import ScaleAverage, global_budget  # noqa: E402
from cascade_scope.diagnostics import (  # noqa: E402
    EXIT_HYPOTHESIS,
    EXIT_OK,
    EXIT_VIOLATION,
    DiagnosticsReport,
    TauScales,
    TheoremRecord,
    adimensional_numbers,
    alignment_ratio,
    apriori_bounds_check,
    cauchy_schwarz_counterexample,
    default_C,
    default_K_threshold,
    kolmogorov_saturation,
    lemma_force_alignment_check,
    saturated_scaling_bounds,
    tau_scales,
    tau_scales_from_budget,
    taylor_scale,
    theorem1_check,
    theorem1_constants,
    theorem2_check,
    theorem3_check,
    theorem6_check,
    theorem6_constants,
)
from cascade_scope.diagnostics.theorems import leq  # noqa: E402
from cascade_scope.fields import Grid, taylor_green  # noqa: E402
from cascade_scope.localization import make_time_cutoff  # noqa: E402
from cascade_scope.solver import ForceProfile, Trajectory, make_force  # noqa: E402


def _row(R: float, flux: float, fu: float = 0.0, n: int = 8) -> ScaleAverage:
    """Profile row whose balance-implied and measured fluxes both equal ``flux``."""
    return ScaleAverage(
        R=R, covering_id=f"lattice@R={R:.6g}", avg_energy=1.0, avg_diss=flux + fu, avg_flux=flux,
        avg_fsq=1.0, avg_fu=fu, avg_transport=0.0, avg_residual=0.0, avg_abs_residual=0.0,
        n=n, K1=4, K2=8,
    )


@pytest.fixture(scope="module")
def frozen_mode():
    """Taylor-Green mode held fixed over [0, 1] and forced along itself."""
    grid = Grid(16)
    u = taylor_green(grid)
    times = np.linspace(0.0, 1.0, 201)
    force = ForceProfile.from_field(u * 2.0)
    return Trajectory.from_fields(times, [u] * len(times), force, nu=0.1)


class TestScales:
    def test_taylor_scale(self):
        assert taylor_scale(2.0, 8.0, 1.0) == pytest.approx(0.5)

    def test_taylor_scale_needs_dissipation(self):
        with pytest.raises(ValueError):
            taylor_scale(1.0, 0.0, 1.0)

    def test_lemma_flags(self):
        assert TauScales(1.0, 2.0, tau0=1.0).lemma_holds
        assert not TauScales(1.0, 2.0, tau0=1.5).lemma_holds
        assert not TauScales(3.0, 2.0).ordered
        assert math.isnan(TauScales(1.0, 2.0).lemma_margin)

    def test_forced_run_satisfies_lemma(self, forced_run):
        glob = global_budget(forced_run, make_time_cutoff(0.5))
        taus = tau_scales_from_budget(glob)
        assert taus.ordered
        assert taus.lemma_holds

    def test_budget_and_snapshot_paths_agree(self, forced_run):
        eta = make_time_cutoff(0.5)
        glob = global_budget(forced_run, eta)
        a = tau_scales_from_budget(glob)
        b = tau_scales(forced_run, eta, glob.e0)
        assert b.tau_m1 == pytest.approx(a.tau_m1, rel=1e-12)
        assert b.tau_tilde_m1 == pytest.approx(a.tau_tilde_m1, rel=1e-12)

    def test_zero_energy_is_rejected(self, frozen_mode):
        with pytest.raises(ValueError):
            tau_scales(frozen_mode, make_time_cutoff(1.0), 0.0)

    def test_frozen_eigenmode(self, frozen_mode):
        eta = make_time_cutoff(1.0)
        glob = global_budget(frozen_mode, eta)
        m = eta.moments
        kappa_sq = 2.0
        tau0 = taylor_scale(glob.e0, glob.eps0_viscous, 0.1)
        assert tau0 ** 2 == pytest.approx(m["eta_delta"] / m["eta"] / (2.0 * kappa_sq), rel=1e-3)
        taus = tau_scales(frozen_mode, eta, glob.e0)
        assert taus.tau_tilde_m1 ** 2 == pytest.approx(2.0 * m["eta_2delta_m1"] / m["eta_delta"] / kappa_sq, rel=1e-3)


class TestNumbers:
    def test_unit_grashof(self):
        nums = adimensional_numbers(e0=1.0, fsq0=1.0, f_norm=1.0, nu=1.0, R0=1.0)
        assert nums.gr_periodic == 1.0 and nums.gr_local == 1.0 and nums.re == 1.0

    def test_doubling_viscosity_quarters_grashof(self):
        a = adimensional_numbers(1.0, 4.0, 3.0, 0.1, 2.0)
        b = adimensional_numbers(1.0, 4.0, 3.0, 0.2, 2.0)
        assert b.gr_periodic == pytest.approx(a.gr_periodic / 4.0)
        assert b.gr_local == pytest.approx(a.gr_local / 4.0)

    def test_saturation(self):
        rec = kolmogorov_saturation(e0=1.0, eps0=2.0, theta_f=0.5, R0=1.0)
        assert rec.K_meas == 2.0
        assert rec.K_threshold == pytest.approx(default_K_threshold(0.5))
        assert rec.saturated and rec.upper_ok

    def test_no_dissipation_is_unsaturated(self):
        rec = kolmogorov_saturation(e0=1.0, eps0=0.0, theta_f=0.5, R0=1.0)
        assert rec.K_meas == 0.0
        assert not rec.saturated

    def test_default_C_is_clamped(self):
        assert default_C(0.5, 0.2) == pytest.approx(0.1)
        assert 0 < default_C(100.0, 1.0) < 2.0 ** 1.5
        assert default_C(0.0, 1.0) > 0


class TestAlignment:
    def test_parallel_flow(self, frozen_mode):
        assert alignment_ratio(frozen_mode, make_time_cutoff(1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_force(self, frozen_mode):
        other = make_force(Grid(16), 3, 1.0, nu=0.1, mode="norm", shell="sphere")
        ratio = alignment_ratio(frozen_mode, make_time_cutoff(1.0), force=other.f)
        assert abs(ratio) < 1e-12

    def test_counterexample_separates_alignment_from_scale(self):
        grid = Grid(32)
        low = cauchy_schwarz_counterexample(grid, 2)
        high = cauchy_schwarz_counterexample(grid, 10)
        assert high.alignment > low.alignment
        assert high.ratio < low.ratio < 1.0
        # α = n^{-1/2} on the 2π box
        assert high.alignment == pytest.approx(1.0 / math.sqrt(1.1), rel=1e-12)

    def test_counterexample_needs_resolved_mode(self):
        with pytest.raises(ValueError):
            cauchy_schwarz_counterexample(Grid(16), 6)


class TestTheorem1:
    def test_hand_arithmetic(self):
        rec = theorem1_check(e0=1.0, eps0=1.0, F0=0.01, nu=1e-3, R0=1.0, C0=10.0, K1=4, K2=8)
        alpha0, beta0 = theorem1_constants(10.0, 8)
        assert alpha0 == pytest.approx(22.627417, rel=1e-6)
        assert beta0 == 640.0
        a, b = rec.hypotheses
        assert a.lhs == pytest.approx(0.22627417, rel=1e-6) and a.passed
        assert b.lhs == pytest.approx(0.64, rel=1e-12) and b.passed
        assert rec.conclusion["tau0"] == pytest.approx(math.sqrt(1e-3), rel=1e-12)
        assert rec.conclusion["range"][0] == pytest.approx(0.8, rel=1e-12)
        assert rec.conclusion["bracket"] == pytest.approx([1.0 / 16.0, 18.0])
        assert rec.status == "pass"

    def test_profile_rows_in_range_are_checked(self):
        rows = [_row(0.5, -5.0), _row(0.9, 1.0), _row(1.0, 2.0)]
        rec = theorem1_check(1.0, 1.0, 0.01, 1e-3, 1.0, 10.0, 4, 8, profile=rows)
        assert rec.conclusion["rows_checked"] == 2
        assert rec.status == "pass"

    def test_flux_outside_bracket_is_a_violation(self):
        rec = theorem1_check(1.0, 1.0, 0.01, 1e-3, 1.0, 10.0, 4, 8, profile=[_row(0.9, 20.0)])
        assert rec.status == "violation"
        assert {v["quantity"] for v in rec.violations} == {"balance_flux", "avg_flux"}

    def test_large_force_fails_hypothesis(self):
        rec = theorem1_check(1.0, 1.0, 1.0, 1e-3, 1.0, 10.0, 4, 8, profile=[_row(0.9, 20.0)])
        assert rec.status == "hypothesis_not_met"
        assert "range" not in rec.conclusion

    def test_unforced_hypothesis_holds_vacuously(self):
        rec = theorem1_check(1.0, 1.0, 0.0, 1e-3, 1.0, 10.0, 4, 8)
        assert rec.hypotheses[0].passed

    def test_short_horizon_is_a_hypothesis(self):
        rec = theorem1_check(1.0, 1.0, 0.01, 1e-3, 1.0, 10.0, 4, 8, T=10.0)
        assert rec.status == "hypothesis_not_met"

    @pytest.mark.parametrize("eps0", [0.5, 0.7, 1.0, 2.0, 10.0])
    def test_margins_grow_with_dissipation(self, eps0):
        low = theorem1_check(1.0, eps0, 0.01, 1e-3, 1.0, 10.0, 4, 8)
        high = theorem1_check(1.0, eps0 * 1.5, 0.01, 1e-3, 1.0, 10.0, 4, 8)
        for h_low, h_high in zip(low.hypotheses, high.hypotheses):
            assert h_high.margin > h_low.margin
            assert h_high.passed or not h_low.passed


class TestBounds:
    def test_theorem2_bound(self):
        rec = theorem2_check(e0=1.0, eps0=1.0, f_norm=1.0, nu=1.0, R0=1.0, T=10.0, C0=1.0)
        assert rec.conclusion["bound"] == pytest.approx(2.0 * math.sqrt(2.0))
        assert rec.status == "pass"

    def test_theorem2_violation(self):
        rec = theorem2_check(e0=1.0, eps0=5.0, f_norm=1.0, nu=1.0, R0=1.0, T=10.0, C0=1.0)
        assert rec.status == "violation"

    def test_theorem2_needs_attractor_flag(self):
        rec = theorem2_check(1.0, 5.0, 1.0, 1.0, 1.0, 10.0, 1.0, attractor_proximity=False)
        assert rec.status == "not_applicable"

    def test_theorem2_unforced(self):
        assert theorem2_check(1.0, 1.0, 0.0, 1.0, 1.0, 10.0, 1.0).status == "not_applicable"

    def test_theorem3_unforced(self):
        rec = theorem3_check(ForceProfile.zero(Grid(8)), 1.0, 0.1, 10.0, make_time_cutoff(10.0), 1.0)
        assert rec.status == "not_applicable"

    def test_theorem3_small_force_fails_hypothesis(self):
        force = make_force(Grid(16), 2, 1e-6, nu=0.1, mode="norm")
        rec = theorem3_check(force, 1.0, 0.1, 10.0, make_time_cutoff(10.0), 1.0)
        assert not rec.hypotheses[0].passed
        assert rec.status == "hypothesis_not_met"

    def test_apriori_unforced(self):
        rec = apriori_bounds_check(1.0, 1.0, ForceProfile.zero(Grid(8)), 0.1, 10.0, make_time_cutoff(10.0), 1.0)
        assert rec.status == "not_applicable"

    def test_saturated_brackets_are_ordered(self):
        br = saturated_scaling_bounds(theta_f=0.1, c=1.0, f_norm=2.0, R0=1.0)
        for lo, hi in br.values():
            assert lo <= hi

    def test_saturated_brackets_reject_c(self):
        with pytest.raises(ValueError):
            saturated_scaling_bounds(theta_f=0.1, c=3.0, f_norm=2.0, R0=1.0)


class TestTheorem6:
    def test_force_threshold(self):
        k = theorem6_constants(C0=10.0, K2=8, alpha_margin=0.5, C=1.0)
        assert k["force_threshold_factor"] * 0.1 * 1e-6 == pytest.approx(0.02048, rel=1e-12)
        rec = theorem6_check(e0=1.0, eps0=1.0, f_norm=1.0, theta_f=0.1, tau_f=1.0, tau_m1=1e-3, nu=1e-3,
                             R0=1.0, T=1e6, C0=10.0, K1=4, K2=8, C=1.0, alpha_margin=0.5)
        force_size = rec.hypotheses[0]
        assert force_size.lhs == pytest.approx(0.02048, rel=1e-12)
        assert force_size.passed

    def test_rough_force_fails_scale_hypothesis(self):
        rec = theorem6_check(1.0, 1.0, 1.0, 0.1, 1e-6, 1e-3, 1e-3, 1.0, 1e6, 10.0, 4, 8, 1.0, 0.5)
        ids = {h.id: h.passed for h in rec.hypotheses}
        assert not ids["force_scale"]
        assert rec.status == "hypothesis_not_met"

    def test_beta_shrinks_as_margin_grows(self):
        a = theorem6_constants(10.0, 8, 0.5, 1.0)["beta0"]
        b = theorem6_constants(10.0, 8, 0.9, 1.0)["beta0"]
        assert b < a

    @pytest.mark.parametrize("alpha, C", [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0), (0.5, 3.0)])
    def test_rejects_bad_constants(self, alpha, C):
        with pytest.raises(ValueError):
            theorem6_check(1.0, 1.0, 1.0, 0.1, 1.0, 1e-3, 1e-3, 1.0, 1e6, 10.0, 4, 8, C, alpha)

    def test_unforced_is_not_applicable(self):
        rec = theorem6_check(1.0, 1.0, 0.0, 0.1, 1.0, 1e-3, 1e-3, 1.0, 1e6, 10.0, 4, 8, 1.0, 0.5)
        assert rec.status == "not_applicable"


class TestForceAlignmentLemma:
    def test_bound_on_rows(self):
        # base = ‖f‖e0^{1/2}/R0^{3/2} = 1 and the bound is K K2 (τ₋₁/τ_f)(R0/R)³/n
        common = dict(e0=1.0, eps0=10.0, f_norm=1.0, R0=1.0, K=1.0, T=1e6, nu=1.0, C0=1.0, K2=8,
                      tau_m1=0.5, tau_f=1.0)
        ok = lemma_force_alignment_check(**common, profile=[_row(1.0, 0.0, fu=0.4)])
        bad = lemma_force_alignment_check(**common, profile=[_row(1.0, 0.0, fu=0.6)])
        assert ok.status == "pass" and ok.conclusion["rows_checked"] == 1
        assert bad.status == "violation"


class TestReport:
    def test_exit_codes(self):
        report = DiagnosticsReport()
        assert report.exit_code == EXIT_OK
        rec = TheoremRecord("theorem1", hypotheses=[leq("a", 2.0, 1.0)])
        report.theorems.append(rec)
        assert report.exit_code == EXIT_HYPOTHESIS
        report.add_invariant("divergence_free", False, 1.0)
        assert report.exit_code == EXIT_VIOLATION

    def test_not_applicable_does_not_change_exit_code(self):
        report = DiagnosticsReport()
        report.theorems.append(TheoremRecord("theorem2", hypotheses=[leq("T", 2.0, 1.0)], applicable=False))
        assert report.exit_code == EXIT_OK

    def test_json(self, tmp_path):
        report = DiagnosticsReport(scales={"tau0": np.float64(0.25)})
        report.add_invariant("global_flux_zero", True, np.float64(1e-14))
        path = report.write_json(tmp_path / "report.json")
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["scales"]["tau0"] == 0.25
        assert data["invariants"][0]["name"] == "global_flux_zero"
        assert data["exit_code"] == EXIT_OK
