"""
Tests for the global and localized energy budgets.
"""

import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from cascade_scope.budget import (  # noqa: E402
    PROFILE_COLUMNS,
    flux_bracket,
    flux_profile,
    force_work_average,
    global_budget,
    global_flux_zero_check,
    kk_average,
    local_budgets,
    partition_telescoping_check,
    positivity_sandwich_check,
    profile_frame,
    sandwich_checks,
    time_localized_energy_inequality,
    write_profile,
)
from cascade_scope.budget.local_budget import _SampleCache  # noqa: E402
from cascade_scope.errors import InsufficientDataError  # noqa: E402
from cascade_scope.fields import Grid  # noqa: E402
from cascade_scope.localization import (  # noqa: E402
    Covering,
    certify_profile,
    family_for_covering,
    lattice_covering,
    make_space_cutoff,
    make_time_cutoff,
    theorem_constant,
)

SCALE = 1.2


@pytest.fixture(scope="module")
def eta():
    return make_time_cutoff(0.5)


@pytest.fixture(scope="module")
def covering_32(forced_run_32):
    grid = forced_run_32.grid
    return lattice_covering(grid.L, SCALE, grid_or_coords=grid)


@pytest.fixture(scope="module")
def average_32(forced_run_32, covering_32, eta):
    family = family_for_covering(covering_32)
    return kk_average(local_budgets(forced_run_32, family.cutoffs, eta), covering_32)


class TestGlobalBudget:
    def test_signs(self, forced_run, eta):
        glob = global_budget(forced_run, eta)
        assert glob.e0 > 0 and glob.eps0_viscous > 0 and glob.fsq0 > 0
        assert glob.e0_local >= glob.e0
        assert glob.F0 == pytest.approx(math.sqrt(glob.fsq0))

    def test_energy_inequality(self, forced_run, eta):
        record = time_localized_energy_inequality(global_budget(forced_run, eta), rel_tol=5e-2)
        assert record.passed

    def test_series_quadrature_is_close(self, forced_run, eta):
        snaps = global_budget(forced_run, eta)
        series = global_budget(forced_run, eta, quadrature="series")
        assert series.quadrature == "series"
        assert series.e0 == pytest.approx(snaps.e0, rel=1e-2)

    def test_rejects_unknown_quadrature(self, forced_run, eta):
        with pytest.raises(ValueError):
            global_budget(forced_run, eta, quadrature="simpson")

    def test_short_trajectory(self, forced_run):
        with pytest.raises(InsufficientDataError):
            global_budget(forced_run, make_time_cutoff(1.0))

    def test_unforced_run_does_no_work(self, unforced_run, eta):
        glob = global_budget(unforced_run, eta)
        assert glob.force_work == 0.0
        assert glob.fsq0 == 0.0


def test_global_flux_vanishes(forced_run, eta):
    report = global_flux_zero_check(forced_run, eta)
    assert report.passed
    assert len(report.per_snapshot) == len(forced_run)


def test_partition_of_unity_telescopes(forced_run, eta):
    report = partition_telescoping_check(forced_run, eta)
    assert report.passed, {k: report.error(k) for k in report.sums}


class TestScaleAverages:
    def test_covering_size(self, covering_32):
        # m = ceil(√3 · 2π / 2.4) = 5
        assert covering_32.n == 125
        assert covering_32.valid

    def test_positivity_sandwiches(self, average_32, forced_run_32, covering_32, eta):
        glob = global_budget(forced_run_32, eta)
        checks = {c.quantity: c for c in sandwich_checks(average_32, glob, covering_32)}
        assert set(checks) == {"energy", "dissipation", "fsq", "flux"}
        assert not checks["flux"].applicable
        assert all(c.passed for c in checks.values())

    def test_flux_bracket_holds(self, average_32, forced_run_32, covering_32, eta):
        glob = global_budget(forced_run_32, eta)
        C0 = theorem_constant(max(certify_profile(eta.delta, 3)), eta)
        lo, hi = flux_bracket(glob, SCALE, covering_32.n, C0, covering_32.K2)
        slack = 1e-10 * max(abs(lo), abs(hi))
        assert lo - slack <= average_32.balance_flux <= hi + slack

    def test_force_work_majorant(self, forced_run_32, covering_32, eta):
        assert force_work_average(forced_run_32, covering_32, eta).passed

    def test_profile_rows(self, forced_run_32, covering_32, eta, average_32, tmp_path):
        rows = flux_profile(forced_run_32, [covering_32], eta)
        assert rows[0].avg_flux == pytest.approx(average_32.avg_flux, rel=1e-12)
        path = write_profile(rows, tmp_path / "profile.csv")
        df = pd.read_csv(path)
        assert list(df.columns[: len(PROFILE_COLUMNS)]) == PROFILE_COLUMNS
        assert df.loc[0, "n"] == 125


class TestProfileGuards:
    def test_rejects_underresolved_scale(self, forced_run, eta):
        # at N = 16, 4dx equals R0
        cov = Covering(1.0, 2.0 * math.pi, np.zeros((1, 3)), 1, 1, math.pi / 2.0)
        with pytest.raises(ValueError):
            flux_profile(forced_run, [cov], eta)

    def test_rejects_scale_above_integral_scale(self, forced_run_32, eta):
        cov = Covering(1.6, 2.0 * math.pi, np.zeros((1, 3)), 1, 1, math.pi / 2.0)
        with pytest.raises(ValueError):
            flux_profile(forced_run_32, [cov], eta)

    def test_empty_profile_frame(self):
        assert list(profile_frame([]).columns) == PROFILE_COLUMNS


class TestAveraging:
    def test_empty_covering(self):
        cov = Covering(1.0, 2.0 * math.pi, np.zeros((0, 3)), 1, 1, math.pi / 2.0)
        with pytest.raises(ValueError):
            kk_average([], cov)

    def test_count_mismatch(self, average_32, covering_32, forced_run_32, eta):
        family = family_for_covering(covering_32)
        budgets = local_budgets(forced_run_32, family.cutoffs[:3], eta)
        with pytest.raises(ValueError):
            kk_average(budgets, covering_32)

    def test_sandwich_bounds(self):
        # (R0/R)³/n = 1 here, so the inner bracket is [Q0, K2 Q0]
        check = positivity_sandwich_check("energy", 1.5, 1.0, n=8, R=0.5, R0=1.0, K1=2, K2=4)
        assert check.inner == (1.0, 4.0)
        assert check.outer == (0.5, 4.0)
        assert check.passed
        assert not positivity_sandwich_check("energy", 5.0, 1.0, n=8, R=0.5, R0=1.0, K1=2, K2=4).passed


def _budget_rows(budgets):
    return np.array([[b.energy, b.dissipation, b.flux, b.force_work, b.transport, b.fsq] for b in budgets])


class TestThreadedPairings:
    def test_workers_do_not_change_budgets(self, forced_run, eta):
        grid = forced_run.grid
        family = family_for_covering(lattice_covering(grid.L, grid.R0, grid_or_coords=grid))
        serial = local_budgets(forced_run, family.cutoffs, eta, workers=1)
        threaded = local_budgets(forced_run, family.cutoffs, eta, workers=4)
        np.testing.assert_allclose(_budget_rows(threaded), _budget_rows(serial), rtol=1e-13, atol=1e-15)

    def test_sample_cache_respects_its_budget_under_contention(self):
        coords = (Grid(16).x,) * 3
        cutoffs = [make_space_cutoff((math.pi, math.pi, math.pi), R=0.5) for _ in range(10)]
        size = cutoffs[0].sample(coords).psi.nbytes * 5
        cache = _SampleCache(cutoffs, coords, limit=3 * size)
        with ThreadPoolExecutor(max_workers=8) as pool:
            list(pool.map(cache.get, [i for _ in range(20) for i in range(10)]))
        assert len(cache.store) == 3
        assert cache.used == 3 * size <= cache.limit
        first = next(iter(cache.store))
        assert cache.get(first) is cache.store[first]
