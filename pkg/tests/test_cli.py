"""
End-to-end tests of the command line: simulate, analyze, sweep, toy1d, verify.

Runs are tiny (16³, half a time unit) so every theorem's horizon
hypothesis fails and a clean analysis exits with code 2.
"""

import json
import math
import shutil
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

from cascade_scope.cli import AnalysisConfig, build_parser, load_run, main  # noqa: E402
from cascade_scope.cli.cascade_cli import _analysis_overrides, cutoff_row, verify_cutoffs  # noqa: E402
from cascade_scope.diagnostics import EXIT_HYPOTHESIS, EXIT_OK, EXIT_VIOLATION  # noqa: E402
from cascade_scope.errors import ConfigError, SnapshotIOError  # noqa: E402
from cascade_scope.localization import CutoffFamily, make_space_cutoff  # noqa: E402

RUN_CONFIG = {
    "grid": {"N": 16},
    "flow": {"nu": 0.1},
    "time": {"dt": 0.01, "T": 0.5, "spin_up": 0.0, "snapshot_every": 0.01, "log_every": 0},
    "forcing": {"k_f": 2, "mode": "gr", "target": 2000.0, "seed": 0},
    "initial": {"kind": "random", "amplitude": 0.5, "k_max": 3.0, "seed": 1},
    "checks": {"theorem_checks": False},
    "analysis": {"coverings": 1, "balance_tol": 0.1},
}


def _write_config(directory: Path, data: dict = RUN_CONFIG) -> Path:
    path = directory / "config.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


@pytest.fixture(scope="module")
def saved_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    config = _write_config(root)
    run_dir = root / "run"
    assert main(["simulate", "--config", str(config), "--out", str(run_dir)]) == EXIT_OK
    return run_dir


class TestSimulate:
    def test_run_layout(self, saved_run):
        for name in ("manifest.json", "config.json", "force.bin", "series.csv"):
            assert (saved_run / name).exists()
        assert len(list((saved_run / "snapshots").glob("*.bin"))) == 51

    def test_config_is_echoed_with_defaults(self, saved_run):
        echoed = json.loads((saved_run / "config.json").read_text(encoding="utf-8"))
        assert echoed["flow"]["nu"] == 0.1
        assert echoed["analysis"]["coverings"] == 1
        assert echoed["analysis"]["delta"] == 0.75

    def test_reload(self, saved_run):
        traj = load_run(saved_run)
        assert len(traj) == 51
        assert traj.nu == 0.1
        assert traj.force.k_f == 2

    def test_bad_config_exits_with_error(self, tmp_path):
        config = _write_config(tmp_path, {**RUN_CONFIG, "flow": {"nu": -1.0}})
        assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "run")]) == EXIT_VIOLATION


class TestAnalyze:
    def test_exit_code_and_outputs(self, saved_run):
        assert main(["analyze", "--run", str(saved_run)]) == EXIT_HYPOTHESIS
        out = saved_run / "analysis"
        report = json.loads((out / "report.json").read_text(encoding="utf-8"))
        assert all(inv["passed"] for inv in report["invariants"])
        names = {inv["name"] for inv in report["invariants"]}
        assert {"divergence_free", "global_flux_zero", "partition_telescoping", "tau_tilde_lemma"} <= names
        statuses = {t["name"]: t["status"] for t in report["theorems"]}
        assert statuses["theorem1"] == "hypothesis_not_met"
        # no scale between 4dx and R0 at N = 16
        assert pd.read_csv(out / "profile.csv").empty
        manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["config"]["analysis"]["coverings"] == 1
        assert (out / "summary.json").exists()

    def test_analysis_is_reproducible(self, saved_run):
        main(["analyze", "--run", str(saved_run)])
        first = (saved_run / "analysis" / "report.json").read_text(encoding="utf-8")
        main(["analyze", "--run", str(saved_run)])
        assert (saved_run / "analysis" / "report.json").read_text(encoding="utf-8") == first

    def test_run_files_are_left_untouched(self, saved_run):
        before = {p: p.read_bytes() for p in (saved_run / "manifest.json", saved_run / "series.csv")}
        main(["analyze", "--run", str(saved_run), "--theorems", "1,2"])
        for path, content in before.items():
            assert path.read_bytes() == content

    def test_theorem_selection(self, saved_run):
        main(["analyze", "--run", str(saved_run), "--theorems", "2"])
        report = json.loads((saved_run / "analysis" / "report.json").read_text(encoding="utf-8"))
        assert [t["name"] for t in report["theorems"]] == ["theorem2"]

    def test_missing_snapshot(self, saved_run, tmp_path):
        broken = tmp_path / "broken"
        shutil.copytree(saved_run, broken)
        (broken / "snapshots" / "snap_00010.bin").unlink()
        with pytest.raises(SnapshotIOError):
            load_run(broken)
        assert main(["analyze", "--run", str(broken)]) == EXIT_VIOLATION

    def test_missing_run(self, tmp_path):
        assert main(["analyze", "--run", str(tmp_path / "nowhere")]) == EXIT_VIOLATION

    def test_underresolved_scale_is_rejected(self, saved_run):
        assert main(["analyze", "--run", str(saved_run), "--scales", "1.0"]) == EXIT_VIOLATION


def test_sweep(tmp_path):
    config = _write_config(tmp_path)
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", str(config), "--gr", "500,1000", "--out", str(out)])
    assert code == EXIT_HYPOTHESIS
    assert (out / "gr_500" / "analysis" / "report.json").exists()
    df = pd.read_csv(out / "sweep.csv")
    assert len(df) == 2
    assert df["Gr"].tolist() == pytest.approx([500.0, 1000.0])
    scaling = json.loads((out / "scaling.json").read_text(encoding="utf-8"))
    assert scaling["fits"] == {}


class TestToy1d:
    def test_csv_output(self, tmp_path):
        path = tmp_path / "toy.csv"
        assert main(["toy1d", "--N", "20", "--scales", "0.5", "--out", str(path)]) == EXIT_OK
        df = pd.read_csv(path)
        assert list(df.columns) == ["R", "strategy", "average"]
        assert sorted(df["strategy"]) == ["adversarial+", "adversarial-", "lattice"]

    def test_invalid_frequency(self, tmp_path):
        assert main(["toy1d", "--N", "5", "--scales", "0.5", "--out", str(tmp_path / "t.csv")]) == EXIT_VIOLATION


@pytest.mark.parametrize("component", ["cutoffs", "covering", "spectral"])
def test_verify(component):
    assert main(["verify", "--component", component]) == EXIT_OK


class TestCutoffTable:
    def test_columns_and_scales(self):
        df = verify_cutoffs(N=8)
        assert list(df.columns) == [
            "scale", "n", "C0_grad", "C0_lap", "grad_ratio", "lap_ratio", "bounds_pass", "sandwich_pass", "passed",
        ]
        R0 = math.pi / 2.0
        assert df["scale"].tolist() == pytest.approx([R0, R0 / 2, R0 / 4, R0 / 8])
        assert df["passed"].all() and df["sandwich_pass"].all()
        # one constant for every scale
        assert df["C0_grad"].nunique() == 1 and df["C0_lap"].nunique() == 1

    def test_single_ball_fails_the_sandwich_column(self):
        coords = (np.arange(32) * (2.0 * math.pi / 32),) * 3
        family = CutoffFamily((make_space_cutoff((1.0, 1.0, 1.0), R=0.5),), 0.5, 0.75)
        row = cutoff_row(family, coords, K2=1)
        assert row["bounds_pass"]
        assert not row["sandwich_pass"]
        assert not row["passed"]


class TestParser:
    def test_analyze_flags(self):
        args = build_parser().parse_args(
            ["analyze", "--run", "r", "--scales", "0.5,0.25", "--theorems", "1,6", "--alpha-margin", "0.3"]
        )
        overrides = _analysis_overrides(args)
        assert overrides["scales"] == [0.5, 0.25]
        assert overrides["theorems"] == [1, 6]
        assert overrides["alpha_margin"] == 0.3
        assert overrides["coverings"] is None

    def test_command_is_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_unknown_component(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["verify", "--component", "solver"])


class TestAnalysisConfig:
    def test_defaults(self):
        cfg = AnalysisConfig.from_dict(None)
        assert cfg.theorems == [1, 2, 3, 4, 6]
        assert cfg.scales is None

    def test_overrides_skip_none(self):
        cfg = AnalysisConfig(coverings=4).with_overrides(coverings=None, alpha_margin=0.2)
        assert cfg.coverings == 4 and cfg.alpha_margin == 0.2

    @pytest.mark.parametrize("data", [
        {"coverage": 3},
        {"alpha_margin": 1.0},
        {"theorems": [5]},
        {"C": 3.0},
        {"delta": 0.5},
        {"scales": [0.5, -0.1]},
        {"quadrature": "gauss"},
    ])
    def test_rejects(self, data):
        with pytest.raises(ConfigError):
            AnalysisConfig.from_dict(data)
