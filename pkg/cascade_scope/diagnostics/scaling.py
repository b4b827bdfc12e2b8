"""
Grashof-number scaling across a sweep of runs.
"""

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np
import pandas as pd
from scipy import stats

from ..settings import get_logger

logger = get_logger("diagnostics")

SWEEP_COLUMNS = ["Gr", "e0", "eps0", "K_meas", "tau0", "tau_m1", "alignment"]
MIN_FIT_RUNS = 3
EXPECTED_SLOPES = {"e0": 1.0, "eps0": 1.5, "re": 0.5, "tau0": -0.25}
BRACKET_REL_TOL = 1e-9
SLOPE_TOLERANCE = 0.25


@dataclass
class RunSummary:
    """Per-run numbers the scaling analysis needs."""

    gr: float
    e0: float
    eps0: float
    f_norm: float
    theta_f: float
    nu: float
    R0: float
    re: float = float("nan")
    tau0: float = float("nan")
    tau_m1: float = float("nan")
    alignment: float = float("nan")
    apriori_ok: bool = True  # ‖f‖ ≥ σ_f, T condition and attractor flag

    @property
    def K_meas(self) -> float:
        return self.eps0 * self.R0 / self.e0 ** 1.5 if self.e0 > 0 else 0.0

    def to_row(self) -> dict:
        return {"Gr": self.gr, "e0": self.e0, "eps0": self.eps0, "K_meas": self.K_meas,
                "tau0": self.tau0, "tau_m1": self.tau_m1, "alignment": self.alignment}


def scaling_brackets(run: RunSummary, K: float) -> Dict[str, List[float]]:
    """
    The three two-sided brackets a run saturating with constant K must satisfy.

    eps0_force: ε0 vs ‖f‖e0^{1/2}/R0^{3/2}; e0: e0 vs ‖f‖/R0^{1/2};
    eps0_gr: ε0 vs ‖f‖^{3/2}/R0^{7/4}.
    """
    f, th, R0 = run.f_norm, run.theta_f, run.R0
    fe = f * math.sqrt(run.e0) / R0 ** 1.5
    f32 = f ** 1.5 / R0 ** 1.75
    return {
        "eps0_force": [K ** 1.5 * th ** 1.5 / 8.0 ** 0.25 * fe, 2.0 * math.sqrt(2.0) * fe],
        "e0": [th * f / math.sqrt(R0), 2.0 * math.sqrt(2.0) / K * f / math.sqrt(R0)],
        "eps0_gr": [K * th ** 1.5 * f32, 8.0 ** 1.25 / (K ** 1.5 * th) * f32],
    }


@dataclass
class SlopeFit:
    slope: float
    intercept: float
    stderr: float
    ci95: float
    expected: float

    def within(self, tolerance: float = SLOPE_TOLERANCE) -> bool:
        return abs(self.slope - self.expected) <= tolerance


@dataclass
class ScalingReport:
    K: float
    included: List[int] = field(default_factory=list)
    excluded: List[int] = field(default_factory=list)
    brackets: Dict[int, Dict[str, List[float]]] = field(default_factory=dict)
    violations: List[Dict] = field(default_factory=list)
    fits: Dict[str, SlopeFit] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "K": self.K,
            "included": list(self.included),
            "excluded": list(self.excluded),
            "brackets": {str(k): v for k, v in self.brackets.items()},
            "violations": list(self.violations),
            "fits": {k: asdict(v) for k, v in self.fits.items()},
            "notes": list(self.notes),
        }


def _fit(x: np.ndarray, y: np.ndarray, expected: float) -> SlopeFit:
    res = stats.linregress(np.log(x), np.log(y))
    dof = len(x) - 2
    ci = stats.t.ppf(0.975, dof) * res.stderr if dof > 0 else float("inf")
    return SlopeFit(float(res.slope), float(res.intercept), float(res.stderr), float(ci), expected)


def scaling_check(runs: Sequence[RunSummary], K: float) -> ScalingReport:
    """
    Check the saturated-run brackets and fit log-log slopes against Gr.

    Runs whose measured constant is below K are excluded from both. The fit
    needs at least three included runs.
    """
    if not K > 0:
        raise ValueError(f"K must be positive, got {K}")
    report = ScalingReport(K=K)
    for i, run in enumerate(runs):
        if run.K_meas < K:
            report.excluded.append(i)
            continue
        report.included.append(i)
        br = scaling_brackets(run, K)
        report.brackets[i] = br
        if not run.apriori_ok:
            continue
        values = {"eps0_force": run.eps0, "e0": run.e0, "eps0_gr": run.eps0}
        for key, (lo, hi) in br.items():
            v = values[key]
            if not lo * (1 - BRACKET_REL_TOL) <= v <= hi * (1 + BRACKET_REL_TOL):
                report.violations.append({"run": i, "quantity": key, "value": v, "bracket": [lo, hi]})

    if len(report.included) < MIN_FIT_RUNS:
        report.notes.append(f"{len(report.included)} saturated runs; slope fit needs {MIN_FIT_RUNS}")
        return report

    sel = [runs[i] for i in report.included]
    gr = np.array([r.gr for r in sel])
    series = {
        "e0": np.array([r.e0 for r in sel]),
        "eps0": np.array([r.eps0 for r in sel]),
        "re": np.array([r.re for r in sel]),
        "tau0": np.array([r.tau0 for r in sel]),
    }
    for key, y in series.items():
        if np.all(np.isfinite(y)) and np.all(y > 0):
            report.fits[key] = _fit(gr, y, EXPECTED_SLOPES[key])
            logger.info("slope %s vs Gr: %.3f ± %.3f (expected %.2f)",
                        key, report.fits[key].slope, report.fits[key].ci95, EXPECTED_SLOPES[key])
    return report


def sweep_frame(runs: Sequence[RunSummary]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in runs], columns=SWEEP_COLUMNS)


def write_sweep(runs: Sequence[RunSummary], path: Union[str, Path]) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    sweep_frame(runs).to_csv(p, index=False, float_format="%.17g")
    return p
