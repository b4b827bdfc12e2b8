"""
Evaluators for the cascade, energy-bound and scaling theorems.

Every evaluator is a pure function of numbers (and profile rows) returning a
TheoremRecord.  A failed hypothesis is data, not an error: the record lists
each hypothesis with its two sides and margin, and the conclusions are only
asserted when every hypothesis holds.  A conclusion that fails while its
hypotheses hold is recorded as a violation.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

from ..solver.forcing import ForceProfile, force_shape_factors
from ..localization.cutoffs import TimeCutoff
from ..settings import get_logger

logger = get_logger("diagnostics")

SQRT2 = math.sqrt(2.0)
CONCLUSION_REL_TOL = 1e-6

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_HYPOTHESIS = 2


@dataclass
class HypothesisRecord:
    """One inequality lhs ≤ rhs."""

    id: str
    lhs: float
    rhs: float
    passed: bool
    margin: float
    note: str = ""


def leq(id: str, lhs: float, rhs: float, note: str = "") -> HypothesisRecord:
    return HypothesisRecord(id, float(lhs), float(rhs), bool(lhs <= rhs), float(rhs - lhs), note)


@dataclass
class TheoremRecord:
    name: str
    hypotheses: List[HypothesisRecord] = field(default_factory=list)
    conclusion: Dict = field(default_factory=dict)
    violations: List[Dict] = field(default_factory=list)
    applicable: bool = True
    notes: List[str] = field(default_factory=list)

    @property
    def hypotheses_met(self) -> bool:
        return self.applicable and all(h.passed for h in self.hypotheses)

    @property
    def status(self) -> str:
        if not self.applicable:
            return "not_applicable"
        if self.violations:
            return "violation"
        return "pass" if self.hypotheses_met else "hypothesis_not_met"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "hypotheses": [asdict(h) for h in self.hypotheses],
            "conclusion": {**self.conclusion, "violations": list(self.violations)},
            "notes": list(self.notes),
        }


def _within(value: float, lo: float, hi: float, slack: float = 0.0) -> bool:
    return lo - slack <= value <= hi + slack


def _bracket_rows(rows: Iterable, R_lo: float, R_hi: float, lo: float, hi: float,
                  eps_inf: float = 0.0) -> tuple:
    """
    Check every profile row with R in [R_lo, R_hi] against [lo, hi].

    The balance-implied flux ⟨ε⟩ − ⟨tr⟩ − ⟨fw⟩ is checked exactly, except that
    the lower end gives way by the positive global residual ``eps_inf`` (the
    localized dissipation is viscous only).  The measured flux is also given
    the row's mean |residual| as slack.
    """
    checked, violations = 0, []
    for row in rows:
        if not R_lo * (1.0 - 1e-12) <= row.R <= R_hi * (1.0 + 1e-12):
            continue
        checked += 1
        slack = CONCLUSION_REL_TOL * max(abs(lo), abs(hi))
        implied = row.balance_flux
        if not _within(implied, lo - eps_inf, hi, slack):
            violations.append({"R": row.R, "covering_id": row.covering_id, "quantity": "balance_flux",
                               "value": implied, "bracket": [lo, hi]})
        if not _within(row.avg_flux, lo - eps_inf, hi, slack + row.avg_abs_residual):
            violations.append({"R": row.R, "covering_id": row.covering_id, "quantity": "avg_flux",
                               "value": row.avg_flux, "bracket": [lo, hi]})
    return checked, violations


# ----------------------------------------------------------------------
# Cascade on a general integral domain
# ----------------------------------------------------------------------

def theorem1_constants(C0: float, K2: float) -> tuple:
    """(α0, β0) = (√8 K2, 8 C0 K2)."""
    return math.sqrt(8.0) * K2, 8.0 * C0 * K2


def theorem1_check(e0: float, eps0: float, F0: float, nu: float, R0: float, C0: float,
                   K1: float, K2: float, profile: Sequence = (), T: Optional[float] = None,
                   eps_inf: float = 0.0) -> TheoremRecord:
    """
    Hypotheses α0 F0 e0^{1/2} ≤ ε0 and β0 ν e0/R0² ≤ ε0; conclusion
    ε0/(4K1) ≤ ⟨Φ⟩_R ≤ 9K2ε0/4 on [√β0 τ0, R0].

    ``e0`` is the η^{2δ−1}-weighted energy of the integral domain.
    """
    alpha0, beta0 = theorem1_constants(C0, K2)
    rec = TheoremRecord("theorem1")
    rec.hypotheses.append(leq("a", alpha0 * F0 * math.sqrt(max(e0, 0.0)), eps0))
    rec.hypotheses.append(leq("b", beta0 * nu * e0 / R0 ** 2, eps0))
    if T is not None:
        rec.hypotheses.append(leq("T", R0 ** 2 / nu, T))
    rec.conclusion.update({"alpha0": alpha0, "beta0": beta0})
    if not rec.hypotheses_met or eps0 <= 0:
        return rec
    tau0 = math.sqrt(nu * e0 / eps0)
    lo, hi = eps0 / (4.0 * K1), 9.0 * K2 * eps0 / 4.0
    R_start = math.sqrt(beta0) * tau0
    checked, violations = _bracket_rows(profile, R_start, R0, lo, hi, eps_inf)
    rec.conclusion.update({"tau0": tau0, "range": [R_start, R0], "bracket": [lo, hi], "rows_checked": checked})
    rec.violations.extend(violations)
    return rec


# ----------------------------------------------------------------------
# Bounds on the periodic box
# ----------------------------------------------------------------------

def theorem2_check(e0: float, eps0: float, f_norm: float, nu: float, R0: float, T: float, C0: float,
                   attractor_proximity: bool = True) -> TheoremRecord:
    """
    ε0 ≤ 2√2 (‖f‖/R0^{3/2}) e0^{1/2} under T ≥ (2C0/π²)R0²/ν on the attractor.
    """
    rec = TheoremRecord("theorem2")
    if not attractor_proximity:
        rec.applicable = False
        rec.notes.append("attractor-proximity flag unset; bound not applicable")
    if f_norm == 0:
        rec.applicable = False
        rec.notes.append("unforced flow; bound degenerates")
    rec.hypotheses.append(leq("T", 2.0 * C0 / math.pi ** 2 * R0 ** 2 / nu, T))
    bound = 2.0 * SQRT2 * f_norm / R0 ** 1.5 * math.sqrt(max(e0, 0.0))
    rec.conclusion.update({"bound": bound, "eps0": eps0, "margin": bound - eps0})
    rec.notes.append("attractor membership is checked through the post-spin-up bound on ||u||^2")
    if rec.hypotheses_met and eps0 > bound * (1.0 + CONCLUSION_REL_TOL):
        rec.violations.append({"quantity": "eps0", "value": eps0, "bound": bound})
    return rec


def theorem3_check(force: ForceProfile, e0: float, nu: float, T: float, eta: TimeCutoff, C0: float,
                   agmon: Optional[float] = None, R0: Optional[float] = None) -> TheoremRecord:
    """
    Hypothesis ‖f‖ ≥ σ_f; conclusion e0 ≥ θ_f ‖f‖/R0^{1/2}.

    Raises:
        ValueError: if ‖A^{1/2}f‖ is not available (zero or non-finite).
    """
    rec = TheoremRecord("theorem3")
    if force.is_zero:
        rec.applicable = False
        rec.notes.append("unforced flow")
        return rec
    if not (math.isfinite(force.norm_half) and force.norm_half > 0):
        raise ValueError("theorem 3 needs a force with finite nonzero ||A^{1/2} f||")
    R0 = force.grid.R0 if R0 is None else R0
    shape = force_shape_factors(force, eta, nu, T, C0, agmon=agmon, R0=R0)
    rec.hypotheses.append(leq("force_size", shape.sigma_f, force.norm))
    bound = shape.theta_f * force.norm / math.sqrt(R0)
    rec.conclusion.update({"sigma_f": shape.sigma_f, "theta_f": shape.theta_f, "gamma_f": shape.gamma_f,
                           "bound": bound, "e0": e0})
    if rec.hypotheses_met and e0 < bound * (1.0 - CONCLUSION_REL_TOL):
        rec.violations.append({"quantity": "e0", "value": e0, "bound": bound})
    return rec


def apriori_bounds_check(e0: float, eps0: float, force: ForceProfile, nu: float, T: float,
                         eta: TimeCutoff, C0: float, attractor_proximity: bool = True,
                         agmon: Optional[float] = None, R0: Optional[float] = None) -> TheoremRecord:
    """
    One-sided Kolmogorov bounds under ‖f‖ ≥ σ_f and T ≥ (2C0/π²)R0²/ν:

        ε0 ≤ 2√2 ‖f‖ e0^{1/2}/R0^{3/2},  e0 ≥ θ_f ‖f‖/R0^{1/2},
        ε0 ≤ (2√2/θ_f) e0^{3/2}/R0.
    """
    rec = TheoremRecord("apriori_bounds")
    if force.is_zero or not attractor_proximity:
        rec.applicable = False
        rec.notes.append("needs a nonzero force and the attractor-proximity flag")
        return rec
    R0 = force.grid.R0 if R0 is None else R0
    shape = force_shape_factors(force, eta, nu, T, C0, agmon=agmon, R0=R0)
    rec.hypotheses.append(leq("force_size", shape.sigma_f, force.norm))
    rec.hypotheses.append(leq("T", 2.0 * C0 / math.pi ** 2 * R0 ** 2 / nu, T))
    bounds = {
        "eps0_force": 2.0 * SQRT2 * force.norm / R0 ** 1.5 * math.sqrt(e0),
        "e0_lower": shape.theta_f * force.norm / math.sqrt(R0),
        "eps0_energy": 2.0 * SQRT2 / shape.theta_f * e0 ** 1.5 / R0,
    }
    rec.conclusion.update({"theta_f": shape.theta_f, "sigma_f": shape.sigma_f, **bounds})
    if rec.hypotheses_met:
        tol = 1.0 + CONCLUSION_REL_TOL
        if eps0 > bounds["eps0_force"] * tol:
            rec.violations.append({"quantity": "eps0", "value": eps0, "bound": bounds["eps0_force"]})
        if e0 * tol < bounds["e0_lower"]:
            rec.violations.append({"quantity": "e0", "value": e0, "bound": bounds["e0_lower"]})
        if eps0 > bounds["eps0_energy"] * tol:
            rec.violations.append({"quantity": "eps0", "value": eps0, "bound": bounds["eps0_energy"]})
    return rec


def saturated_scaling_bounds(theta_f: float, c: float, f_norm: float, R0: float) -> Dict[str, List[float]]:
    """
    Brackets when ε0 ≤ (2√2/θ_f)e0^{3/2}/R0 is saturated with K = c/θ_f, 0 < c < 2√2.

    Returns ``e0`` and ``eps0`` brackets in terms of ‖f‖, and the ε0/(‖f‖e0^{1/2})
    factor bracket ``eps0_over_force``.
    """
    if not 0 < c < 2.0 * SQRT2:
        raise ValueError(f"c must lie in (0, 2*sqrt(2)), got {c}")
    fe = f_norm / math.sqrt(R0)
    f32 = f_norm ** 1.5 / R0 ** 1.75
    return {
        "e0": [theta_f * fe, 2.0 * SQRT2 / c * theta_f * fe],
        "eps0": [c * math.sqrt(theta_f) * f32, 8.0 ** 1.25 / c ** 1.5 * math.sqrt(theta_f) * f32],
        "eps0_over_force": [c ** 1.5 / 8.0 ** 0.25 / R0 ** 1.5, 2.0 * SQRT2 / R0 ** 1.5],
    }


# ----------------------------------------------------------------------
# Global cascade on the periodic box
# ----------------------------------------------------------------------

def lemma_force_alignment_check(e0: float, eps0: float, f_norm: float, R0: float, K: float, T: float,
                                nu: float, C0: float, K2: float, tau_m1: float, tau_f: float,
                                profile: Sequence = (), attractor_proximity: bool = True) -> TheoremRecord:
    """
    Hypotheses (2√2/K)‖f‖e0^{1/2}/R0^{3/2} ≤ ε0 and T ≥ 4KC0R0²/(π²ν); conclusion
    |⟨(f,u)⟩_R| ≤ K K2 (τ₋₁/τ_f)(R0/R)³(1/n)‖f‖e0^{1/2}/R0^{3/2} for every row.
    """
    rec = TheoremRecord("lemma_force_alignment")
    if f_norm == 0 or not attractor_proximity:
        rec.applicable = False
        rec.notes.append("needs a nonzero force and the attractor-proximity flag")
        return rec
    base = f_norm * math.sqrt(max(e0, 0.0)) / R0 ** 1.5
    rec.hypotheses.append(leq("dissipation", 2.0 * SQRT2 / K * base, eps0))
    rec.hypotheses.append(leq("T", 4.0 * K * C0 / math.pi ** 2 * R0 ** 2 / nu, T))
    rec.conclusion["K"] = K
    if not rec.hypotheses_met:
        return rec
    checked = 0
    for row in profile:
        bound = K * K2 * tau_m1 / tau_f * (R0 / row.R) ** 3 / row.n * base
        checked += 1
        if abs(row.avg_fu) > bound * (1.0 + CONCLUSION_REL_TOL):
            rec.violations.append({"R": row.R, "covering_id": row.covering_id, "quantity": "avg_fu",
                                   "value": row.avg_fu, "bound": bound})
    rec.conclusion["rows_checked"] = checked
    return rec


def theorem6_constants(C0: float, K2: float, alpha_margin: float, C: float) -> Dict[str, float]:
    return {
        "force_threshold_factor": 8.0 * C0 ** 2 * K2 ** 2 / (C ** 4 * alpha_margin ** 2),
        "T_factor": 2.0 ** 3.25 * C0 / (math.pi ** 2 * C ** 1.5),
        "tau_factor": 2.0 ** 2.75 * K2 / (alpha_margin * C ** 1.5),
        "beta0": math.sqrt(2.0 * C0 * K2 / alpha_margin),
        "K_lemma": 1.0 / (2.0 ** 0.75 * C ** 1.5),
    }


def default_C(K_meas: float, theta_f: float) -> float:
    """K_meas·θ_f clamped into (0, 2^{3/2})."""
    top = 2.0 ** 1.5
    return min(max(K_meas * theta_f, 1e-12), top * (1.0 - 1e-9))


def theorem6_check(e0: float, eps0: float, f_norm: float, theta_f: float, tau_f: float, tau_m1: float,
                   nu: float, R0: float, T: float, C0: float, K1: float, K2: float, C: float,
                   alpha_margin: float, profile: Sequence = (),
                   attractor_proximity: bool = True, eps_inf: float = 0.0) -> TheoremRecord:
    """
    Global periodic cascade.

    Hypotheses: ‖f‖ ≥ 2³C0²K2²/(C⁴α²)·θ_f·ν²/R0^{3/2}; T ≥ 2^{13/4}C0/(π²C^{3/2})·R0²/ν;
    (C/θ_f)e0^{3/2}/R0 ≤ ε0; 2^{11/4}K2/(αC^{3/2})·τ₋₁ ≤ τ_f.
    Conclusions: (1−α)ε0/K1 ≤ ⟨Φ⟩_R ≤ K2(1+α)ε0 on [β0τ0, R0] with
    β0 = (2C0K2/α)^{1/2}, and the Taylor-scale sandwich
    (C^{3/2}/2^{15/4})θ_f^{1/2}νR0^{5/4}/‖f‖^{1/2} ≤ τ0² ≤ (2^{3/2}/C²)θ_f^{1/2}νR0^{5/4}/‖f‖^{1/2}.
    """
    if not 0 < alpha_margin < 1:
        raise ValueError(f"alpha_margin must lie in (0, 1), got {alpha_margin}")
    if not 0 < C < 2.0 ** 1.5:
        raise ValueError(f"C must lie in (0, 2^(3/2)), got {C}")
    rec = TheoremRecord("theorem6")
    rec.notes.append("suitable and Leray-Hopf solution assumed by regularity of the discrete flow")
    if f_norm == 0 or not attractor_proximity:
        rec.applicable = False
        rec.notes.append("needs a nonzero force and the attractor-proximity flag")
        return rec
    k = theorem6_constants(C0, K2, alpha_margin, C)
    rec.hypotheses.append(leq("force_size", k["force_threshold_factor"] * theta_f * nu ** 2 / R0 ** 1.5, f_norm))
    rec.hypotheses.append(leq("T", k["T_factor"] * R0 ** 2 / nu, T))
    rec.hypotheses.append(leq("kolmogorov", C / theta_f * e0 ** 1.5 / R0, eps0))
    rec.hypotheses.append(leq("force_scale", k["tau_factor"] * tau_m1, tau_f))
    rec.conclusion.update({"beta0": k["beta0"], "C": C, "alpha_margin": alpha_margin})
    if not rec.hypotheses_met or eps0 <= 0:
        return rec
    tau0 = math.sqrt(nu * e0 / eps0)
    lo, hi = (1.0 - alpha_margin) * eps0 / K1, K2 * (1.0 + alpha_margin) * eps0
    R_start = k["beta0"] * tau0
    checked, violations = _bracket_rows(profile, R_start, R0, lo, hi, eps_inf)
    rec.violations.extend(violations)
    common = math.sqrt(theta_f) * nu * R0 ** 1.25 / math.sqrt(f_norm)
    sandwich = [C ** 1.5 / 2.0 ** 3.75 * common, 2.0 ** 1.5 / C ** 2 * common]
    if not _within(tau0 ** 2, *sandwich, CONCLUSION_REL_TOL * sandwich[1]):
        rec.violations.append({"quantity": "tau0_sq", "value": tau0 ** 2, "bracket": sandwich})
    rec.conclusion.update({"tau0": tau0, "range": [R_start, R0], "bracket": [lo, hi],
                           "tau0_sq_bracket": sandwich, "rows_checked": checked})
    return rec


# ----------------------------------------------------------------------
# Report
# ----------------------------------------------------------------------

@dataclass
class InvariantRecord:
    name: str
    passed: bool
    value: Optional[float] = None
    detail: str = ""


@dataclass
class DiagnosticsReport:
    """Scales, numbers, invariant checks and theorem records of one analyzed run."""

    scales: Dict[str, float] = field(default_factory=dict)
    numbers: Dict[str, float] = field(default_factory=dict)
    invariants: List[InvariantRecord] = field(default_factory=list)
    theorems: List[TheoremRecord] = field(default_factory=list)
    ranges: Dict[str, Optional[List[float]]] = field(default_factory=dict)
    conventions: Dict[str, Union[str, float]] = field(default_factory=dict)

    def add_invariant(self, name: str, passed: bool, value: Optional[float] = None, detail: str = "") -> None:
        self.invariants.append(InvariantRecord(name, bool(passed), None if value is None else float(value), detail))
        if not passed:
            logger.error("invariant %s failed (%s) %s", name, value, detail)

    @property
    def exit_code(self) -> int:
        if any(not inv.passed for inv in self.invariants) or any(t.violations for t in self.theorems):
            return EXIT_VIOLATION
        if any(t.applicable and not t.hypotheses_met for t in self.theorems):
            return EXIT_HYPOTHESIS
        return EXIT_OK

    def to_dict(self) -> dict:
        return {
            "scales": dict(self.scales),
            "numbers": dict(self.numbers),
            "ranges": dict(self.ranges),
            "conventions": dict(self.conventions),
            "invariants": [asdict(i) for i in self.invariants],
            "theorems": [t.to_dict() for t in self.theorems],
            "exit_code": self.exit_code,
        }

    def write_json(self, path: Union[str, Path]) -> Path:
        p = Path(path)
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default), encoding="utf-8")
        return p


def _json_default(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    raise TypeError(f"{type(obj).__name__} is not JSON serializable")
