"""
The analysis pipeline behind ``analyze`` and ``sweep``.

Builds the time cutoff, coverings and budgets of a trajectory, runs every
invariant check and the selected theorem evaluators, and collects the
results in a DiagnosticsReport.
"""

import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

from ..budget import (
    GlobalBudget,
    ScaleAverage,
    flux_bracket,
    flux_profile,
    global_budget,
    global_flux_zero_check,
    partition_telescoping_check,
    sandwich_checks,
    time_localized_energy_inequality,
)
from ..budget.local_budget import MIN_CELLS_PER_SCALE
from ..diagnostics import (
    DiagnosticsReport,
    RunSummary,
    TheoremRecord,
    adimensional_numbers,
    alignment_ratio,
    apriori_bounds_check,
    default_C,
    inertial_range_detect,
    kolmogorov_saturation,
    lemma_force_alignment_check,
    scaling_brackets,
    tau_scales_from_budget,
    taylor_scale,
    theorem1_check,
    theorem2_check,
    theorem3_check,
    theorem6_check,
)
from ..diagnostics.theorems import leq
from ..fields import Grid, divergence_error
from ..localization import (
    Covering,
    certify_profile,
    family_for_covering,
    jittered_covering,
    lattice_covering,
    make_time_cutoff,
    theorem_constant,
    verify_family_sandwich,
)
from ..settings import get_logger
from ..solver import SNAPSHOT_DIVERGENCE_TOL, Trajectory, force_shape_factors
from .settings_analysis import AnalysisConfig

logger = get_logger("cli")

BRACKET_REL_TOL = 1e-10
JITTER_K2_FACTOR = 8


@dataclass
class AnalysisResult:
    report: DiagnosticsReport
    budget: GlobalBudget
    profile: List[ScaleAverage]
    coverings: List[Covering]
    summary: Optional[RunSummary]


def default_scales(grid: Grid) -> List[float]:
    """R0, R0/2, R0/4, ... while the scale stays above 4 grid cells."""
    scales, R = [], grid.R0
    while R > MIN_CELLS_PER_SCALE * grid.dx * (1.0 + 1e-12):
        scales.append(R)
        R /= 2.0
    return scales


def build_coverings(grid: Grid, scales: Sequence[float], count: int, jitter: float, seed: int = 0,
                    K1: Optional[int] = None, K2: Optional[int] = None) -> List[Covering]:
    """
    One lattice and ``count − 1`` jittered coverings per scale, sharing one (K1, K2).

    Unless given, (K1, K2) are the largest declared values among the
    generated coverings, so every covering admits them.
    """
    covs: List[Covering] = []
    for R in scales:
        covs.append(lattice_covering(grid.L, R, grid_or_coords=grid))
        for j in range(1, count):
            covs.append(jittered_covering(grid.L, R, seed=seed + j, jitter=jitter, grid_or_coords=grid))
    if not covs:
        return covs
    K1 = K1 if K1 is not None else max(c.K1 for c in covs)
    K2 = K2 if K2 is not None else max(c.K2 for c in covs)
    return [replace(c, K1=int(K1), K2=int(K2)) for c in covs]


def _check_coverings(report: DiagnosticsReport, grid: Grid, covs: Sequence[Covering], delta: float) -> None:
    valid = all(c.valid for c in covs)
    report.add_invariant("covering_valid", valid, detail=f"{len(covs)} coverings")
    lattice_k2 = {c.R: c.validation.K2_min for c in covs if c.kind == "lattice"}
    worst = max((c.validation.K2_min / lattice_k2[c.R] for c in covs if c.kind == "jittered"), default=0.0)
    report.add_invariant("jittered_multiplicity", worst <= JITTER_K2_FACTOR, worst,
                         f"K2_min(jittered) <= {JITTER_K2_FACTOR} K2_min(lattice)")
    coords = (grid.x,) * 3
    sums_ok = True
    for cov in covs:
        sandwich = verify_family_sandwich(family_for_covering(cov, delta), coords, K2=cov.K2)
        sums_ok &= sandwich.passed
    report.add_invariant("cutoff_sum_sandwich", sums_ok, detail="psi0 <= sum psi_i <= K2 psi0")


def _check_profile(report: DiagnosticsReport, glob: GlobalBudget, rows: Sequence[ScaleAverage],
                   covs: Sequence[Covering], C0: float) -> None:
    failed = {"energy": 0, "dissipation": 0, "fsq": 0}
    fu_fail = bracket_fail = 0
    for row, cov in zip(rows, covs):
        for check in sandwich_checks(row, glob, cov):
            if check.applicable and not check.passed:
                failed[check.quantity] += 1
        if abs(row.avg_fu) > row.fu_majorant * (1.0 + 1e-12) + 1e-300:
            fu_fail += 1
        lo, hi = flux_bracket(glob, row.R, row.n, C0, cov.K2)
        slack = BRACKET_REL_TOL * max(abs(lo), abs(hi))
        if not lo - slack <= row.balance_flux <= hi + slack:
            bracket_fail += 1
            logger.error("flux bracket violated at R=%.4g (%s): %.6g not in [%.6g, %.6g]",
                         row.R, row.covering_id, row.balance_flux, lo, hi)
    for quantity, count in failed.items():
        report.add_invariant(f"positivity_sandwich[{quantity}]", count == 0, count)
    report.add_invariant("force_work_majorant", fu_fail == 0, fu_fail)
    report.add_invariant("flux_bracket", bracket_fail == 0, bracket_fail)


def _scaling_record(summary: RunSummary, K: float, apriori: TheoremRecord) -> TheoremRecord:
    rec = TheoremRecord("scaling")
    if not apriori.applicable:
        rec.applicable = False
        rec.notes.extend(apriori.notes)
        return rec
    rec.hypotheses.extend(apriori.hypotheses)
    rec.hypotheses.append(leq("saturation", K, summary.K_meas))
    rec.conclusion["K"] = K
    if not rec.hypotheses_met:
        return rec
    brackets = scaling_brackets(summary, K)
    rec.conclusion["brackets"] = brackets
    values = {"eps0_force": summary.eps0, "e0": summary.e0, "eps0_gr": summary.eps0}
    for key, (lo, hi) in brackets.items():
        if not lo * (1 - 1e-9) <= values[key] <= hi * (1 + 1e-9):
            rec.violations.append({"quantity": key, "value": values[key], "bracket": [lo, hi]})
    return rec


def analyze_trajectory(traj: Trajectory, cfg: AnalysisConfig, agmon: Optional[float] = None) -> AnalysisResult:
    """
    Full diagnostics of one trajectory.

    Raises:
        InsufficientDataError: too few snapshots or missing pressure.
        ValueError: a requested scale is under-resolved or above R0.
    """
    grid, nu, force = traj.grid, traj.nu, traj.force
    R0, T = grid.R0, traj.horizon
    eta = make_time_cutoff(T, cfg.delta, cfg.ramp)
    C0 = theorem_constant(max(certify_profile(cfg.delta, 3)), eta)
    glob = global_budget(traj, eta, quadrature=cfg.quadrature)
    eps_inf = max(glob.eps_inf_proxy, 0.0)
    logger.info("e0=%.6g eps0=%.6g (viscous %.6g) F0=%.6g", glob.e0, glob.eps0, glob.eps0_viscous, glob.F0)

    report = DiagnosticsReport(conventions={
        "pressure": glob.pressure_convention,
        "eps0": "viscous + max(residual, 0)",
        "attractor": "post-spin-up bound on ||u||^2 held for one eddy turnover",
        "quadrature": glob.quadrature,
        "delta": cfg.delta,
        "ramp": cfg.ramp,
    })

    # invariants
    div = max(divergence_error(snap.u) for snap in traj)
    report.add_invariant("divergence_free", div <= SNAPSHOT_DIVERGENCE_TOL, div)
    fz = global_flux_zero_check(traj, eta, eps0=glob.eps0)
    report.add_invariant("global_flux_zero", fz.passed, fz.worst)
    ineq = time_localized_energy_inequality(glob, rel_tol=cfg.balance_tol)
    report.add_invariant("time_localized_energy_inequality", ineq.passed, ineq.margin)
    if cfg.telescoping:
        tel = partition_telescoping_check(traj, eta)
        report.add_invariant("partition_telescoping", tel.passed, max(tel.error(k) for k in tel.sums))

    taus = None
    if glob.e0 > 0 and glob.eps0 > 0:
        taus = tau_scales_from_budget(glob)
        report.add_invariant("tau_ordering", taus.ordered, taus.tau_tilde_m1 - taus.tau_m1)
        report.add_invariant("tau_tilde_lemma", taus.lemma_holds, taus.lemma_margin)
        report.scales.update({"tau0": taus.tau0, "tau_m1": taus.tau_m1, "tau_tilde_m1": taus.tau_tilde_m1})

    # profile
    scales = list(cfg.scales) if cfg.scales is not None else default_scales(grid)
    covs = build_coverings(grid, scales, cfg.coverings, cfg.jitter, cfg.seed, cfg.K1, cfg.K2)
    rows = flux_profile(traj, covs, eta, delta=cfg.delta) if covs else []
    K1 = covs[0].K1 if covs else (cfg.K1 or 1)
    K2 = covs[0].K2 if covs else (cfg.K2 or 1)
    if covs:
        _check_coverings(report, grid, covs, cfg.delta)
        _check_profile(report, glob, rows, covs, C0)

    numbers = adimensional_numbers(glob.e0, glob.fsq0, force.norm, nu, R0)
    report.numbers.update({
        "e0": glob.e0, "e0_local": glob.e0_local, "eps0": glob.eps0, "eps0_viscous": glob.eps0_viscous,
        "eps_inf_proxy": glob.eps_inf_proxy, "F0": glob.F0, "T": T, "nu": nu, "R0": R0,
        "C0": C0, "K1": K1, "K2": K2,
        "gr_local": numbers.gr_local, "gr_periodic": numbers.gr_periodic, "re": numbers.re,
    })

    summary = None
    theta_f = None
    if not force.is_zero:
        shape = force_shape_factors(force, eta, nu, T, C0, agmon=agmon)
        theta_f = shape.theta_f
        sat = kolmogorov_saturation(glob.e0, glob.eps0, theta_f, R0, cfg.K_threshold)
        align = alignment_ratio(traj, eta)
        report.scales["tau_f"] = force.tau_f
        report.numbers.update({
            "theta_f": theta_f, "sigma_f": shape.sigma_f, "gamma_f": shape.gamma_f,
            "K_meas": sat.K_meas, "K_threshold": sat.K_threshold, "alignment": align,
        })

    # theorems
    selected = set(cfg.theorems)
    if 1 in selected:
        rec = theorem1_check(glob.e0_local, glob.eps0, glob.F0, nu, R0, C0, K1, K2, rows, T=T, eps_inf=eps_inf)
        report.theorems.append(rec)
        if glob.eps0 > 0:
            lo, hi = glob.eps0 / (4.0 * K1), 9.0 * K2 * glob.eps0 / 4.0
            found = inertial_range_detect(rows, (lo, hi))
            report.ranges["observed_theorem1"] = [found.R_min, found.R_max] if found else None
            report.ranges["predicted_theorem1"] = rec.conclusion.get("range")
    if 2 in selected:
        report.theorems.append(theorem2_check(glob.e0, glob.eps0, force.norm, nu, R0, T, C0,
                                              traj.attractor_proximity))
    if 3 in selected:
        report.theorems.append(theorem3_check(force, glob.e0, nu, T, eta, C0, agmon=agmon))

    apriori = apriori_bounds_check(glob.e0, glob.eps0, force, nu, T, eta, C0,
                                   traj.attractor_proximity, agmon=agmon)
    if not force.is_zero and glob.e0 > 0:
        summary = RunSummary(
            gr=numbers.gr_periodic, e0=glob.e0, eps0=glob.eps0, f_norm=force.norm, theta_f=theta_f,
            nu=nu, R0=R0, re=numbers.re,
            tau0=taylor_scale(glob.e0, glob.eps0, nu) if glob.eps0 > 0 else float("nan"),
            tau_m1=taus.tau_m1 if taus else float("nan"),
            alignment=report.numbers.get("alignment", float("nan")),
            apriori_ok=apriori.hypotheses_met,
        )
    if 4 in selected:
        report.theorems.append(apriori)
        if summary is not None:
            report.theorems.append(_scaling_record(summary, report.numbers["K_threshold"], apriori))

    if 6 in selected and not force.is_zero and taus is not None:
        C = cfg.C if cfg.C is not None else default_C(report.numbers["K_meas"], theta_f)
        report.theorems.append(theorem6_check(
            glob.e0, glob.eps0, force.norm, theta_f, force.tau_f, taus.tau_m1, nu, R0, T, C0, K1, K2,
            C, cfg.alpha_margin, rows, traj.attractor_proximity, eps_inf=eps_inf,
        ))
        base = 2.0 * math.sqrt(2.0) * force.norm * math.sqrt(glob.e0) / R0 ** 1.5
        K_lemma = cfg.lemma_K if cfg.lemma_K is not None else max(base / glob.eps0, 1.0) * (1.0 + 1e-9)
        report.theorems.append(lemma_force_alignment_check(
            glob.e0, glob.eps0, force.norm, R0, K_lemma, T, nu, C0, K2, taus.tau_m1, force.tau_f,
            rows, traj.attractor_proximity,
        ))

    logger.info("analysis finished: exit code %d", report.exit_code)
    return AnalysisResult(report, glob, rows, covs, summary)
