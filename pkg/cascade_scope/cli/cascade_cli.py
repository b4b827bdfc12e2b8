"""
Command line interface.

Usage:
    python -m cascade_scope simulate --config data/configs/minimal_16.json --out runs/minimal
    python -m cascade_scope analyze --run runs/minimal --scales 0.78,0.39 --coverings 2
    python -m cascade_scope sweep --config data/configs/sweep_template.json --gr 1e4,2e4,4e4 --out runs/sweep
    python -m cascade_scope toy1d --M 1 --N 100 --scales 0.1,0.00225
    python -m cascade_scope verify --component spectral

Exit codes: 0 all invariants passed, 2 a theorem hypothesis was not met,
1 an invariant was violated (or the command failed).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
import pandas as pd

from ..budget import write_profile
from ..diagnostics import (
    EXIT_HYPOTHESIS,
    EXIT_OK,
    EXIT_VIOLATION,
    RunSummary,
    scaling_check,
    write_sweep,
)
from ..diagnostics.theorems import _json_default
from ..errors import CascadeScopeError
from ..fields import (
    Grid,
    VectorField,
    dealias,
    inner_product,
    leray_project,
    physical_inner,
    random_solenoidal,
    to_spectral,
)
from ..localization import (
    CutoffFamily,
    certify_family,
    export_covering,
    family_for_covering,
    jittered_covering,
    lattice_covering,
)
from ..settings import configure_logging, get_logger
from ..solver import SimulationConfig, run
from ..solver.settings_solver import read_config_file
from ..toy import ToySpec, toy_table
from .manifest import RunManifest, load_run, save_run
from .pipeline import AnalysisResult, analyze_trajectory
from .settings_analysis import AnalysisConfig

logger = get_logger("cli")

ANALYSIS_DIR = "analysis"
VERIFY_COMPONENTS = ("cutoffs", "covering", "spectral")
VERIFY_TOL = 1e-10


def _banner(title: str) -> None:
    print("=" * 70)
    print(title)
    print("=" * 70)


def _floats(text: Optional[str]) -> Optional[List[float]]:
    if text is None:
        return None
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from e


def _ints(text: Optional[str]) -> Optional[List[int]]:
    values = _floats(text)
    return None if values is None else [int(v) for v in values]


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------

def simulate(raw: dict, out: Path) -> RunManifest:
    """Run the solver for a raw configuration dict and persist the run under ``out``."""
    config = SimulationConfig.from_dict(raw)
    analysis = AnalysisConfig.from_dict(raw.get("analysis"))
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    traj = run(config, out_dir=out)
    traj.info["wall_seconds"] = round(time.perf_counter() - start, 3)
    manifest = save_run(traj, config, out, analysis=analysis.to_dict())
    logger.info("run written to %s (%d snapshots)", out, len(traj))
    return manifest


def cmd_simulate(args: argparse.Namespace) -> int:
    _banner("cascade-scope: simulate")
    manifest = simulate(read_config_file(args.config), Path(args.out))
    print(f"Snapshots:          {len(manifest.times)}")
    print(f"Spin-up time:       {manifest.spin_up_time:.4g}")
    print(f"Attractor flag:     {manifest.attractor_proximity}")
    print(f"Manifest:           {Path(args.out) / 'manifest.json'}")
    return EXIT_OK


# ----------------------------------------------------------------------
# analyze
# ----------------------------------------------------------------------

def analyze(run_dir: Path, overrides: Optional[dict] = None) -> AnalysisResult:
    """
    Analyze a saved run and write ``<run>/analysis/``.

    Only the analysis directory is written; snapshots, series, force and the
    run manifest are left untouched.
    """
    manifest = RunManifest.read(run_dir)
    cfg = AnalysisConfig.from_dict(manifest.config.get("analysis")).with_overrides(**(overrides or {}))
    traj = load_run(run_dir)
    agmon = manifest.config.get("constants", {}).get("agmon")
    result = analyze_trajectory(traj, cfg, agmon=agmon)

    out = run_dir / ANALYSIS_DIR
    out.mkdir(parents=True, exist_ok=True)
    report_path = result.report.write_json(out / "report.json")
    profile_path = write_profile(result.profile, out / "profile.csv")
    covering_files = []
    for i, cov in enumerate(result.coverings):
        centers, meta = export_covering(cov, out / "coverings" / f"{i:03d}_{cov.kind}")
        covering_files.extend([str(centers.relative_to(run_dir)), str(meta.relative_to(run_dir))])
    files = {
        "report": str(report_path.relative_to(run_dir)),
        "profile": str(profile_path.relative_to(run_dir)),
        "coverings": covering_files,
    }
    if result.summary is not None:
        summary_path = out / "summary.json"
        summary = {**asdict(result.summary), "K_meas": result.summary.K_meas}
        summary_path.write_text(json.dumps(summary, indent=2, sort_keys=True, default=_json_default),
                                encoding="utf-8")
        files["summary"] = str(summary_path.relative_to(run_dir))
    RunManifest(
        config={"analysis": cfg.to_dict(), "run": str(run_dir)},
        seeds={"coverings": cfg.seed},
        files=files,
        times=[],
    ).write(out)
    return result


def _print_report(result: AnalysisResult) -> None:
    report = result.report
    print(f"\n{'Invariant':<40} {'Status':<8} Value")
    print("-" * 70)
    for inv in report.invariants:
        value = "" if inv.value is None else f"{inv.value:.4g}"
        print(f"{inv.name:<40} {'PASS' if inv.passed else 'FAIL':<8} {value}")
    print(f"\n{'Theorem':<40} Status")
    print("-" * 70)
    for rec in report.theorems:
        print(f"{rec.name:<40} {rec.status}")
    if report.ranges:
        print("\nRanges:")
        for key, value in report.ranges.items():
            print(f"  {key}: {value}")


def _analysis_overrides(args: argparse.Namespace) -> dict:
    return {
        "scales": _floats(args.scales),
        "coverings": args.coverings,
        "theorems": _ints(args.theorems),
        "K1": args.K1,
        "K2": args.K2,
        "C": args.C,
        "alpha_margin": args.alpha_margin,
    }


def cmd_analyze(args: argparse.Namespace) -> int:
    _banner("cascade-scope: analyze")
    run_dir = Path(args.run)
    result = analyze(run_dir, _analysis_overrides(args))
    _print_report(result)
    print(f"\nReport: {run_dir / ANALYSIS_DIR / 'report.json'}")
    code = result.report.exit_code
    print(f"Exit code: {code}")
    return code


# ----------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------

def _worse(a: int, b: int) -> int:
    if EXIT_VIOLATION in (a, b):
        return EXIT_VIOLATION
    return max(a, b)


def _with_grashof(raw: dict, gr: float) -> dict:
    data = json.loads(json.dumps(raw))
    forcing = data.setdefault("forcing", {})
    forcing["mode"] = "gr"
    forcing["target"] = float(gr)
    return data


def cmd_sweep(args: argparse.Namespace) -> int:
    _banner("cascade-scope: sweep")
    raw = read_config_file(args.config)
    out = Path(args.out)
    grs = _floats(args.gr) or []
    summaries: List[RunSummary] = []
    thresholds: List[float] = []
    code = EXIT_OK
    for gr in grs:
        run_dir = out / f"gr_{gr:g}"
        print(f"\n--- Gr = {gr:g} -> {run_dir}")
        simulate(_with_grashof(raw, gr), run_dir)
        result = analyze(run_dir)
        code = _worse(code, result.report.exit_code)
        if result.summary is not None:
            summaries.append(result.summary)
            thresholds.append(result.report.numbers["K_threshold"])

    write_sweep(summaries, out / "sweep.csv")
    if not summaries:
        print("No forced runs to fit.")
        return EXIT_HYPOTHESIS if code == EXIT_OK else code
    cfg = AnalysisConfig.from_dict(raw.get("analysis"))
    K = cfg.K_threshold if cfg.K_threshold is not None else min(thresholds)
    scaling = scaling_check(summaries, K)
    (out / "scaling.json").write_text(
        json.dumps(scaling.to_dict(), indent=2, sort_keys=True, default=_json_default), encoding="utf-8"
    )
    print(f"\n{'Quantity':<10} {'Slope':>10} {'±95%':>10} {'Expected':>10}")
    print("-" * 44)
    for key, fit in scaling.fits.items():
        print(f"{key:<10} {fit.slope:>10.3f} {fit.ci95:>10.3f} {fit.expected:>10.2f}")
    for note in scaling.notes:
        print(f"Note: {note}")
    if not scaling.passed:
        return EXIT_VIOLATION
    return code


# ----------------------------------------------------------------------
# toy1d
# ----------------------------------------------------------------------

def cmd_toy1d(args: argparse.Namespace) -> int:
    spec = ToySpec(M=args.M, N=args.N)
    scales = _floats(args.scales) or [10.0 / spec.N, 0.9 * spec.fine_scale]
    table = toy_table(spec, scales)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        table.to_csv(args.out, index=False, float_format="%.17g")
    else:
        table.to_csv(sys.stdout, index=False, float_format="%.10g")
    return EXIT_OK


# ----------------------------------------------------------------------
# verify
# ----------------------------------------------------------------------

def cutoff_row(family: CutoffFamily, coords, K2: Optional[float] = None) -> dict:
    """One row of the cutoff table: certified constants, sampled maxima, sandwich."""
    cert = certify_family(family, coords, K2=K2)
    return {
        "scale": cert.R,
        "n": cert.n,
        "C0_grad": cert.C0_grad,
        "C0_lap": cert.C0_lap,
        "grad_ratio": cert.grad_ratio,
        "lap_ratio": cert.lap_ratio,
        "bounds_pass": cert.bounds_ok,
        "sandwich_pass": cert.sandwich.passed,
        "passed": cert.passed,
    }


def verify_cutoffs(N: int = 16, oversample: int = 4, delta: float = 0.75,
                   scales: Optional[Sequence[float]] = None) -> pd.DataFrame:
    """
    Lattice cutoff families at R0, R0/2, R0/4, R0/8 on an ``oversample``-times
    refined grid: derivative bounds at every sample and ψ0 ≤ Σψ_i ≤ K2ψ0.
    """
    L = 2.0 * np.pi
    points = N * oversample
    coords = (np.arange(points) * (L / points),) * 3
    R0 = L / 4.0
    scales = list(scales) if scales is not None else [R0 / 2 ** j for j in range(4)]
    rows = []
    for R in scales:
        cov = lattice_covering(L, R, grid_or_coords=coords)
        rows.append(cutoff_row(family_for_covering(cov, delta), coords))
    return pd.DataFrame(rows)


def verify_covering(L: float = 4.0, points: int = 32) -> pd.DataFrame:
    coords = (np.arange(points) * (L / points),) * 3
    rows = []
    for R in (1.0, 0.5):
        for cov in (lattice_covering(L, R, grid_or_coords=coords),
                    jittered_covering(L, R, seed=0, grid_or_coords=coords)):
            v = cov.validation
            rows.append({"kind": cov.kind, "R": R, "n": cov.n, "K1_min": v.K1_min,
                         "K2_min": v.K2_min, "K1": cov.K1, "K2": cov.K2, "passed": cov.valid})
    return pd.DataFrame(rows)


def verify_spectral(N: int = 16, seeds: Sequence[int] = (0, 1, 2)) -> pd.DataFrame:
    grid = Grid(N)
    rows = []
    for seed in seeds:
        v = random_solenoidal(grid, seed) + random_solenoidal(grid, seed + 100) * 0.5
        noise = np.random.default_rng(seed).standard_normal((3,) + grid.shape)
        raw = to_spectral(VectorField.from_physical(grid, noise))
        p = leray_project(raw)
        scale = inner_product(raw, raw)
        rows.append({
            "seed": seed,
            "parseval": abs(inner_product(v, v) - physical_inner(v, v)) / inner_product(v, v),
            "leray_idempotent": float(np.max(np.abs(leray_project(p).data - p.data))),
            "leray_orthogonal": abs(inner_product(p, raw - p)) / scale,
            "dealias_idempotent": float(np.max(np.abs(dealias(dealias(raw)).data - dealias(raw).data))),
        })
    df = pd.DataFrame(rows)
    df["passed"] = (df.drop(columns="seed") <= VERIFY_TOL).all(axis=1)
    return df


def cmd_verify(args: argparse.Namespace) -> int:
    _banner(f"cascade-scope: verify {args.component}")
    table = {"cutoffs": verify_cutoffs, "covering": verify_covering, "spectral": verify_spectral}[args.component]()
    print(table.to_string(index=False))
    return EXIT_OK if bool(table["passed"].all()) else EXIT_VIOLATION


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascade_scope",
        description="Spectral Navier-Stokes runs and (K1, K2)-averaged energy cascade diagnostics",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the solver and write snapshots")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", required=True, help="output run directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze", help="budgets, profiles and theorem checks of a saved run")
    p.add_argument("--run", required=True, help="run directory written by simulate")
    p.add_argument("--scales", default=None, help="comma-separated scales R")
    p.add_argument("--coverings", type=int, default=None, help="coverings per scale")
    p.add_argument("--theorems", default=None, help="comma-separated theorem ids (1,2,3,4,6)")
    p.add_argument("--K1", type=int, default=None)
    p.add_argument("--K2", type=int, default=None)
    p.add_argument("--C", type=float, default=None, help="saturation constant of the global cascade")
    p.add_argument("--alpha-margin", dest="alpha_margin", type=float, default=None)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="simulate and analyze over a list of Grashof numbers")
    p.add_argument("--config", required=True, help="JSON configuration template")
    p.add_argument("--gr", required=True, help="comma-separated Grashof numbers")
    p.add_argument("--out", required=True, help="sweep output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("toy1d", help="1D sign-fluctuation example, CSV on stdout")
    p.add_argument("--M", type=float, default=1.0, help="amplitude")
    p.add_argument("--N", type=int, default=100, help="oscillation frequency")
    p.add_argument("--scales", default=None, help="comma-separated scales R in (0, pi/2]")
    p.add_argument("--out", default=None, help="CSV file instead of stdout")
    p.set_defaults(func=cmd_toy1d)

    p = sub.add_parser("verify", help="self-checks of one component")
    p.add_argument("--component", required=True, choices=VERIFY_COMPONENTS)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.func(args)
    except (CascadeScopeError, ValueError) as e:
        logger.error("%s failed: %s", args.command, e)
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
