"""
Command-line interface tools.

This package contains:
- cascade_cli: simulate, analyze, sweep, toy1d and verify commands
- pipeline: the analysis of one trajectory into a DiagnosticsReport
- manifest: run manifests, saving and reloading runs
- settings_analysis: analysis configuration and its validation
"""

from .cascade_cli import build_parser, main
from .manifest import RunManifest, load_run, save_run
from .pipeline import AnalysisResult, analyze_trajectory, build_coverings, default_scales
from .settings_analysis import THEOREM_IDS, AnalysisConfig

__all__ = [
    "AnalysisConfig",
    "AnalysisResult",
    "RunManifest",
    "THEOREM_IDS",
    "analyze_trajectory",
    "build_coverings",
    "build_parser",
    "default_scales",
    "load_run",
    "main",
    "save_run",
]
