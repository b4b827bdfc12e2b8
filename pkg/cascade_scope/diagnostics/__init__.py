"""
Scales, adimensional numbers and theorem evaluators.

This package contains:
- scales: Taylor scale, τ₋₁ and τ̃₋₁, Grashof and Reynolds numbers, alignment
  and Kolmogorov saturation, the Cauchy-Schwarz counterexample
- theorems: hypothesis/conclusion records for the cascade and bound theorems,
  and the DiagnosticsReport
- scaling: Grashof sweep brackets and log-log slope fits
- inertial_range: detection of the constant-flux range on a profile
"""

from .inertial_range import InertialRange, inertial_range_detect
from .scales import (
    AdimensionalNumbers,
    CounterexampleRecord,
    SaturationRecord,
    TauScales,
    adimensional_numbers,
    alignment_ratio,
    cauchy_schwarz_counterexample,
    default_K_threshold,
    kolmogorov_saturation,
    tau_scales,
    tau_scales_from_budget,
    taylor_scale,
)
from .scaling import (
    SWEEP_COLUMNS,
    RunSummary,
    ScalingReport,
    SlopeFit,
    scaling_brackets,
    scaling_check,
    sweep_frame,
    write_sweep,
)
from .theorems import (
    EXIT_HYPOTHESIS,
    EXIT_OK,
    EXIT_VIOLATION,
    DiagnosticsReport,
    HypothesisRecord,
    InvariantRecord,
    TheoremRecord,
    apriori_bounds_check,
    default_C,
    lemma_force_alignment_check,
    saturated_scaling_bounds,
    theorem1_check,
    theorem1_constants,
    theorem2_check,
    theorem3_check,
    theorem6_check,
    theorem6_constants,
)

__all__ = [
    "AdimensionalNumbers",
    "CounterexampleRecord",
    "DiagnosticsReport",
    "EXIT_HYPOTHESIS",
    "EXIT_OK",
    "EXIT_VIOLATION",
    "HypothesisRecord",
    "InertialRange",
    "InvariantRecord",
    "RunSummary",
    "SWEEP_COLUMNS",
    "SaturationRecord",
    "ScalingReport",
    "SlopeFit",
    "TauScales",
    "TheoremRecord",
    "adimensional_numbers",
    "alignment_ratio",
    "apriori_bounds_check",
    "cauchy_schwarz_counterexample",
    "default_C",
    "default_K_threshold",
    "inertial_range_detect",
    "kolmogorov_saturation",
    "lemma_force_alignment_check",
    "saturated_scaling_bounds",
    "scaling_brackets",
    "scaling_check",
    "sweep_frame",
    "tau_scales",
    "tau_scales_from_budget",
    "taylor_scale",
    "theorem1_check",
    "theorem1_constants",
    "theorem2_check",
    "theorem3_check",
    "theorem6_check",
    "theorem6_constants",
    "write_sweep",
]
