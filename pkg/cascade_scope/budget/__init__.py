"""
Localized and global energy budgets.

This package contains:
- local_budget: per-ball energy, dissipation, flux, force work and transport,
  (K1, K2)-averages, positivity sandwiches, flux brackets and profiles
- global_budget: integral-scale budgets, the global flux and energy
  inequality checks, partition-of-unity telescoping
"""

from .global_budget import (
    FluxZeroReport,
    GlobalBudget,
    InequalityRecord,
    TelescopingReport,
    TimeNodes,
    global_budget,
    global_flux_zero_check,
    partition_telescoping_check,
    time_localized_energy_inequality,
    time_nodes,
)
from .local_budget import (
    PROFILE_COLUMNS,
    ForceWorkAverage,
    LocalBudget,
    SandwichCheck,
    ScaleAverage,
    flux_bracket,
    flux_profile,
    force_work_average,
    kk_average,
    local_budget,
    local_budgets,
    positivity_sandwich_check,
    profile_frame,
    sandwich_checks,
    write_profile,
)

__all__ = [
    "FluxZeroReport",
    "ForceWorkAverage",
    "GlobalBudget",
    "InequalityRecord",
    "LocalBudget",
    "PROFILE_COLUMNS",
    "SandwichCheck",
    "ScaleAverage",
    "TelescopingReport",
    "TimeNodes",
    "flux_bracket",
    "flux_profile",
    "force_work_average",
    "global_budget",
    "global_flux_zero_check",
    "kk_average",
    "local_budget",
    "local_budgets",
    "partition_telescoping_check",
    "positivity_sandwich_check",
    "profile_frame",
    "sandwich_checks",
    "time_localized_energy_inequality",
    "time_nodes",
    "write_profile",
]
