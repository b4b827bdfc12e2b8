"""
Pseudo-spectral Navier-Stokes solver.

This package contains:
- settings_solver: run configuration (JSON sections, validation, defaults)
- forcing: single-shell random forces, shape factors, Agmon constant
- integrator: integrating-factor SSP-RK3 stepper, spin-up and recording
- snapshot_io: binary snapshots and the energy time series
"""

from .forcing import (
    ForceProfile,
    ShapeFactors,
    agmon_constant,
    attractor_bound,
    force_shape_factors,
    make_force,
)
from .integrator import (
    SNAPSHOT_DIVERGENCE_TOL,
    DiskSnapshotStore,
    IFRK3Stepper,
    MemorySnapshotStore,
    Snapshot,
    Trajectory,
    discrete_energy_balance,
    energy_row,
    force_for,
    initial_condition,
    integrate,
    run,
    step,
)
from .settings_solver import (
    MIN_QUADRATURE_NODES,
    ForcingSpec,
    InitialSpec,
    SimulationConfig,
    load_config,
    read_config_file,
)
from .snapshot_io import (
    read_force,
    read_snapshot,
    read_time_series,
    write_force,
    write_snapshot,
    write_time_series,
)

__all__ = [
    "DiskSnapshotStore",
    "ForceProfile",
    "ForcingSpec",
    "IFRK3Stepper",
    "InitialSpec",
    "MIN_QUADRATURE_NODES",
    "MemorySnapshotStore",
    "SNAPSHOT_DIVERGENCE_TOL",
    "ShapeFactors",
    "SimulationConfig",
    "Snapshot",
    "Trajectory",
    "agmon_constant",
    "attractor_bound",
    "discrete_energy_balance",
    "energy_row",
    "force_for",
    "force_shape_factors",
    "initial_condition",
    "integrate",
    "load_config",
    "make_force",
    "read_config_file",
    "read_force",
    "read_snapshot",
    "read_time_series",
    "run",
    "step",
    "write_force",
    "write_snapshot",
    "write_time_series",
]
