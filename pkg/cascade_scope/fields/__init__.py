"""
Periodic spectral fields.

This package contains:
- grid: periodic cubic grid, wavevectors and the 2/3 dealiasing mask
- spectral_ops: vector/scalar field types, transforms, Leray projection,
  Stokes powers, nonlinear term and pressure recovery
"""

from .grid import Grid
from .spectral_ops import (
    Representation,
    ScalarField,
    VectorField,
    advection,
    dealias,
    divergence_error,
    inner_product,
    l2_norm,
    leray_project,
    nonlinear_term,
    physical_inner,
    poisson_residual,
    pressure_from_advection,
    pressure_from_velocity,
    random_solenoidal,
    sobolev_norm,
    stokes_power,
    taylor_green,
    to_physical,
    to_spectral,
    velocity_gradient,
)

__all__ = [
    "Grid",
    "Representation",
    "ScalarField",
    "VectorField",
    "advection",
    "dealias",
    "divergence_error",
    "inner_product",
    "l2_norm",
    "leray_project",
    "nonlinear_term",
    "physical_inner",
    "poisson_residual",
    "pressure_from_advection",
    "pressure_from_velocity",
    "random_solenoidal",
    "sobolev_norm",
    "stokes_power",
    "taylor_green",
    "to_physical",
    "to_spectral",
    "velocity_gradient",
]
