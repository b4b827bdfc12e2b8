"""
1D sign-fluctuation example.

This package contains:
- toy1d: the density M(0.5 + sin(Nx)), its ball averages and the lattice
  and adversarial covering strategies
"""

from .toy1d import (
    STRATEGIES,
    TOY_COLUMNS,
    ToySpec,
    ball_average_quadrature,
    ball_values,
    profile_integrals,
    toy_average,
    toy_covering,
    toy_density,
    toy_global_average,
    toy_table,
)

__all__ = [
    "STRATEGIES",
    "TOY_COLUMNS",
    "ToySpec",
    "ball_average_quadrature",
    "ball_values",
    "profile_integrals",
    "toy_average",
    "toy_covering",
    "toy_density",
    "toy_global_average",
    "toy_table",
]
