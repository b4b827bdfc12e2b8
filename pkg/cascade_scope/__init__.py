"""
cascade_scope: pseudo-spectral Navier-Stokes runs and (K1, K2)-averaged
energy cascade diagnostics on the periodic box.

Organized into logical modules:
- fields: periodic grid, spectral fields, Leray projection, nonlinear term
- solver: configuration, forcing, time integration and snapshot storage
- localization: refined space/time cutoffs and (K1, K2)-coverings
- budget: localized and global energy budgets, flux profiles
- diagnostics: scales, theorem evaluators, scaling fits, inertial ranges
- toy: the 1D sign-fluctuation example
- cli: command-line interface and run manifests
"""

__version__ = "0.1.0"
