"""
Time-independent body forces and their shape factors.

The force is a random-phase, divergence-free superposition of the modes in
one wavenumber shell, rescaled to a prescribed periodic Grashof number
Gr = ‖f‖ / (ν² R0^{−3/2}) or to a prescribed norm.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from ..fields import Grid, VectorField, leray_project, sobolev_norm, to_physical, to_spectral


@dataclass(frozen=True)
class ForceProfile:
    """A static force together with the Stokes-operator norms the theorems use."""

    f: VectorField
    norm: float
    norm_half: float  # ‖A^{1/2} f‖
    norm_mhalf: float  # ‖A^{-1/2} f‖
    norm_m1: float  # ‖A^{-1} f‖
    k_f: Optional[int] = None
    seed: Optional[int] = None

    @classmethod
    def from_field(cls, f: VectorField, k_f: Optional[int] = None, seed: Optional[int] = None) -> "ForceProfile":
        f = f.spectral()
        return cls(
            f=f,
            norm=sobolev_norm(f, 0.0),
            norm_half=sobolev_norm(f, 1.0),
            norm_mhalf=sobolev_norm(f, -1.0),
            norm_m1=sobolev_norm(f, -2.0),
            k_f=k_f,
            seed=seed,
        )

    @classmethod
    def zero(cls, grid: Grid) -> "ForceProfile":
        return cls.from_field(VectorField.zeros(grid))

    @property
    def grid(self) -> Grid:
        return self.f.grid

    @property
    def is_zero(self) -> bool:
        return self.norm == 0.0

    @property
    def tau_f(self) -> float:
        """τ_f = ‖f‖/‖A^{1/2} f‖ (nan for the zero force)."""
        return self.norm / self.norm_half if self.norm_half > 0 else float("nan")

    def grashof(self, nu: float, R0: Optional[float] = None) -> float:
        """Periodic Grashof number ‖f‖/(ν² R0^{−3/2})."""
        R0 = self.grid.R0 if R0 is None else R0
        return self.norm * R0 ** 1.5 / nu ** 2


def _shell_mask(grid: Grid, k_f: int, shell: str) -> np.ndarray:
    kn = grid.k_int_norm
    if shell == "sphere":
        mask = np.abs(kn - k_f) < 1e-9
    else:
        mask = (kn >= k_f - 1e-9) & (kn < k_f + 1 - 1e-9)
    return mask & grid.dealias_mask


def make_force(
    grid: Grid,
    k_f: int,
    target: float,
    nu: float,
    seed: int = 0,
    mode: str = "gr",
    shell: str = "band",
) -> ForceProfile:
    """
    Random single-shell force with a prescribed magnitude.

    Args:
        grid: Simulation grid.
        k_f: Shell radius in integer wavenumbers, 1 ≤ k_f ≤ N/3.
        target: Grashof number (mode "gr") or ‖f‖ (mode "norm"); must be > 0.
        nu: Viscosity, used to convert a Grashof target into a norm.
        seed: Random seed; equal seeds give bit-identical forces.
        mode: "gr" or "norm".
        shell: "band" for k_f ≤ |k| < k_f + 1, "sphere" for |k| = k_f exactly.

    Raises:
        ValueError: empty shell, k_f out of range or target ≤ 0.
    """
    if not target > 0:
        raise ValueError(f"force target must be positive, got {target}")
    if not 1 <= k_f <= grid.N / 3.0:
        raise ValueError(f"k_f must lie in [1, N/3], got {k_f}")
    mask = _shell_mask(grid, k_f, shell)
    if not mask.any():
        raise ValueError(f"shell k_f={k_f} ({shell}) contains no resolved modes")

    rng = np.random.default_rng(seed)
    shape = (3,) + grid.shape
    coeffs = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * mask
    raw = VectorField(grid, coeffs, mean_zero=False)
    # real part of the synthesis makes the coefficients Hermitian; the shell is symmetric
    f = leray_project(to_spectral(to_physical(raw)))
    f = VectorField(grid, f.data * mask)
    norm = sobolev_norm(f, 0.0)
    if norm == 0:
        raise ValueError(f"shell k_f={k_f} produced a vanishing projected force")
    goal = target * nu ** 2 * grid.R0 ** -1.5 if mode == "gr" else target
    return ForceProfile.from_field(f * (goal / norm), k_f=k_f, seed=seed)


@lru_cache(maxsize=8)
def agmon_constant(L: float = 2.0 * math.pi, radius: int = 48) -> float:
    """
    Certified C_A in ‖w‖_∞ ≤ C_A ‖A^{1/2} w‖^{1/2} ‖A w‖^{1/2} for mean-zero w on [0, L]³.

    Split-sum bound: ‖w‖_∞ ≤ Σ|ŵ_k|, Cauchy-Schwarz below and above a
    wavenumber cut K, then optimise over K.  With s₁(K) = Σ_{0<|k|≤K}|k|⁻²
    and s₂(K) = Σ_{|k|>K}|k|⁻⁴ this gives
    C_A = 2 (sup s₁/K · sup s₂K)^{1/4} / (2π)^{3/2}, independent of L.
    Lattice sums are exact up to ``radius``; beyond it an integral tail
    bound is used.
    """
    del L  # the constant is scale invariant
    M = int(radius)
    k = np.arange(-M, M + 1)
    kk = (k[:, None, None] ** 2 + k[None, :, None] ** 2 + k[None, None, :] ** 2).ravel()
    kk = kk[(kk > 0) & (kk <= M * M)]
    values, counts = np.unique(kk, return_counts=True)
    r = np.sqrt(values.astype(float))
    a = math.sqrt(3.0) / 2.0

    s1 = np.cumsum(counts / r ** 2)
    rho = ((M - a) / (M - 2 * a)) ** 2
    sup1 = max(float(np.max(s1 / r)), (s1[-1] + 4 * math.pi * 2 * a * rho) / M, 4 * math.pi * rho)

    u0 = M - 2 * a
    tail4 = 4 * math.pi * (1 / u0 + a / u0 ** 2 + a ** 2 / (3 * u0 ** 3))
    inside4 = np.cumsum(counts / r ** 4)
    after = inside4[-1] - inside4 + tail4  # s₂ on [r_j, r_{j+1})
    upper = np.append(r[1:], M)
    sup2 = max(float(np.max(after * upper)), (inside4[-1] + tail4) * r[0], tail4 * M)
    return float(2.0 * (sup1 * sup2) ** 0.25 / (2.0 * math.pi) ** 1.5)


@dataclass(frozen=True)
class ShapeFactors:
    sigma_f: float
    theta_f: float
    gamma_f: float


def force_shape_factors(
    force: ForceProfile,
    eta,
    nu: float,
    T: float,
    C0: float,
    agmon: Optional[float] = None,
    R0: Optional[float] = None,
) -> ShapeFactors:
    """
    σ_f, θ_f and γ_f of a static force.

    σ_f = (2γ_f²ν²/(c_η C_A)) (‖f‖/‖A^{1/2}f‖)^{1/2} ‖f‖²/‖A^{-1/2}f‖²
    θ_f = (c_η/(4 C_A)) R0^{-5/2} ‖A^{-1/2}f‖² / (‖f‖^{3/2} ‖A^{1/2}f‖^{1/2})
    γ_f = C0/(νT) ‖A^{-1}f‖/‖f‖ + 1

    Raises:
        ValueError: for the zero force.
    """
    if force.is_zero:
        raise ValueError("shape factors are undefined for the zero force")
    C_A = agmon if agmon is not None else agmon_constant(force.grid.L)
    R0 = force.grid.R0 if R0 is None else R0
    c_eta = eta.c_eta
    gamma = C0 / (nu * T) * force.norm_m1 / force.norm + 1.0
    sigma = (
        2.0 * gamma ** 2 * nu ** 2 / (c_eta * C_A)
        * math.sqrt(force.norm / force.norm_half)
        * force.norm ** 2 / force.norm_mhalf ** 2
    )
    theta = (
        c_eta / (4.0 * C_A) * R0 ** -2.5
        * force.norm_mhalf ** 2 / (force.norm ** 1.5 * math.sqrt(force.norm_half))
    )
    return ShapeFactors(sigma_f=sigma, theta_f=theta, gamma_f=gamma)


def attractor_bound(force: ForceProfile, nu: float, R0: Optional[float] = None) -> float:
    """(2/π)⁴ R0⁴ ‖f‖² / ν², the bound on ‖u‖² on the weak attractor."""
    R0 = force.grid.R0 if R0 is None else R0
    return (2.0 / math.pi) ** 4 * R0 ** 4 * force.norm ** 2 / nu ** 2
