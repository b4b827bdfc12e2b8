"""
Characteristic length scales and adimensional numbers.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..budget.global_budget import GlobalBudget, time_nodes
from ..fields import Grid, VectorField, inner_product, sobolev_norm
from ..localization.cutoffs import TimeCutoff

LEMMA_REL_TOL = 1e-12


def taylor_scale(e0: float, eps0: float, nu: float) -> float:
    """
    Taylor scale τ0 = (ν e0/ε0)^{1/2}.

    Raises:
        ValueError: if ε0 ≤ 0.
    """
    if not eps0 > 0:
        raise ValueError(f"Taylor scale needs a positive dissipation, got eps0={eps0}")
    return math.sqrt(nu * e0 / eps0)


@dataclass
class TauScales:
    tau_m1: float
    tau_tilde_m1: float
    tau0: Optional[float] = None

    @property
    def ordered(self) -> bool:
        """τ₋₁ ≤ τ̃₋₁ (η² ≤ η^{2δ−1} pointwise)."""
        return self.tau_m1 <= self.tau_tilde_m1 * (1.0 + LEMMA_REL_TOL)

    @property
    def lemma_holds(self) -> bool:
        """τ̃₋₁ ≥ 2τ0."""
        if self.tau0 is None:
            return True
        return self.tau_tilde_m1 >= 2.0 * self.tau0 * (1.0 - LEMMA_REL_TOL)

    @property
    def lemma_margin(self) -> float:
        return float("nan") if self.tau0 is None else self.tau_tilde_m1 - 2.0 * self.tau0


def _tau_from_raw(raw_m1: float, raw_tilde: float, e0: float) -> tuple:
    if not e0 > 0:
        raise ValueError(f"tau scales need a positive energy, got e0={e0}")
    return math.sqrt(raw_m1 / e0), math.sqrt(raw_tilde / e0)


def tau_scales(traj, eta: TimeCutoff, e0: float, tau0: Optional[float] = None) -> TauScales:
    """
    τ₋₁ and τ̃₋₁ from the snapshots of ``traj``.

    τ₋₁² = (1/T R0³)∫η² ‖A^{−1/2}u‖² / e0, and τ̃₋₁ the same with η^{2δ−1}.

    Raises:
        ValueError: if e0 ≤ 0.
    """
    nodes = time_nodes(traj.times, eta)
    inv = np.array([sobolev_norm(traj.snapshot(k).u.spectral(), -1.0) ** 2 for k in range(len(nodes.t))])
    R0 = traj.grid.R0
    raw_m1 = nodes.integrate(nodes.eta ** 2 * inv) / R0 ** 3
    raw_tilde = nodes.integrate(nodes.eta ** (2 * eta.delta - 1) * inv) / R0 ** 3
    return TauScales(*_tau_from_raw(raw_m1, raw_tilde, e0), tau0=tau0)


def tau_scales_from_budget(glob: GlobalBudget) -> TauScales:
    """Same as ``tau_scales`` using the integrals already stored in a GlobalBudget."""
    tau0 = taylor_scale(glob.e0, glob.eps0, glob.nu) if glob.eps0 > 0 else None
    return TauScales(*_tau_from_raw(glob.tau_m1_sq_raw, glob.tau_tilde_sq_raw, glob.e0), tau0=tau0)


@dataclass
class AdimensionalNumbers:
    gr_local: float
    gr_periodic: float
    re: float


def adimensional_numbers(e0: float, fsq0: float, f_norm: float, nu: float, R0: float) -> AdimensionalNumbers:
    """Gr = (|f|²0)^{1/2}/(ν² R0^{−3}), periodic Gr = ‖f‖/(ν² R0^{−3/2}), Re = e0^{1/2}/(ν R0^{−1})."""
    return AdimensionalNumbers(
        gr_local=math.sqrt(max(fsq0, 0.0)) * R0 ** 3 / nu ** 2,
        gr_periodic=f_norm * R0 ** 1.5 / nu ** 2,
        re=math.sqrt(max(e0, 0.0)) * R0 / nu,
    )


def alignment_ratio(traj, eta: TimeCutoff, force: Optional[VectorField] = None) -> float:
    """
    ∫η(f, u) / [(∫η‖f‖²)^{1/2} (∫η‖u‖²)^{1/2}], a number in [−1, 1].

    Zero when either the force or the flow vanishes.
    """
    f = (force if force is not None else traj.force.f).spectral()
    nodes = time_nodes(traj.times, eta)
    work, usq = [], []
    for k in range(len(nodes.t)):
        u = traj.snapshot(k).u.spectral()
        work.append(inner_product(f, u))
        usq.append(sobolev_norm(u, 0.0) ** 2)
    num = nodes.integrate(nodes.eta * np.asarray(work))
    den = math.sqrt(nodes.integrate(nodes.eta) * sobolev_norm(f, 0.0) ** 2) * math.sqrt(
        nodes.integrate(nodes.eta * np.asarray(usq))
    )
    if den == 0:
        return 0.0
    return float(np.clip(num / den, -1.0, 1.0))


@dataclass
class SaturationRecord:
    K_meas: float
    K_threshold: float
    upper: float  # 2√2/θ_f

    @property
    def saturated(self) -> bool:
        return self.K_threshold <= self.K_meas <= self.upper

    @property
    def upper_ok(self) -> bool:
        return self.K_meas <= self.upper * (1.0 + 1e-12)


def default_K_threshold(theta_f: float) -> float:
    """0.1 · 2√2/θ_f."""
    return 0.1 * 2.0 * math.sqrt(2.0) / theta_f


def kolmogorov_saturation(e0: float, eps0: float, theta_f: float, R0: float,
                          K_threshold: Optional[float] = None) -> SaturationRecord:
    """K_meas = ε0 R0/e0^{3/2}, compared with [K_threshold, 2√2/θ_f]."""
    K_meas = eps0 * R0 / e0 ** 1.5 if e0 > 0 else 0.0
    threshold = default_K_threshold(theta_f) if K_threshold is None else K_threshold
    return SaturationRecord(K_meas, threshold, 2.0 * math.sqrt(2.0) / theta_f)


@dataclass
class CounterexampleRecord:
    n: int
    alpha: float
    alignment: float
    taylor_like: float  # ‖u‖/‖A^{1/2}u‖
    tau_f: float  # ‖f‖/‖A^{1/2}f‖

    @property
    def ratio(self) -> float:
        return self.taylor_like / self.tau_f


def _unit_mode(grid: Grid, k: int, component: int, axis: int) -> VectorField:
    """Unit-norm divergence-free shear mode sin(2πk x_axis/L) e_component (axis ≠ component)."""
    coords = grid.mesh
    wave = np.sin(2.0 * np.pi * k * coords[axis] / grid.L)
    comps = [np.zeros(grid.shape)] * 3
    comps[component] = np.broadcast_to(wave, grid.shape)
    v = VectorField.from_physical(grid, comps).spectral()
    return v * (1.0 / sobolev_norm(v, 0.0))


def cauchy_schwarz_counterexample(grid: Grid, n: int) -> CounterexampleRecord:
    """
    u = v₁ + α v_n, f = v₁ with α = λ_n^{−1/4}.

    The alignment (f, u)/(‖f‖‖u‖) tends to 1 as n grows while ‖u‖/‖A^{1/2}u‖
    falls far below τ_f, so alignment alone does not localize the force term.

    Raises:
        ValueError: if n is not resolved by the 2/3 rule.
    """
    if not 2 <= n < grid.N / 3.0:
        raise ValueError(f"n must lie in [2, N/3), got {n}")
    v1 = _unit_mode(grid, 1, 0, 1)
    vn = _unit_mode(grid, n, 2, 0)
    lam_n = (2.0 * np.pi * n / grid.L) ** 2
    alpha = lam_n ** -0.25
    u = v1 + vn * alpha
    align = inner_product(v1, u) / (sobolev_norm(v1, 0.0) * sobolev_norm(u, 0.0))
    return CounterexampleRecord(
        n=n,
        alpha=alpha,
        alignment=float(align),
        taylor_like=sobolev_norm(u, 0.0) / sobolev_norm(u, 1.0),
        tau_f=sobolev_norm(v1, 0.0) / sobolev_norm(v1, 1.0),
    )
