"""
Global (integral-scale) budgets of a periodic trajectory.

With ψ0 ≡ 1 and φ0 = η(t) the time-averaged quantities are

    e0   = (1/T R0³) ∫ η^δ ‖u‖²/2 dt
    ε0ᵥ  = (1/T R0³) ν ∫ η ‖∇u‖² dt
    |f|²0 = (1/T R0³) ∫ η ‖f‖² dt,  F0 = (|f|²0)^{1/2}

and the energy equality tested against η gives the residual

    ε∞-proxy = (1/T R0³) [∫ η′ ‖u‖²/2 + ∫ η (f, u)] − ε0ᵥ,

which is zero for smooth solutions up to quadrature error.  Every time
integral uses the composite trapezoid rule on the snapshot times unless the
per-step series is requested.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.integrate import trapezoid

from ..errors import InsufficientDataError
from ..fields import advection, sobolev_norm
from ..localization.cutoffs import TimeCutoff, partition_of_unity
from ..settings import get_logger
from ..solver.settings_solver import MIN_QUADRATURE_NODES

logger = get_logger("budget")

FLUX_ZERO_TOL = 1e-10
MACHINE_FLOOR = 1e-300


@dataclass(frozen=True)
class TimeNodes:
    """Snapshot times shifted to the support of η, with η and η′ sampled there."""

    t: np.ndarray
    weights: np.ndarray  # trapezoid weights, Σ w = T
    eta: np.ndarray
    eta_dt: np.ndarray
    T: float

    def integrate(self, values: np.ndarray) -> float:
        """(1/T)∫ values dt; ``values`` indexed like the nodes."""
        return float(np.dot(self.weights, values) / self.T)


def trapezoid_weights(t: np.ndarray) -> np.ndarray:
    w = np.zeros_like(t, dtype=float)
    if len(t) < 2:
        return w
    dt = np.diff(t)
    w[:-1] += dt / 2.0
    w[1:] += dt / 2.0
    return w


def time_nodes(times: np.ndarray, eta: TimeCutoff) -> TimeNodes:
    """
    Quadrature nodes for a time cutoff on [0, T] over the given snapshot times.

    Raises:
        InsufficientDataError: if the snapshots do not span [0, T].
    """
    times = np.asarray(times, dtype=float)
    if len(times) < 2:
        raise InsufficientDataError("time quadrature needs at least two snapshots")
    t = times - times[0]
    if t[-1] < eta.T * (1.0 - 1e-9):
        raise InsufficientDataError(
            f"trajectory covers {t[-1]:.6g} time units, shorter than the cutoff support T={eta.T:.6g}"
        )
    keep = t <= eta.T * (1.0 + 1e-12)
    t = np.minimum(t[keep], eta.T)
    if len(t) < MIN_QUADRATURE_NODES:
        logger.warning("only %d quadrature nodes inside supp(eta); at least %d are recommended",
                       len(t), MIN_QUADRATURE_NODES)
    return TimeNodes(t, trapezoid_weights(t), eta.value(t), eta.derivative(t), eta.T)


@dataclass
class GlobalBudget:
    """Integral-scale quantities of one trajectory and one time cutoff."""

    e0: float
    e0_local: float  # η^{2δ−1} weight, the one the localized energies sandwich
    eps0_viscous: float
    eps_inf_proxy: float
    phi0: float
    fsq0: float
    force_work: float
    transport: float
    tau_m1_sq_raw: float  # (1/T R0³)∫η²‖A^{−1/2}u‖²
    tau_tilde_sq_raw: float  # (1/T R0³)∫η^{2δ−1}‖A^{−1/2}u‖²
    T: float
    R0: float
    nu: float
    delta: float
    quadrature: str = "snapshots"
    nodes: int = 0
    moments: Dict[str, float] = field(default_factory=dict)
    pressure_convention: str = "zero-mean"

    @property
    def eps0(self) -> float:
        """ε0 used by every theorem check: viscous part plus the positive residual."""
        return self.eps0_viscous + max(self.eps_inf_proxy, 0.0)

    @property
    def F0(self) -> float:
        return math.sqrt(max(self.fsq0, 0.0))

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["eps0"] = self.eps0
        out["F0"] = self.F0
        return out


def _snapshot_norms(traj, nodes: TimeNodes) -> Dict[str, np.ndarray]:
    count = len(nodes.t)
    rows = {name: np.zeros(count) for name in ("energy", "enstrophy", "inv", "work", "flux")}
    f = traj.force.f
    for k in range(count):
        u = traj.snapshot(k).u.spectral()
        rows["energy"][k] = 0.5 * sobolev_norm(u, 0.0) ** 2
        rows["enstrophy"][k] = sobolev_norm(u, 1.0) ** 2
        rows["inv"][k] = sobolev_norm(u, -1.0) ** 2
        rows["work"][k] = traj.grid.volume * float(np.real(np.vdot(f.data, u.data)))
        adv, _ = advection(u)
        rows["flux"][k] = traj.grid.volume * float(np.real(np.vdot(u.data, adv)))
    return rows


def global_budget(traj, eta: TimeCutoff, nu: Optional[float] = None, R0: Optional[float] = None,
                  quadrature: str = "snapshots") -> GlobalBudget:
    """
    Integral-scale budget of ``traj`` against the time cutoff ``eta``.

    Args:
        traj: Trajectory whose snapshots span [0, eta.T].
        eta: Time cutoff.
        nu: Viscosity (defaults to the trajectory's).
        R0: Integral scale (defaults to L/4).
        quadrature: "snapshots" (trapezoid over snapshots) or "series"
            (trapezoid over the per-step energy series for e0, ε0ᵥ, work
            and transport).

    Raises:
        InsufficientDataError: if the trajectory is shorter than supp(η).
        ValueError: unknown quadrature.
    """
    if quadrature not in ("snapshots", "series"):
        raise ValueError(f"quadrature must be 'snapshots' or 'series', got {quadrature!r}")
    nu = traj.nu if nu is None else nu
    R0 = traj.grid.R0 if R0 is None else R0
    delta = eta.delta
    nodes = time_nodes(traj.times, eta)
    norms = _snapshot_norms(traj, nodes)
    scale = 1.0 / R0 ** 3
    eta_v = nodes.eta

    e0 = scale * nodes.integrate(eta_v ** delta * norms["energy"])
    e0_local = scale * nodes.integrate(eta_v ** (2 * delta - 1) * norms["energy"])
    eps_v = scale * nu * nodes.integrate(eta_v * norms["enstrophy"])
    work = scale * nodes.integrate(eta_v * norms["work"])
    transport = scale * nodes.integrate(nodes.eta_dt * norms["energy"])

    if quadrature == "series":
        s = traj.series
        t = s["t"].to_numpy() - traj.times[0]
        sel = (t >= -1e-12) & (t <= eta.T * (1.0 + 1e-12))
        ts = np.clip(t[sel], 0.0, eta.T)
        ev, ed = eta.value(ts), eta.derivative(ts)
        energy = s["energy"].to_numpy()[sel]
        e0 = scale * trapezoid(ev ** delta * energy, ts) / eta.T
        e0_local = scale * trapezoid(ev ** (2 * delta - 1) * energy, ts) / eta.T
        eps_v = scale * nu * trapezoid(ev * s["enstrophy"].to_numpy()[sel], ts) / eta.T
        work = scale * trapezoid(ev * s["force_work"].to_numpy()[sel], ts) / eta.T
        transport = scale * trapezoid(ed * energy, ts) / eta.T

    fsq = traj.force.norm ** 2
    return GlobalBudget(
        e0=e0,
        e0_local=e0_local,
        eps0_viscous=eps_v,
        eps_inf_proxy=transport + work - eps_v,
        phi0=scale * nodes.integrate(eta_v * norms["flux"]),
        fsq0=scale * fsq * nodes.integrate(eta_v),
        force_work=work,
        transport=transport,
        tau_m1_sq_raw=scale * nodes.integrate(eta_v ** 2 * norms["inv"]),
        tau_tilde_sq_raw=scale * nodes.integrate(eta_v ** (2 * delta - 1) * norms["inv"]),
        T=eta.T,
        R0=R0,
        nu=nu,
        delta=delta,
        quadrature=quadrature,
        nodes=len(nodes.t),
        moments=dict(eta.moments),
    )


@dataclass
class FluxZeroReport:
    phi_omega: float  # (1/T R0³)∫η (B(u,u), u)
    per_snapshot: List[float]  # (B(u,u), u)/R0³ at each node
    reference: float
    tolerance: float
    dealiased: bool

    @property
    def worst(self) -> float:
        return max((abs(v) for v in self.per_snapshot), default=0.0)

    @property
    def passed(self) -> bool:
        limit = self.tolerance * self.reference
        return abs(self.phi_omega) <= limit and self.worst <= limit


def global_flux_zero_check(traj, eta: TimeCutoff, eps0: Optional[float] = None,
                           dealiased: bool = True, tol: float = FLUX_ZERO_TOL) -> FluxZeroReport:
    """
    Check that the global flux (B(u, u), u) vanishes on the periodic box.

    The reference scale is max(ε0, machine floor); ``eps0`` defaults to the
    viscous dissipation of the same snapshots.  ``dealiased=False`` evaluates
    the aliased product, for which the identity fails.
    """
    nodes = time_nodes(traj.times, eta)
    R0 = traj.grid.R0
    values, enst = [], []
    for k in range(len(nodes.t)):
        u = traj.snapshot(k).u.spectral()
        adv, _ = advection(u, dealiased=dealiased)
        values.append(traj.grid.volume * float(np.real(np.vdot(u.data, adv))) / R0 ** 3)
        enst.append(sobolev_norm(u, 1.0) ** 2)
    if eps0 is None:
        eps0 = traj.nu * nodes.integrate(nodes.eta * np.asarray(enst)) / R0 ** 3
    phi = nodes.integrate(nodes.eta * np.asarray(values))
    report = FluxZeroReport(phi, values, max(eps0, MACHINE_FLOOR), tol, dealiased)
    if not report.passed:
        logger.warning("global flux %.3e exceeds %.1e x eps0 (dealiased=%s)", phi, tol, dealiased)
    return report


@dataclass
class InequalityRecord:
    name: str
    lhs: float
    rhs: float
    tolerance: float

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.lhs <= self.rhs + self.tolerance


def time_localized_energy_inequality(budget: GlobalBudget, rel_tol: float = 1e-6) -> InequalityRecord:
    """ε0ᵥ ≤ transport + force work, i.e. a nonnegative ε∞-proxy up to tolerance."""
    scale = max(abs(budget.eps0_viscous), abs(budget.force_work), abs(budget.transport), MACHINE_FLOOR)
    return InequalityRecord(
        "time_localized_energy_inequality",
        lhs=budget.eps0_viscous,
        rhs=budget.transport + budget.force_work,
        tolerance=rel_tol * scale,
    )


@dataclass
class TelescopingReport:
    """Per-element sums over the periodic partition of unity vs global pairings."""

    sums: Dict[str, float]
    globals: Dict[str, float]
    tolerance: float

    def error(self, key: str) -> float:
        ref = max(abs(self.globals["dissipation"]), abs(self.globals[key]), MACHINE_FLOOR)
        return abs(self.sums[key] - self.globals[key]) / ref

    @property
    def passed(self) -> bool:
        return all(self.error(k) <= self.tolerance for k in self.sums)


def partition_telescoping_check(traj, eta: TimeCutoff, nu: Optional[float] = None,
                                tol: float = 1e-10) -> TelescopingReport:
    """
    Sum localized pairings over the eight partition-of-unity elements.

    Dissipation, force work and transport must add up to the global values;
    the flux terms must add up to zero.
    """
    from .local_budget import local_budgets

    nu = traj.nu if nu is None else nu
    elements = partition_of_unity(traj.grid.L)
    budgets = local_budgets(traj, elements, eta, nu=nu)
    # elements have R = L/4 = R0, so the 1/(T R³) normalizations coincide
    sums = {
        "dissipation": math.fsum(b.dissipation for b in budgets),
        "force_work": math.fsum(b.force_work for b in budgets),
        "transport": math.fsum(b.transport for b in budgets),
        "flux": math.fsum(b.flux for b in budgets),
    }
    glob = global_budget(traj, eta, nu=nu)
    globals_ = {
        "dissipation": glob.eps0_viscous,
        "force_work": glob.force_work,
        "transport": glob.transport,
        "flux": 0.0,
    }
    return TelescopingReport(sums, globals_, tol)
