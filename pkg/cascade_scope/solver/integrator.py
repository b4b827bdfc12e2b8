"""
Time integration of u_t + νAu + B(u, u) = f on the periodic box.

The viscous term is handled exactly by an integrating factor and the
remaining terms by the three-stage strong-stability-preserving Runge-Kutta
scheme (Shu-Osher form) applied to the integrating-factor variable.
"""

import math
import time as wallclock
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, List, Optional, Union

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from ..errors import InstabilityError, InvariantViolation
from ..fields import (
    Grid,
    ScalarField,
    VectorField,
    advection,
    divergence_error,
    pressure_from_advection,
    pressure_from_velocity,
    random_solenoidal,
)
from ..settings import get_logger
from . import snapshot_io
from .forcing import ForceProfile, attractor_bound, make_force
from .settings_solver import SimulationConfig

logger = get_logger("solver")

ForceLike = Union[VectorField, ForceProfile, Callable[[float], VectorField], None]
SNAPSHOT_DIVERGENCE_TOL = 1e-10


@dataclass(frozen=True)
class Snapshot:
    time: float
    u: VectorField
    p: ScalarField


class MemorySnapshotStore:
    """Keeps every snapshot in memory (small grids, tests)."""

    def __init__(self) -> None:
        self._items: List[Snapshot] = []

    def append(self, snap: Snapshot) -> None:
        self._items.append(snap)

    def load(self, i: int) -> Snapshot:
        return self._items[i]

    def __len__(self) -> int:
        return len(self._items)


class DiskSnapshotStore:
    """Writes one file per snapshot and loads them back lazily."""

    def __init__(self, directory: Union[str, Path], nu: float, paths: Optional[List[Path]] = None) -> None:
        self.directory = Path(directory)
        self.nu = nu
        self.paths: List[Path] = list(paths or [])

    def append(self, snap: Snapshot) -> None:
        path = self.directory / f"snap_{len(self.paths):05d}.bin"
        snapshot_io.write_snapshot(path, snap.u, snap.p, self.nu, snap.time)
        self.paths.append(path)

    def load(self, i: int) -> Snapshot:
        header, u, p = snapshot_io.read_snapshot(self.paths[i])
        return Snapshot(float(header["time"]), u, p)

    def __len__(self) -> int:
        return len(self.paths)


@dataclass
class Trajectory:
    """Snapshots on [0, T] after spin-up, plus the per-step energy series."""

    grid: Grid
    nu: float
    force: ForceProfile
    times: np.ndarray
    store: object
    series: pd.DataFrame
    attractor_proximity: bool = False
    spin_up_time: float = 0.0
    info: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) != len(self.store):
            raise ValueError("times and stored snapshots differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("snapshot times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def snapshot(self, i: int) -> Snapshot:
        return self.store.load(i)

    def __iter__(self) -> Iterator[Snapshot]:
        for i in range(len(self)):
            yield self.snapshot(i)

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    @classmethod
    def from_fields(cls, times, velocities, force: ForceProfile, nu: float,
                    pressures=None, attractor_proximity: bool = False) -> "Trajectory":
        """In-memory trajectory from given velocity fields (pressure recovered if absent)."""
        store = MemorySnapshotStore()
        rows = []
        for k, (t, u) in enumerate(zip(times, velocities)):
            u = u.spectral()
            p = pressures[k] if pressures is not None else pressure_from_velocity(u)
            store.append(Snapshot(float(t), u, p))
            rows.append(energy_row(float(t), u, force.f))
        series = pd.DataFrame(rows, columns=snapshot_io.SERIES_COLUMNS)
        return cls(u.grid, nu, force, np.asarray(times, dtype=float), store, series, attractor_proximity)


def energy_row(t: float, u: VectorField, f: VectorField) -> list:
    """[t, ‖u‖²/2, ‖∇u‖², (f, u)] from spectral sums."""
    grid = u.grid
    a = u.spectral().data
    amp = np.sum(np.abs(a) ** 2, axis=0)
    energy = 0.5 * grid.volume * float(np.sum(amp))
    enstrophy = grid.volume * float(np.sum(grid.kappa_sq * amp))
    work = grid.volume * float(np.real(np.vdot(a, f.spectral().data)))
    return [t, energy, enstrophy, work]


class IFRK3Stepper:
    """Integrating-factor SSP-RK3 stepper with cached exponentials."""

    def __init__(self, grid: Grid, nu: float, force: ForceLike = None, nonlinear: bool = True) -> None:
        self.grid = grid
        self.nu = nu
        self.nonlinear = nonlinear
        self._force = force
        self._dt: Optional[float] = None
        self._E1 = self._Eh = self._Eh_inv = None
        self.umax = 0.0

    def force_at(self, t: float) -> np.ndarray:
        f = self._force
        if f is None:
            return 0.0
        if isinstance(f, ForceProfile):
            return f.f.data
        if isinstance(f, VectorField):
            return f.spectral().data
        return f(t).spectral().data

    def _factors(self, dt: float) -> None:
        if dt != self._dt:
            rate = self.nu * self.grid.kappa_sq
            self._E1 = np.exp(-rate * dt)
            self._Eh = np.exp(-rate * dt / 2.0)
            self._Eh_inv = np.exp(np.minimum(rate * dt / 2.0, 700.0))
            self._dt = dt

    def rhs(self, u_hat: np.ndarray, t: float) -> np.ndarray:
        """−P_L (u·∇)u + f in spectral space."""
        out = np.zeros_like(u_hat)
        if self.nonlinear:
            adv, up = advection(VectorField(self.grid, u_hat), dealiased=True)
            kappa = self.grid.kappa
            div = np.sum(kappa * adv, axis=0) / self.grid.kappa_sq_safe
            out -= adv - kappa * div
            self.umax = float(np.sqrt(np.max(np.sum(up ** 2, axis=0))))
        return out + self.force_at(t)

    def advance(self, u_hat: np.ndarray, dt: float, t: float) -> np.ndarray:
        """One step of size dt from time t; returns new spectral coefficients."""
        self._factors(dt)
        E1, Eh, Ehi = self._E1, self._Eh, self._Eh_inv
        u1 = E1 * (u_hat + dt * self.rhs(u_hat, t))
        u2 = 0.75 * Eh * u_hat + 0.25 * Ehi * (u1 + dt * self.rhs(u1, t + dt))
        u3 = (1.0 / 3.0) * E1 * u_hat + (2.0 / 3.0) * Eh * (u2 + dt * self.rhs(u2, t + dt / 2.0))
        return self._clean(u3)

    def _clean(self, u_hat: np.ndarray) -> np.ndarray:
        grid = self.grid
        u_hat = u_hat * grid.dealias_mask
        div = np.sum(grid.kappa * u_hat, axis=0) / grid.kappa_sq_safe
        u_hat = u_hat - grid.kappa * div
        u_hat[:, 0, 0, 0] = 0.0
        return u_hat


def _check_finite(u_hat: np.ndarray, t: float, dt: float, umax: float, cfl: Optional[float]) -> None:
    if not np.all(np.isfinite(u_hat)):
        hint = f"current CFL target {cfl}" if cfl is not None else "fixed dt"
        raise InstabilityError(
            f"non-finite velocity at t={t:.6g} (dt={dt:.3g}, last max|u|={umax:.3g}); "
            f"reduce dt or the CFL number ({hint})"
        )


def step(u: VectorField, f: ForceLike, nu: float, dt: float, t: float = 0.0,
         p: Optional[ScalarField] = None, nonlinear: bool = True):
    """
    Advance (u, p) by one time step.

    Args:
        u: Divergence-free, dealiased velocity.
        f: Static force, ``ForceProfile`` or callable t ↦ VectorField.
        nu: Viscosity.
        dt: Time step.
        t: Current time (used by time-dependent forces).
        p: Current pressure (not needed by the scheme; accepted for symmetry).
        nonlinear: Set False to integrate the linear Stokes problem only.

    Returns:
        (u_new, p_new) with p_new recovered from u_new.

    Raises:
        InstabilityError: on non-finite output.
    """
    del p
    stepper = IFRK3Stepper(u.grid, nu, f, nonlinear=nonlinear)
    new = stepper.advance(u.spectral().data, dt, t)
    _check_finite(new, t, dt, stepper.umax, None)
    u_new = VectorField(u.grid, new)
    p_new = pressure_from_velocity(u_new) if nonlinear else ScalarField.zeros(u.grid).spectral()
    return u_new, p_new


def integrate(u: VectorField, f: ForceLike, nu: float, dt: float, steps: int,
              t0: float = 0.0, nonlinear: bool = True) -> VectorField:
    """Fixed-step integration over ``steps`` steps from t0."""
    stepper = IFRK3Stepper(u.grid, nu, f, nonlinear=nonlinear)
    u_hat = u.spectral().data.copy()
    t = t0
    for _ in range(int(steps)):
        u_hat = stepper.advance(u_hat, dt, t)
        t += dt
        _check_finite(u_hat, t, dt, stepper.umax, None)
    return VectorField(u.grid, u_hat)


def initial_condition(config: SimulationConfig) -> VectorField:
    grid = config.grid
    init = config.initial
    if init.kind == "zero" or init.amplitude == 0:
        return VectorField.zeros(grid)
    return random_solenoidal(grid, init.seed, k_max=init.k_max, amplitude=init.amplitude)


def force_for(config: SimulationConfig) -> ForceProfile:
    fs = config.forcing
    if fs.target == 0:
        return ForceProfile.zero(config.grid)
    return make_force(config.grid, fs.k_f, fs.target, config.nu, fs.seed, fs.mode, fs.shell)


class _Clock:
    """dt policy: fixed, or CFL against max|u| capped by dt_max."""

    def __init__(self, config: SimulationConfig) -> None:
        self.config = config

    def dt(self, umax: float) -> float:
        c = self.config
        if c.dt is not None:
            return c.dt
        if umax <= 0:
            return c.dt_max
        return min(c.cfl * c.grid.dx / umax, c.dt_max)


def run(
    config: SimulationConfig,
    u0: Optional[VectorField] = None,
    force: Optional[ForceProfile] = None,
    out_dir: Optional[Union[str, Path]] = None,
) -> Trajectory:
    """
    Spin up, then integrate over [0, T] emitting snapshots every ``snapshot_every``.

    Spin-up lasts at least ``spin_up`` and continues (up to ``max_spin_up``)
    until ‖u‖² ≤ (2/π)⁴R0⁴‖f‖²/ν² has held for one eddy turnover R0/u_rms.
    With ``out_dir`` the snapshots go to ``out_dir/snapshots`` and the
    trajectory loads them lazily.

    Raises:
        InstabilityError: non-finite velocity.
        SnapshotIOError: a snapshot could not be written.
    """
    grid = config.grid
    force = force if force is not None else force_for(config)
    u_hat = (u0 if u0 is not None else initial_condition(config)).spectral().data.copy()
    stepper = IFRK3Stepper(grid, config.nu, force)
    clock = _Clock(config)
    bound = attractor_bound(force, config.nu)
    stepper.umax = float(np.sqrt(np.max(np.sum(VectorField(grid, u_hat).physical().data ** 2, axis=0))))
    started = wallclock.perf_counter()

    # spin-up
    t, steps = 0.0, 0
    held_since: Optional[float] = None
    settled = force.is_zero
    while t < config.spin_up_cap - 1e-12:
        energy2 = grid.volume * float(np.sum(np.abs(u_hat) ** 2))
        if not force.is_zero:
            if energy2 <= bound:
                held_since = t if held_since is None else held_since
                urms = math.sqrt(energy2 / grid.volume)
                eddy = config.R0 / urms if urms > 0 else 0.0
                settled = t - held_since >= eddy
            else:
                held_since, settled = None, False
        if t >= config.spin_up - 1e-12 and settled:
            break
        dt = min(clock.dt(stepper.umax), config.spin_up_cap - t)
        u_hat = stepper.advance(u_hat, dt, t)
        t += dt
        steps += 1
        _check_finite(u_hat, t, dt, stepper.umax, config.cfl if config.dt is None else None)
    if not force.is_zero and not settled:
        logger.warning("spin-up cap %.4g reached before the attractor bound held for an eddy turnover", t)
    logger.info("spin-up finished at t=%.4g after %d steps", t, steps)
    spin_up_time = t

    # recording
    store = DiskSnapshotStore(Path(out_dir) / "snapshots", config.nu) if out_dir else MemorySnapshotStore()
    cadence = config.snapshot_every
    count = config.snapshot_count
    t_end = (count - 1) * cadence
    times: List[float] = []
    rows = []
    proximity = not force.is_zero

    def emit(tr: float, coeffs: np.ndarray) -> bool:
        u = VectorField(grid, coeffs)
        if divergence_error(u) > SNAPSHOT_DIVERGENCE_TOL:
            raise InvariantViolation(f"snapshot at t={tr:.6g} is not divergence-free")
        adv, _ = advection(u)
        store.append(Snapshot(tr, u, pressure_from_advection(grid, adv)))
        times.append(tr)
        return grid.volume * float(np.sum(np.abs(coeffs) ** 2)) <= bound * (1.0 + 1e-12)

    tr = 0.0
    rows.append(energy_row(tr, VectorField(grid, u_hat), force.f))
    proximity &= emit(tr, u_hat)
    k_next = 1
    while k_next < count:
        target = k_next * cadence
        dt = min(clock.dt(stepper.umax), target - tr)
        u_hat = stepper.advance(u_hat, dt, spin_up_time + tr)
        tr = target if abs(target - tr - dt) <= 1e-12 * max(1.0, t_end) else tr + dt
        steps += 1
        _check_finite(u_hat, tr, dt, stepper.umax, config.cfl if config.dt is None else None)
        rows.append(energy_row(tr, VectorField(grid, u_hat), force.f))
        if tr >= target:
            proximity &= emit(tr, u_hat)
            k_next += 1
        if config.log_every and steps % config.log_every == 0:
            logger.info("t=%.4g dt=%.3g energy=%.6g", tr, dt, rows[-1][1])

    series = pd.DataFrame(rows, columns=snapshot_io.SERIES_COLUMNS)
    elapsed = wallclock.perf_counter() - started
    logger.info("run finished: %d snapshots, %d steps, %.1fs wall", len(times), steps, elapsed)
    if not force.is_zero:
        logger.info("attractor bound %s on every snapshot", "held" if proximity else "did NOT hold")
    return Trajectory(
        grid=grid,
        nu=config.nu,
        force=force,
        times=np.asarray(times),
        store=store,
        series=series,
        attractor_proximity=bool(proximity),
        spin_up_time=spin_up_time,
        info={"steps": steps, "wall_seconds": elapsed},
    )


def discrete_energy_balance(traj: Trajectory) -> pd.DataFrame:
    """
    Per-interval residual of the energy equality between consecutive snapshots.

    residual = E(t₁) − E(t₀) + ν∫‖∇u‖² − ∫(f, u), integrals by the trapezoid
    rule over the per-step series; ``relative`` divides by the larger of the
    dissipated and injected amounts.
    """
    s = traj.series
    t = s["t"].to_numpy()
    rows = []
    for t0, t1 in zip(traj.times[:-1], traj.times[1:]):
        sel = (t >= t0 - 1e-12) & (t <= t1 + 1e-12)
        ts = t[sel]
        diss = traj.nu * trapezoid(s["enstrophy"].to_numpy()[sel], ts)
        work = trapezoid(s["force_work"].to_numpy()[sel], ts)
        e = s["energy"].to_numpy()[sel]
        res = e[-1] - e[0] + diss - work
        scale = max(abs(diss), abs(work), abs(e[-1] - e[0]), 1e-300)
        rows.append((t0, t1, res, abs(res) / scale))
    return pd.DataFrame(rows, columns=["t0", "t1", "residual", "relative"])
