"""
Localized energy budgets and (K1, K2)-averages.

For a space cutoff ψ_i at scale R and the time cutoff η, with φ_i = η ψ_i:

    e_i  = (1/T R³) ∬ |u|²/2 φ_i^{2δ−1}
    ε_i  = (1/T R³) ν ∬ |∇u|² φ_i
    Φ_i  = (1/T R³) ∬ (|u|²/2 + p) u·∇φ_i
    fw_i = (1/T R³) ∬ f·u φ_i
    tr_i = (1/T R³) ∬ |u|²/2 (∂_t φ_i + ν Δφ_i)
    |f|²_i = (1/T R³) ∬ |f|² φ_i

and the local energy equality reads residual_i = Φ_i − ε_i + tr_i + fw_i = 0.
Space integrals use the rectangle rule on the grid, time integrals the
trapezoid rule on the snapshots.
"""

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..errors import InsufficientDataError
from ..fields import velocity_gradient
from ..localization.cutoffs import TimeCutoff, family_for_covering
from ..settings import get_logger, get_runtime_settings
from .global_budget import GlobalBudget, time_nodes

logger = get_logger("budget")

PROFILE_COLUMNS = ["R", "covering_id", "avg_flux", "avg_diss", "avg_energy", "avg_fsq", "avg_fu", "n", "K1", "K2"]
MIN_CELLS_PER_SCALE = 4
SAMPLE_CACHE_BYTES = 256 * 2 ** 20


@dataclass
class LocalBudget:
    index: int
    energy: float
    dissipation: float
    flux: float
    force_work: float
    transport: float
    fsq: float

    @property
    def residual(self) -> float:
        return self.flux - self.dissipation + self.transport + self.force_work


@dataclass
class ScaleAverage:
    """(K1, K2)-averages of one covering at scale R."""

    R: float
    covering_id: str
    avg_energy: float
    avg_diss: float
    avg_flux: float
    avg_fsq: float
    avg_fu: float
    avg_transport: float
    avg_residual: float
    avg_abs_residual: float
    n: int
    K1: int
    K2: int

    @property
    def balance_flux(self) -> float:
        """⟨ε⟩ − ⟨tr⟩ − ⟨fw⟩, the flux the local balance implies."""
        return self.avg_diss - self.avg_transport - self.avg_fu

    @property
    def fu_majorant(self) -> float:
        return math.sqrt(2.0 * max(self.avg_fsq, 0.0) * max(self.avg_energy, 0.0))

    def to_row(self) -> dict:
        return asdict(self)


class _Fields:
    """Physical densities of one snapshot, computed once and shared by all cutoffs."""

    def __init__(self, snap, f_phys: np.ndarray, nu: float) -> None:
        u = snap.u.spectral()
        if snap.p is None:
            raise InsufficientDataError(f"snapshot at t={snap.time:.6g} carries no pressure")
        self.u = u.physical().data
        self.half_sq = 0.5 * np.sum(self.u ** 2, axis=0)
        self.head = self.half_sq + snap.p.physical().data
        self.diss = nu * np.sum(velocity_gradient(u) ** 2, axis=(0, 1))
        self.fu = np.sum(f_phys * self.u, axis=0)
        self.fsq = np.sum(f_phys ** 2, axis=0)


class _SampleCache:
    """
    Cutoff samples kept between snapshots while they fit in a byte budget.

    Safe to share between the ball workers: lookups and inserts hold one lock,
    sampling runs outside it.
    """

    def __init__(self, cutoffs: Sequence, coords, limit: int = SAMPLE_CACHE_BYTES) -> None:
        self.cutoffs = cutoffs
        self.coords = coords
        self.limit = limit
        self.used = 0
        self.store: Dict[int, object] = {}
        self._lock = threading.Lock()

    def get(self, i: int):
        with self._lock:
            hit = self.store.get(i)
        if hit is not None:
            return hit
        smp = self.cutoffs[i].sample(self.coords)
        size = smp.psi.nbytes * 5
        with self._lock:
            if i in self.store:
                return self.store[i]
            if self.used + size <= self.limit:
                self.store[i] = smp
                self.used += size
        return smp


def _pairings(fields: _Fields, smp, delta: float, eta: float, eta_dt: float, nu: float) -> np.ndarray:
    """[energy, dissipation, flux, force work, transport, |f|²] integrands at one time."""
    ix = smp.ix
    psi = smp.psi
    half_sq = fields.half_sq[ix]
    u_dot_grad = sum(fields.u[a][ix] * smp.grad[a] for a in range(3))
    return np.array([
        eta ** (2 * delta - 1) * np.sum(half_sq * psi ** (2 * delta - 1)),
        eta * np.sum(fields.diss[ix] * psi),
        eta * np.sum(fields.head[ix] * u_dot_grad),
        eta * np.sum(fields.fu[ix] * psi),
        np.sum(half_sq * (eta_dt * psi + nu * eta * smp.lap)),
        eta * np.sum(fields.fsq[ix] * psi),
    ])


def local_budgets(traj, cutoffs: Sequence, eta: TimeCutoff, nu: Optional[float] = None,
                  workers: Optional[int] = None) -> List[LocalBudget]:
    """
    Localized budgets for many cutoffs in a single pass over the snapshots.

    Args:
        traj: Trajectory spanning [0, eta.T].
        cutoffs: Objects with ``R``, ``delta`` (optional) and ``sample(coords)``.
        eta: Time cutoff; its δ is used for the energy weight.
        nu: Viscosity (defaults to the trajectory's).
        workers: Threads for the per-ball pairings (default from runtime settings).

    Returns:
        One LocalBudget per cutoff, in input order.

    Raises:
        ValueError: a cutoff whose support exceeds one period.
        InsufficientDataError: short trajectory or missing pressure.
    """
    nu = traj.nu if nu is None else nu
    grid = traj.grid
    for c in cutoffs:
        if c.R > grid.L / 4.0 * (1.0 + 1e-12):
            raise ValueError(f"cutoff scale R={c.R} exceeds L/4; its support would wrap the box")
    nodes = time_nodes(traj.times, eta)
    coords = (grid.x,) * 3
    cache = _SampleCache(list(cutoffs), coords)
    workers = workers or get_runtime_settings().ball_workers
    totals = np.zeros((len(cutoffs), 6))
    f_phys = traj.force.f.physical().data

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for k in range(len(nodes.t)):
            w = nodes.weights[k]
            eta_k, eta_dt_k = float(nodes.eta[k]), float(nodes.eta_dt[k])
            if w == 0 or (eta_k == 0 and eta_dt_k == 0):
                continue
            fields = _Fields(traj.snapshot(k), f_phys, nu)

            def one(i: int) -> np.ndarray:
                return _pairings(fields, cache.get(i), eta.delta, eta_k, eta_dt_k, nu)

            indices = range(len(cutoffs))
            rows = list(pool.map(one, indices)) if pool else [one(i) for i in indices]
            for i, row in enumerate(rows):
                totals[i] += w * row
    finally:
        if pool is not None:
            pool.shutdown()

    out = []
    for i, c in enumerate(cutoffs):
        scale = grid.cell_volume / (eta.T * c.R ** 3)
        e, d, phi, fw, tr, fsq = (scale * totals[i]).tolist()
        out.append(LocalBudget(i, e, d, phi, fw, tr, fsq))
    return out


def local_budget(traj, cutoff, eta: TimeCutoff, nu: Optional[float] = None) -> LocalBudget:
    """Budget of a single cutoff (see ``local_budgets``)."""
    return local_budgets(traj, [cutoff], eta, nu=nu, workers=1)[0]


def kk_average(budgets: Sequence[LocalBudget], covering) -> ScaleAverage:
    """
    Arithmetic mean (1/n)Σ_i of the per-ball values of one covering.

    Raises:
        ValueError: empty covering or a count mismatch.
    """
    n = len(budgets)
    if n == 0:
        raise ValueError("cannot average over an empty covering")
    if n != covering.n:
        raise ValueError(f"{n} budgets for a covering of {covering.n} balls")

    def mean(key: str) -> float:
        return math.fsum(getattr(b, key) for b in budgets) / n

    return ScaleAverage(
        R=covering.R,
        covering_id=covering.covering_id,
        avg_energy=mean("energy"),
        avg_diss=mean("dissipation"),
        avg_flux=mean("flux"),
        avg_fsq=mean("fsq"),
        avg_fu=mean("force_work"),
        avg_transport=mean("transport"),
        avg_residual=mean("residual"),
        avg_abs_residual=math.fsum(abs(b.residual) for b in budgets) / n,
        n=n,
        K1=covering.K1,
        K2=covering.K2,
    )


@dataclass
class SandwichCheck:
    """Inner and outer brackets of a nonnegative density's average."""

    quantity: str
    value: float
    inner: tuple
    outer: tuple
    applicable: bool = True
    note: str = ""
    rel_tol: float = 1e-10

    def _inside(self, bracket: tuple) -> bool:
        lo, hi = bracket
        slack = self.rel_tol * max(abs(hi), abs(self.value), 1e-300)
        return lo - slack <= self.value <= hi + slack

    @property
    def passed(self) -> bool:
        return (not self.applicable) or (self._inside(self.inner) and self._inside(self.outer))

    @property
    def margins(self) -> tuple:
        return self.value - self.inner[0], self.inner[1] - self.value


def positivity_sandwich_check(quantity: str, avg: float, Q0: float, n: int, R: float, R0: float,
                              K1: float, K2: float, dim: int = 3, nonnegative: bool = True,
                              rel_tol: float = 1e-10) -> SandwichCheck:
    """
    (1/n)(R0/R)^d Q0 ≤ ⟨Q⟩_R ≤ K2 (1/n)(R0/R)^d Q0, and Q0/K1 ≤ ⟨Q⟩_R ≤ K2 Q0.

    Sign-varying densities are reported as not applicable.
    """
    base = (R0 / R) ** dim / n * Q0
    inner = (base, K2 * base)
    outer = (Q0 / K1, K2 * Q0)
    if not nonnegative:
        return SandwichCheck(quantity, avg, inner, outer, applicable=False,
                             note="density changes sign; positivity bracket does not apply",
                             rel_tol=rel_tol)
    return SandwichCheck(quantity, avg, inner, outer, rel_tol=rel_tol)


def sandwich_checks(avg: ScaleAverage, glob: GlobalBudget, covering, rel_tol: float = 1e-10) -> List[SandwichCheck]:
    """Sandwiches for e (η^{2δ−1} weight), ε (viscous) and |f|² of one covering."""
    args = dict(n=avg.n, R=avg.R, R0=glob.R0, K1=covering.K1, K2=covering.K2, rel_tol=rel_tol)
    return [
        positivity_sandwich_check("energy", avg.avg_energy, glob.e0_local, **args),
        positivity_sandwich_check("dissipation", avg.avg_diss, glob.eps0_viscous, **args),
        positivity_sandwich_check("fsq", avg.avg_fsq, glob.fsq0, **args),
        positivity_sandwich_check("flux", avg.avg_flux, 0.0, nonnegative=False, **args),
    ]


@dataclass
class ForceWorkAverage:
    average: float
    majorant: float

    @property
    def passed(self) -> bool:
        return abs(self.average) <= self.majorant * (1.0 + 1e-12) + 1e-300

    @property
    def margin(self) -> float:
        return self.majorant - abs(self.average)


def force_work_average(traj, covering, eta: TimeCutoff, cutoffs=None, nu: Optional[float] = None) -> ForceWorkAverage:
    """⟨(f, u)⟩_R with the majorant √2 ⟨|f|²⟩_R^{1/2} ⟨e⟩_R^{1/2}."""
    cutoffs = cutoffs if cutoffs is not None else family_for_covering(covering, eta.delta).cutoffs
    avg = kk_average(local_budgets(traj, cutoffs, eta, nu=nu), covering)
    return ForceWorkAverage(avg.avg_fu, avg.fu_majorant)


def flux_bracket(glob: GlobalBudget, R: float, n: int, C0: float, K2: float,
                 dim: int = 3) -> tuple:
    """
    Two-sided bound on the (K1, K2)-averaged flux at scale R.

    lower = (1/n)(R0/R)^d [ε0 − K2 C0 (1/T + ν/R²) e0 − √2 K2 F0 e0^{1/2}]
    upper = K2 (1/n)(R0/R)^d [ε0 + C0 (1/T + ν/R²) e0 + √2 F0 e0^{1/2}]

    with e0 the η^{2δ−1}-weighted energy and ε0 the viscous dissipation.
    For T ≥ R²/ν the transport factor is at most 2C0ν/R².
    """
    factor = (glob.R0 / R) ** dim / n
    transport = C0 * (1.0 / glob.T + glob.nu / R ** 2) * glob.e0_local
    force = math.sqrt(2.0) * glob.F0 * math.sqrt(max(glob.e0_local, 0.0))
    eps = glob.eps0_viscous
    lower = factor * (eps - K2 * transport - K2 * force)
    upper = K2 * factor * (eps + transport + force)
    return lower, upper


def flux_profile(traj, coverings: Iterable, eta: TimeCutoff, nu: Optional[float] = None,
                 delta: Optional[float] = None) -> List[ScaleAverage]:
    """
    ScaleAverage rows for every covering (all scales, all replicas).

    Raises:
        ValueError: a scale under 4 grid cells or above R0.
    """
    grid = traj.grid
    delta = eta.delta if delta is None else delta
    rows = []
    for cov in coverings:
        if cov.R <= MIN_CELLS_PER_SCALE * grid.dx:
            raise ValueError(f"scale R={cov.R:.4g} is under-resolved (needs R > {MIN_CELLS_PER_SCALE} dx)")
        if cov.R > grid.R0 * (1.0 + 1e-12):
            raise ValueError(f"scale R={cov.R:.4g} exceeds R0={grid.R0:.4g}")
        family = family_for_covering(cov, delta)
        budgets = local_budgets(traj, family.cutoffs, eta, nu=nu)
        avg = kk_average(budgets, cov)
        logger.debug("R=%.4g %s: <Phi>=%.4g <eps>=%.4g", cov.R, cov.covering_id, avg.avg_flux, avg.avg_diss)
        rows.append(avg)
    return rows


def profile_frame(rows: Sequence[ScaleAverage]) -> pd.DataFrame:
    """Profile table with the published column order first."""
    df = pd.DataFrame([r.to_row() for r in rows])
    if df.empty:
        return pd.DataFrame(columns=PROFILE_COLUMNS)
    extra = [c for c in df.columns if c not in PROFILE_COLUMNS]
    return df[PROFILE_COLUMNS + extra]


def write_profile(rows: Sequence[ScaleAverage], path: Union[str, Path]) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    profile_frame(rows).to_csv(p, index=False, float_format="%.17g")
    return p
