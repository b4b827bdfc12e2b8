"""
Scale dependence of (K1, K2)-averages for a sign-varying 1D density.

The density q(x) = M(0.5 + sin(Nx)) on the periodic interval of length 2π
(R0 = π) has global average Q0 = M/2.  At scales well above 1/N every
covering sees an average comparable to Q0; below the oscillation scale a
covering that stacks balls on the negative (positive) lobes can push the
average toward −M (+M).

Ball averages are (1/2R)∫ q ψ_i dx with ψ_i the 1D refined cutoff, so a
constant density c gives c·(1/2R)∫ψ, slightly above c.  For a cutoff that is
even around its center the ball average of q is exactly

    M (0.5·I0 + Ic·sin(N c_i)),  I0 = (1/2R)∫ψ,  Ic = (1/2R)∫ψ(s) cos(Ns) ds,

which is what the strategies use.
"""

import math
from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import simpson

from ..errors import CoveringInfeasibleError
from ..localization.covering import Covering, adversarial_covering, lattice_covering
from ..localization.cutoffs import DEFAULT_DELTA, make_space_cutoff
from ..settings import get_logger

logger = get_logger("toy")

STRATEGIES = ("lattice", "adversarial-", "adversarial+")
TOY_COLUMNS = ["R", "strategy", "average"]
PROFILE_QUADRATURE_POINTS = 4001


@dataclass(frozen=True)
class ToySpec:
    """
    Toy density and covering constants.

    ``fine_K`` is the multiplicity declared for scales at or below 1/(4N):
    with K2 = 3 a valid covering cannot stack enough balls on one lobe to
    change the sign of the average, so the fine-scale coverings use a larger
    declared (K1, K2).
    """

    M: float = 1.0
    N: int = 100
    R0: float = math.pi
    K1: int = 3
    K2: int = 3
    samples_per_R: int = 8
    min_samples: int = 4096
    delta: float = DEFAULT_DELTA
    fine_K: int = 128

    def __post_init__(self) -> None:
        if self.N < 10:
            raise ValueError(f"N must be at least 10, got {self.N}")
        if self.M <= 0:
            raise ValueError(f"M must be positive, got {self.M}")

    @property
    def L(self) -> float:
        return 2.0 * self.R0

    @property
    def fine_scale(self) -> float:
        return 1.0 / (4.0 * self.N)

    def multiplicities(self, R: float) -> Tuple[int, int]:
        if R <= self.fine_scale:
            return self.fine_K, self.fine_K
        return self.K1, self.K2

    def coords(self, R: float) -> Tuple[np.ndarray]:
        points = max(self.min_samples, int(math.ceil(self.samples_per_R * self.L / R)))
        return (np.arange(points) * (self.L / points),)


def toy_density(spec: ToySpec, x) -> np.ndarray:
    return spec.M * (0.5 + np.sin(spec.N * np.asarray(x, dtype=float)))


def toy_global_average(spec: ToySpec, points: int = 65536) -> float:
    """Q0 = (1/2R0)∫ q ψ0 with ψ0 ≡ 1, by the periodic rectangle rule."""
    x = np.arange(points) * (spec.L / points)
    return float(np.mean(toy_density(spec, x)))


def profile_integrals(spec: ToySpec, R: float) -> Tuple[float, float]:
    """(I0, Ic) of the 1D cutoff at scale R."""
    cutoff = make_space_cutoff([0.0], R, spec.delta, L=spec.L)
    s = np.linspace(-2.0 * R, 2.0 * R, PROFILE_QUADRATURE_POINTS)
    psi, _, _ = cutoff.radial(np.abs(s))
    I0 = simpson(psi, x=s) / (2.0 * R)
    Ic = simpson(psi * np.cos(spec.N * s), x=s) / (2.0 * R)
    return float(I0), float(Ic)


def ball_values(spec: ToySpec, R: float, centers: np.ndarray) -> np.ndarray:
    I0, Ic = profile_integrals(spec, R)
    c = np.asarray(centers, dtype=float).reshape(-1)
    return spec.M * (0.5 * I0 + Ic * np.sin(spec.N * c))


def ball_average_quadrature(spec: ToySpec, R: float, center: float, points: int = 8001) -> float:
    """(1/2R)∫ q ψ_i dx by direct quadrature over the support of one ball."""
    cutoff = make_space_cutoff([center], R, spec.delta, L=spec.L)
    x = np.linspace(center - 2.0 * R, center + 2.0 * R, points)
    psi, _, _ = cutoff.radial(np.abs(x - center))
    return float(simpson(toy_density(spec, x) * psi, x=x) / (2.0 * R))


def toy_covering(spec: ToySpec, R: float, strategy: str) -> Covering:
    """
    Covering for one strategy.

    Raises:
        ValueError: unknown strategy or R outside (0, R0/2].
        CoveringInfeasibleError: the covering does not admit the declared (K1, K2).
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    if not 0 < R <= spec.L / 4.0:
        raise ValueError(f"R must lie in (0, {spec.L / 4.0:.6g}], got {R}")
    K1, K2 = spec.multiplicities(R)
    coords = spec.coords(R)
    if strategy == "lattice":
        cov = lattice_covering(spec.L, R, R0=spec.R0, dim=1, grid_or_coords=coords, K1=K1, K2=K2)
    else:
        sign = -1 if strategy.endswith("-") else 1
        values = ball_values(spec, R, coords[0])
        cov = adversarial_covering(values, R, sign, spec.L, coords, K1, K2, R0=spec.R0, ball_values=values)
    if not cov.valid:
        raise CoveringInfeasibleError(
            f"{strategy} covering at R={R:.4g} does not admit (K1, K2)=({K1}, {K2}): {cov.validation}"
        )
    return cov


def toy_average(spec: ToySpec, R: float, strategy: str = "lattice") -> float:
    """1D (K1, K2)-average of q at scale R for the given covering strategy."""
    cov = toy_covering(spec, R, strategy)
    avg = float(np.mean(ball_values(spec, R, cov.centers[:, 0])))
    logger.debug("toy R=%.4g %s: n=%d average=%.6g", R, strategy, cov.n, avg)
    return avg


def toy_table(spec: ToySpec, scales: Iterable[float], strategies: Iterable[str] = STRATEGIES) -> pd.DataFrame:
    rows = [
        {"R": float(R), "strategy": s, "average": toy_average(spec, float(R), s)}
        for R in scales
        for s in strategies
    ]
    return pd.DataFrame(rows, columns=TOY_COLUMNS)
