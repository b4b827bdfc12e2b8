"""
(K1, K2)-coverings of the periodic box at scale R.

A covering is a set of n centers x_i such that

    (R0/R)^d ≤ n ≤ K1 (R0/R)^d,
    every point lies in some B(x_i, R),
    no point lies in more than K2 of the doubled balls B(x_i, 2R).

Coverings are dimension-generic (d = 3 for the flow, d = 1 for the toy
density).  Validation is done on a sampling grid with periodic k-d trees.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from ..errors import CoveringInfeasibleError
from ..settings import get_logger

logger = get_logger("covering")

Coords = Tuple[np.ndarray, ...]


def next_power_of_two(value: int) -> int:
    return 1 << max(0, int(math.ceil(math.log2(max(int(value), 1)))))


def default_coords(L: float, dim: int = 3, points: Optional[int] = None) -> Coords:
    """Uniform sampling grid used when no simulation grid is supplied."""
    if points is None:
        points = 64 if dim == 3 else 4096 if dim == 1 else 256
    x = np.arange(points) * (L / points)
    return (x,) * dim


def coords_of(grid_or_coords) -> Coords:
    """Accept either a ``Grid`` or a tuple of 1D coordinate arrays."""
    if hasattr(grid_or_coords, "x") and hasattr(grid_or_coords, "N"):
        return (grid_or_coords.x,) * 3
    return tuple(np.asarray(c, dtype=float) for c in grid_or_coords)


def _wrap(points: np.ndarray, L: float) -> np.ndarray:
    p = np.mod(points, L)
    return np.where(p >= L, 0.0, p)


def _grid_points(coords: Coords) -> np.ndarray:
    mesh = np.meshgrid(*coords, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


@dataclass(frozen=True)
class CoveringValidation:
    """Measured properties of a covering on a sampling grid."""

    K1_min: int
    K2_min: int
    coverage_ok: bool
    lower_bound_ok: bool
    max_gap: float

    def admits(self, K1: int, K2: int) -> bool:
        return self.coverage_ok and self.lower_bound_ok and self.K1_min <= K1 and self.K2_min <= K2


@dataclass(frozen=True)
class Covering:
    """Ball centers at scale R with declared multiplicities (K1, K2)."""

    R: float
    L: float
    centers: np.ndarray
    K1: int
    K2: int
    R0: float
    kind: str = "lattice"
    seed: Optional[int] = None
    validation: Optional[CoveringValidation] = field(default=None, compare=False)

    @property
    def n(self) -> int:
        return int(self.centers.shape[0])

    @property
    def dim(self) -> int:
        return int(self.centers.shape[1])

    @property
    def ratio(self) -> float:
        """(R0/R)^d, the count a perfect tiling would use."""
        return (self.R0 / self.R) ** self.dim

    @property
    def covering_id(self) -> str:
        tag = f"{self.kind}" if self.seed is None else f"{self.kind}-{self.seed}"
        return f"{tag}@R={self.R:.6g}"

    @property
    def valid(self) -> bool:
        return self.validation is not None and self.validation.admits(self.K1, self.K2)

    def metadata(self) -> dict:
        return {
            "covering_id": self.covering_id,
            "R": self.R,
            "R0": self.R0,
            "L": self.L,
            "n": self.n,
            "K1": self.K1,
            "K2": self.K2,
            "seed": self.seed,
            "kind": self.kind,
            "validation": asdict(self.validation) if self.validation else None,
        }


def multiplicity(centers: np.ndarray, points: np.ndarray, radius: float, L: float) -> np.ndarray:
    """#{i : |x − x_i|_per < radius} for every sampling point x."""
    tree = cKDTree(_wrap(centers, L), boxsize=L)
    return np.asarray(
        tree.query_ball_point(_wrap(points, L), r=radius * (1.0 - 1e-12), return_length=True)
    )


def validate_covering(cov: Covering, grid_or_coords) -> CoveringValidation:
    """
    Measure (K1_min, K2_min) and coverage of ``cov`` on a sampling grid.

    Args:
        cov: Covering to check.
        grid_or_coords: ``Grid`` or tuple of 1D coordinate arrays.

    Returns:
        CoveringValidation with K2_min = max #{i : |x − x_i| < 2R},
        coverage_ok = every sample within R of a center and
        K1_min = ceil(n / (R0/R)^d).
    """
    coords = coords_of(grid_or_coords)
    points = _grid_points(coords)
    tree = cKDTree(_wrap(cov.centers, cov.L), boxsize=cov.L)
    gap, _ = tree.query(_wrap(points, cov.L))
    max_gap = float(np.max(gap))
    counts = multiplicity(cov.centers, points, 2.0 * cov.R, cov.L)
    ratio = cov.ratio
    return CoveringValidation(
        K1_min=int(math.ceil(cov.n / ratio - 1e-9)),
        K2_min=int(np.max(counts)),
        coverage_ok=max_gap <= cov.R * (1.0 + 1e-12),
        lower_bound_ok=cov.n >= ratio * (1.0 - 1e-12),
        max_gap=max_gap,
    )


def _finish(cov: Covering, coords: Coords, K1: Optional[int], K2: Optional[int]) -> Covering:
    check = validate_covering(cov, coords)
    K1 = K1 if K1 is not None else next_power_of_two(check.K1_min)
    K2 = K2 if K2 is not None else next_power_of_two(check.K2_min)
    return replace(cov, K1=int(K1), K2=int(K2), validation=check)


def _check_scale(L: float, R: float, R0: float) -> None:
    if not 0 < R <= R0 * (1.0 + 1e-12):
        raise ValueError(f"R must lie in (0, R0] = (0, {R0}], got {R}")
    if R > L / 4.0 * (1.0 + 1e-12):
        raise ValueError(f"R = {R} exceeds L/4; doubled balls would wrap the torus")


def _lattice_centers(L: float, m: int, dim: int) -> np.ndarray:
    s = L / m
    axis = (np.arange(m) + 0.5) * s
    mesh = np.meshgrid(*([axis] * dim), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def lattice_covering(
    L: float,
    R: float,
    R0: Optional[float] = None,
    dim: int = 3,
    grid_or_coords=None,
    K1: Optional[int] = None,
    K2: Optional[int] = None,
) -> Covering:
    """
    Cubic-lattice covering with spacing s = L/m, m = ceil(√d·L/(2R)).

    The half-diagonal s√d/2 of a lattice cell is at most R, so the balls
    B(x_i, R) cover the torus.  Declared (K1, K2) default to the measured
    minima rounded up to the next power of two.
    """
    R0 = L / 4.0 if R0 is None else R0
    _check_scale(L, R, R0)
    m = int(math.ceil(math.sqrt(dim) * L / (2.0 * R) - 1e-12))
    coords = coords_of(grid_or_coords) if grid_or_coords is not None else default_coords(L, dim)
    cov = Covering(R, L, _lattice_centers(L, m, dim), 0, 0, R0, kind="lattice")
    return _finish(cov, coords, K1, K2)


def jittered_covering(
    L: float,
    R: float,
    seed: int,
    jitter: float = 0.25,
    R0: Optional[float] = None,
    dim: int = 3,
    grid_or_coords=None,
    K1: Optional[int] = None,
    K2: Optional[int] = None,
) -> Covering:
    """
    Lattice covering with every center perturbed by up to ``jitter``·s per axis.

    The lattice is refined so that s√d(1/2 + jitter) ≤ R, which keeps the
    perturbed balls covering the continuum torus.
    """
    R0 = L / 4.0 if R0 is None else R0
    _check_scale(L, R, R0)
    if not 0 <= jitter < 0.5:
        raise ValueError(f"jitter must lie in [0, 1/2), got {jitter}")
    m = int(math.ceil(math.sqrt(dim) * (0.5 + jitter) * L / R - 1e-12))
    s = L / m
    rng = np.random.default_rng(seed)
    centers = _lattice_centers(L, m, dim)
    centers = _wrap(centers + rng.uniform(-jitter * s, jitter * s, size=centers.shape), L)
    coords = coords_of(grid_or_coords) if grid_or_coords is not None else default_coords(L, dim)
    cov = Covering(R, L, centers, 0, 0, R0, kind="jittered", seed=seed)
    return _finish(cov, coords, K1, K2)


def translate_covering(cov: Covering, shift: Sequence[float], grid_or_coords=None) -> Covering:
    """Rigidly translate all centers; revalidates when a sampling grid is given."""
    centers = _wrap(cov.centers + np.asarray(shift, dtype=float)[None, :], cov.L)
    moved = replace(cov, centers=centers, validation=None)
    if grid_or_coords is None:
        return moved
    return replace(moved, validation=validate_covering(moved, grid_or_coords))


def export_covering(cov: Covering, directory: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``centers.csv`` (i,x,y,z) and ``covering.json`` metadata."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    names = ["x", "y", "z"][: cov.dim] if cov.dim <= 3 else [f"x{k}" for k in range(cov.dim)]
    df = pd.DataFrame(cov.centers, columns=names)
    df.insert(0, "i", np.arange(cov.n))
    csv_path = out / "centers.csv"
    df.to_csv(csv_path, index=False)
    meta_path = out / "covering.json"
    meta_path.write_text(json.dumps(cov.metadata(), indent=2), encoding="utf-8")
    return csv_path, meta_path


def _neighbourhood(point: np.ndarray, coords: Coords, radius: float, L: float):
    """Index sub-box and mask of sampling points with |x − point|_per < radius."""
    index, disps = [], []
    for axis, c in enumerate(coords):
        d = np.mod(c - point[axis] + L / 2.0, L) - L / 2.0
        keep = np.nonzero(np.abs(d) < radius)[0]
        index.append(keep)
        disps.append(d[keep])
    dim = len(coords)
    r2 = 0.0
    for axis, d in enumerate(disps):
        shape = [1] * dim
        shape[axis] = len(d)
        r2 = r2 + d.reshape(shape) ** 2
    return np.ix_(*index), r2 < radius ** 2 * (1.0 - 1e-12) ** 2


def adversarial_covering(
    q: Union[np.ndarray, Callable[..., np.ndarray]],
    R: float,
    sign: int,
    L: float,
    grid_or_coords,
    K1: int,
    K2: int,
    R0: Optional[float] = None,
    ball_values: Optional[np.ndarray] = None,
) -> Covering:
    """
    Covering biased toward regions where q has the requested sign.

    Starts from the minimal lattice covering and greedily stacks extra
    centers on the sampling points whose ball value is most favourable
    (most negative for ``sign = -1``), as long as the stack still moves the
    running average in the requested direction, the budget
    n ≤ K1 (R0/R)^d holds and no point exceeds K2 doubled balls.

    Args:
        q: Density sampled on the grid, or a callable evaluated on the mesh.
        R: Ball radius.
        sign: +1 or −1.
        L: Box side.
        grid_or_coords: Sampling grid (``Grid`` or coordinate tuple).
        K1, K2: Declared multiplicities the result must respect.
        R0: Integral scale (default L/4).
        ball_values: Localized average a ball centered at each sampling
            point would contribute; defaults to q itself.

    Raises:
        CoveringInfeasibleError: if even the base lattice violates (K1, K2).
    """
    if sign not in (-1, 1):
        raise ValueError("sign must be +1 or -1")
    coords = coords_of(grid_or_coords)
    dim = len(coords)
    R0 = L / 4.0 if R0 is None else R0
    _check_scale(L, R, R0)
    mesh = np.meshgrid(*coords, indexing="ij")
    q_values = q(*mesh) if callable(q) else np.asarray(q, dtype=float)
    values = q_values if ball_values is None else np.asarray(ball_values, dtype=float)

    base = lattice_covering(L, R, R0=R0, dim=dim, grid_or_coords=coords, K1=K1, K2=K2)
    budget = int(math.floor(K1 * base.ratio + 1e-9))
    if base.n > budget or base.validation.K2_min > K2 or not base.validation.coverage_ok:
        raise CoveringInfeasibleError(
            f"base lattice at R={R} needs n={base.n}, K2={base.validation.K2_min}; "
            f"declared budget n<={budget}, K2={K2}"
        )

    points = _grid_points(coords)
    counts = multiplicity(base.centers, points, 2.0 * R, L).reshape(q_values.shape)
    nearest = cKDTree(points).query(base.centers)[1]
    running = float(np.sum(values.ravel()[nearest]))
    n = base.n
    extra = []
    for flat in np.argsort(-sign * values.ravel(), kind="stable"):
        v = values.flat[flat]
        if sign * v <= 0 or sign * (v - running / n) <= 0:
            break
        point = points[flat]
        box, mask = _neighbourhood(point, coords, 2.0 * R, L)
        local = counts[box]
        allow = min(K2 - int(local[mask].max()), budget - n)
        if allow <= 0:
            continue
        local[mask] += allow
        counts[box] = local
        extra.extend([point] * allow)
        n += allow
        running += allow * v
        if n >= budget:
            break

    centers = base.centers if not extra else np.vstack([base.centers, np.asarray(extra)])
    logger.debug("adversarial covering R=%.4g sign=%+d: %d base + %d stacked centers",
                 R, sign, base.n, len(extra))
    cov = Covering(R, L, centers, int(K1), int(K2), R0,
                   kind="adversarial+" if sign > 0 else "adversarial-")
    return replace(cov, validation=validate_covering(cov, coords))
