"""
Inertial-range detection on a flux profile.
"""

from dataclasses import dataclass
from itertools import groupby
from typing import List, Optional, Sequence, Tuple


@dataclass(frozen=True)
class InertialRange:
    R_min: float
    R_max: float
    scales: Tuple[float, ...]

    @property
    def width(self) -> float:
        return self.R_max / self.R_min


def inertial_range_detect(profile: Sequence, bracket: Tuple[float, float],
                          eps0: Optional[float] = None, value: str = "avg_flux") -> Optional[InertialRange]:
    """
    Largest contiguous run of scales on which every covering's ⟨Φ⟩_R is in ``bracket``.

    Args:
        profile: ScaleAverage rows, any order, several coverings per scale allowed.
        bracket: (lower, upper); multiples of ``eps0`` when ``eps0`` is given.
        eps0: optional normalisation of the bracket.
        value: row attribute to test.

    Returns:
        The range, or None when no scale qualifies. Ties go to the larger scales.
    """
    lo, hi = bracket
    if eps0 is not None:
        lo, hi = lo * eps0, hi * eps0
    rows = sorted(profile, key=lambda r: r.R)
    scales: List[Tuple[float, bool]] = []
    for R, group in groupby(rows, key=lambda r: r.R):
        scales.append((R, all(lo <= getattr(r, value) <= hi for r in group)))

    best: List[float] = []
    run: List[float] = []
    for R, ok in scales:
        if ok:
            run.append(R)
            # >= keeps the later (larger-R) run on ties
            if len(run) >= len(best):
                best = list(run)
        else:
            run = []
    if not best:
        return None
    return InertialRange(best[0], best[-1], tuple(best))
