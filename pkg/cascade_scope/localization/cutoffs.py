"""
Refined space/time cutoffs and the periodic partition of unity.

A refined space cutoff at scale R around x_i is ψ = χ(|x − x_i|/R)^m, where
χ is the quintic smoothstep transition (1 on [0, 1], 0 on [2, ∞)).  With
m = ceil(1/(1 − δ)) the exponents m − 1 − mδ and m − 2 − m(2δ − 1) are
nonnegative, so

    |∇ψ| ≤ (C0/R) ψ^δ,   |Δψ| ≤ (C0/R²) ψ^{2δ−1}

hold with a constant C0 that depends only on (δ, dimension).  Derivatives
are evaluated analytically from χ; nothing here uses finite differences.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize_scalar

DEFAULT_DELTA = 0.75
BASE_RADIAL_SAMPLES = 256
MIN_SIMPSON_PANELS = 10_000
SAMPLED_RATIO_TOL = 1e-5


# ----------------------------------------------------------------------
# Profiles
# ----------------------------------------------------------------------

def smoothstep(t):
    """Quintic smoothstep S(t) = 6t⁵ − 15t⁴ + 10t³ clipped to [0, 1]."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


def _smoothstep_d1(t):
    inside = (t > 0) & (t < 1)
    return np.where(inside, 30.0 * t ** 2 * (1.0 - t) ** 2, 0.0)


def _smoothstep_d2(t):
    inside = (t > 0) & (t < 1)
    return np.where(inside, 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t), 0.0)


def profile_exponent(delta: float) -> int:
    """m = ceil(1/(1 − δ))."""
    return int(math.ceil(1.0 / (1.0 - delta) - 1e-12))


def _check_delta(delta: float) -> None:
    if not 0.5 < delta < 1.0:
        raise ValueError(f"delta must lie in (1/2, 1), got {delta}")


@dataclass(frozen=True)
class RadialProfile:
    """χ(s)^m and its first two derivatives in the scaled radius s = r/R."""

    m: int

    @staticmethod
    def chi(s):
        return 1.0 - smoothstep(np.asarray(s, dtype=float) - 1.0)

    @staticmethod
    def chi_d1(s):
        return -_smoothstep_d1(np.asarray(s, dtype=float) - 1.0)

    @staticmethod
    def chi_d2(s):
        return -_smoothstep_d2(np.asarray(s, dtype=float) - 1.0)

    def value(self, s):
        return self.chi(s) ** self.m

    def d1(self, s):
        c = self.chi(s)
        return self.m * c ** (self.m - 1) * self.chi_d1(s)

    def d2(self, s):
        c = self.chi(s)
        return (
            self.m * (self.m - 1) * c ** (self.m - 2) * self.chi_d1(s) ** 2
            + self.m * c ** (self.m - 1) * self.chi_d2(s)
        )

    def grad_ratio(self, s, delta: float):
        """|d/ds χ^m| / (χ^m)^δ written without 0/0."""
        c = self.chi(s)
        return self.m * np.abs(self.chi_d1(s)) * c ** (self.m - 1 - self.m * delta)

    def lap_ratio(self, s, delta: float, dim: int):
        """|Δ_s χ^m| / (χ^m)^{2δ−1} in ``dim`` dimensions, written without 0/0."""
        s = np.asarray(s, dtype=float)
        c = self.chi(s)
        q = 2.0 * delta - 1.0
        d1 = self.chi_d1(s)
        radial = np.where(s > 0, (dim - 1) / np.where(s > 0, s, 1.0), 0.0)
        val = (
            self.m * (self.m - 1) * c ** (self.m - 2 - self.m * q) * d1 ** 2
            + self.m * c ** (self.m - 1 - self.m * q) * (self.chi_d2(s) + radial * d1)
        )
        return np.abs(val)


def _refined_max(func, s: np.ndarray) -> float:
    values = func(s)
    i = int(np.argmax(values))
    best = float(values[i])
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, len(s) - 1)]
    if hi > lo:
        res = minimize_scalar(lambda t: -float(func(np.array([t]))[0]), bounds=(lo, hi),
                              method="bounded", options={"xatol": 1e-13})
        best = max(best, -float(res.fun))
    return best


@lru_cache(maxsize=64)
def certify_profile(delta: float, dim: int = 3, oversample: int = 4) -> Tuple[float, float]:
    """
    Certified (C0_grad, C0_lap) for the profile of exponent ``delta``.

    The ratios R|∇ψ|/ψ^δ and R²|Δψ|/ψ^{2δ−1} are maximised over an
    ``oversample``-times refined radial grid on the transition shell
    1 ≤ s ≤ 2, then the sampled maximum is polished with a bounded scalar
    search.  Both ratios vanish where ψ is constant.
    """
    _check_delta(delta)
    profile = RadialProfile(profile_exponent(delta))
    s = np.linspace(1.0, 2.0, BASE_RADIAL_SAMPLES * oversample + 1)
    c_grad = _refined_max(lambda t: profile.grad_ratio(t, delta), s)
    c_lap = _refined_max(lambda t: profile.lap_ratio(t, delta, dim), s)
    return c_grad, c_lap


# ----------------------------------------------------------------------
# Space cutoffs
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffSample:
    """Cutoff values on the grid sub-box where it is supported."""

    index: Tuple[np.ndarray, ...]
    psi: np.ndarray
    grad: np.ndarray
    lap: np.ndarray

    @property
    def ix(self):
        return np.ix_(*self.index)


@dataclass(frozen=True)
class SpaceCutoff:
    """Refined cutoff ψ = χ(|x − center|_per / R)^m on the periodic box [0, L]^d."""

    center: np.ndarray
    R: float
    delta: float
    L: float
    m: int
    C0_grad: float
    C0_lap: float

    @property
    def C0(self) -> float:
        return max(self.C0_grad, self.C0_lap)

    @property
    def dim(self) -> int:
        return len(self.center)

    def radial(self, r):
        """(ψ, ∂ψ/∂r, Δψ) as functions of the distance r to the center."""
        profile = RadialProfile(self.m)
        s = np.asarray(r, dtype=float) / self.R
        d1 = profile.d1(s)
        radial = np.where(s > 0, (self.dim - 1) / np.where(s > 0, s, 1.0), 0.0)
        lap = (profile.d2(s) + radial * d1) / self.R ** 2
        return profile.value(s), d1 / self.R, lap

    def sample(self, coords: Sequence[np.ndarray]) -> CutoffSample:
        """
        Evaluate ψ, ∇ψ and Δψ on the tensor grid spanned by ``coords``.

        Only the sub-box of points within 2R (per axis) is returned.
        """
        index, disps = [], []
        for axis, c in enumerate(coords):
            d = np.mod(np.asarray(c) - self.center[axis] + self.L / 2.0, self.L) - self.L / 2.0
            keep = np.nonzero(np.abs(d) < 2.0 * self.R)[0]
            index.append(keep)
            disps.append(d[keep])
        dim = len(coords)
        shaped = []
        for axis, d in enumerate(disps):
            shape = [1] * dim
            shape[axis] = len(d)
            shaped.append(d.reshape(shape))
        r = np.sqrt(sum(d ** 2 for d in shaped))
        psi, dpsi, lap = self.radial(r)
        safe_r = np.where(r > 0, r, 1.0)
        grad = np.stack([np.where(r > 0, dpsi * d / safe_r, 0.0) for d in shaped])
        return CutoffSample(tuple(index), psi, grad, lap)


def make_space_cutoff(
    center,
    R: float,
    delta: float = DEFAULT_DELTA,
    L: float = 2.0 * np.pi,
    oversample: int = 4,
) -> SpaceCutoff:
    """
    Build a certified refined space cutoff.

    Args:
        center: Center coordinates (length d, periodic).
        R: Scale, 0 < R ≤ L/4 so the support diameter 4R fits one period.
        delta: Exponent in (1/2, 1).
        L: Box side.
        oversample: Radial refinement factor used by the certification.

    Raises:
        ValueError: if R or delta is out of range.
    """
    _check_delta(delta)
    if not 0 < R <= L / 4.0 * (1.0 + 1e-12):
        raise ValueError(f"R must lie in (0, L/4] = (0, {L / 4.0}], got {R}")
    center = np.mod(np.asarray(center, dtype=float).reshape(-1), L)
    c_grad, c_lap = certify_profile(delta, len(center), oversample)
    return SpaceCutoff(center, float(R), float(delta), float(L), profile_exponent(delta), c_grad, c_lap)


def sample_ratios(cutoff, sample: CutoffSample) -> Tuple[float, float]:
    """Max over the sampled points with ψ > 0 of R|∇ψ|/ψ^δ and R²|Δψ|/ψ^{2δ−1}."""
    psi = sample.psi
    pos = psi > 0
    if not np.any(pos):
        return 0.0, 0.0
    gnorm = np.sqrt(np.sum(sample.grad ** 2, axis=0))
    g = cutoff.R * gnorm[pos] / psi[pos] ** cutoff.delta
    lap = cutoff.R ** 2 * np.abs(sample.lap[pos]) / psi[pos] ** (2.0 * cutoff.delta - 1.0)
    return float(g.max()), float(lap.max())


# ----------------------------------------------------------------------
# Time cutoffs
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class TimeCutoff:
    """η on [0, T]: χ^m ramps of length ρT at both ends, 1 in between."""

    T: float
    delta: float
    rho: float
    m: int
    C0: float
    moments: Dict[str, float] = field(default_factory=dict)

    @property
    def c_eta(self) -> float:
        return self.moments["eta"]

    def _ramp_s(self, t: np.ndarray) -> np.ndarray:
        width = self.rho * self.T
        dist = np.minimum(t, self.T - t)
        return 2.0 - np.clip(dist / width, 0.0, 1.0)

    def value(self, t):
        t = np.asarray(t, dtype=float)
        out = RadialProfile(self.m).value(self._ramp_s(t))
        return np.where((t < 0) | (t > self.T), 0.0, out)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        width = self.rho * self.T
        d = RadialProfile(self.m).d1(self._ramp_s(t)) / width
        sign = np.where(t < self.T / 2.0, -1.0, 1.0)
        return np.where((t < 0) | (t > self.T), 0.0, sign * d)

    def moment(self, power: float, panels: int = MIN_SIMPSON_PANELS) -> float:
        """(1/T)∫η^power dt by composite Simpson on each ramp."""
        return _time_moment(self.m, self.rho, power, panels)


def _time_moment(m: int, rho: float, power: float, panels: int) -> float:
    panels = max(int(panels), MIN_SIMPSON_PANELS)
    panels += panels % 2
    s = np.linspace(1.0, 2.0, panels + 1)
    ramp = simpson(RadialProfile(m).value(s) ** power, x=s)
    return float((1.0 - 2.0 * rho) + 2.0 * rho * ramp)


def make_time_cutoff(T: float, delta: float = DEFAULT_DELTA, rho: float = 0.25,
                     panels: int = MIN_SIMPSON_PANELS) -> TimeCutoff:
    """
    Build a certified refined time cutoff on [0, T].

    Raises:
        ValueError: if T ≤ 0, rho ∉ (0, 1/2] or delta out of range.
    """
    _check_delta(delta)
    if not T > 0:
        raise ValueError(f"T must be positive, got {T}")
    if not 0 < rho <= 0.5:
        raise ValueError(f"ramp fraction rho must lie in (0, 1/2], got {rho}")
    m = profile_exponent(delta)
    c_grad, _ = certify_profile(delta, 1)
    moments = {
        "eta": _time_moment(m, rho, 1.0, panels),
        "eta_delta": _time_moment(m, rho, delta, panels),
        "eta_sq": _time_moment(m, rho, 2.0, panels),
        "eta_2delta_m1": _time_moment(m, rho, 2.0 * delta - 1.0, panels),
    }
    return TimeCutoff(float(T), float(delta), float(rho), m, c_grad / rho, moments)


def theorem_constant(space_C0: float, eta: TimeCutoff) -> float:
    """C0 shared by the space and time bounds."""
    return max(space_C0, eta.C0)


# ----------------------------------------------------------------------
# Families
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class CutoffFamily:
    """Cutoffs of one covering, all at scale R with exponent δ."""

    cutoffs: tuple
    R: float
    delta: float
    covering: object = None
    psi0: float = 1.0

    @property
    def C0(self) -> float:
        return max(c.C0 for c in self.cutoffs)

    def __len__(self) -> int:
        return len(self.cutoffs)

    def __iter__(self):
        return iter(self.cutoffs)


def family_for_covering(covering, delta: float = DEFAULT_DELTA) -> CutoffFamily:
    """One refined cutoff per covering center."""
    cutoffs = tuple(make_space_cutoff(c, covering.R, delta, covering.L) for c in covering.centers)
    return CutoffFamily(cutoffs, covering.R, delta, covering)


@dataclass
class SandwichReport:
    min_sum: float
    max_sum: float
    lower_ok: bool
    upper_ok: bool

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok


def cutoff_sum(cutoffs, coords: Sequence[np.ndarray]) -> np.ndarray:
    """Σ_i ψ_i on the tensor grid spanned by ``coords``."""
    total = np.zeros(tuple(len(c) for c in coords))
    for c in cutoffs:
        smp = c.sample(coords)
        total[smp.ix] += smp.psi
    return total


def verify_family_sandwich(family, coords: Sequence[np.ndarray], psi0: float = 1.0,
                           K2: Optional[float] = None, tol: float = 1e-12) -> SandwichReport:
    """
    Check ψ0 ≤ Σψ_i ≤ K2·ψ0 at every grid point (periodic case ψ0 ≡ 1).

    ``K2`` defaults to the declared value of the family's covering.
    """
    if K2 is None:
        K2 = family.covering.K2
    total = cutoff_sum(family, coords)
    lo, hi = float(total.min()), float(total.max())
    return SandwichReport(lo, hi, lo >= psi0 - tol, hi <= K2 * psi0 + tol)


@dataclass
class FamilyCertificate:
    """Sampled derivative ratios of a cutoff family against its certified constants."""

    R: float
    n: int
    C0_grad: float
    C0_lap: float
    grad_ratio: float
    lap_ratio: float
    sandwich: SandwichReport

    @property
    def bounds_ok(self) -> bool:
        return (self.grad_ratio <= self.C0_grad * (1.0 + SAMPLED_RATIO_TOL)
                and self.lap_ratio <= self.C0_lap * (1.0 + SAMPLED_RATIO_TOL))

    @property
    def passed(self) -> bool:
        return self.bounds_ok and self.sandwich.passed


def certify_family(family: CutoffFamily, coords: Sequence[np.ndarray], psi0: float = 1.0,
                   K2: Optional[float] = None) -> FamilyCertificate:
    """
    Check every cutoff of ``family`` on the grid spanned by ``coords``.

    The largest R|∇ψ|/ψ^δ and R²|Δψ|/ψ^{2δ−1} over all members must stay
    below the smallest certified constants, and the family must satisfy
    ψ0 ≤ Σψ_i ≤ K2·ψ0.

    Raises:
        ValueError: if the family is empty.
    """
    if not len(family):
        raise ValueError("cannot certify an empty cutoff family")
    grad = lap = 0.0
    for cutoff in family:
        g, lp = sample_ratios(cutoff, cutoff.sample(coords))
        grad, lap = max(grad, g), max(lap, lp)
    return FamilyCertificate(
        R=family.R,
        n=len(family),
        C0_grad=min(c.C0_grad for c in family),
        C0_lap=min(c.C0_lap for c in family),
        grad_ratio=grad,
        lap_ratio=lap,
        sandwich=verify_family_sandwich(family, coords, psi0, K2),
    )


# ----------------------------------------------------------------------
# Periodic partition of unity
# ----------------------------------------------------------------------

def _h(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe), 0.0)


def _h_d1(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, _h(t) / safe ** 2, 0.0)


def _h_d2(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, _h(t) * (1.0 / safe ** 4 - 2.0 / safe ** 3), 0.0)


def smooth_transition(t):
    """C∞ step g(t) = h(t)/(h(t) + h(1 − t)), h(t) = exp(−1/t); with g′, g″."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a, b = _h(t), _h(1.0 - t)
    a1, b1 = _h_d1(t), -_h_d1(1.0 - t)
    a2, b2 = _h_d2(t), _h_d2(1.0 - t)
    D = a + b
    g = a / D
    num1 = a1 * b - a * b1
    g1 = num1 / D ** 2
    g2 = (a2 * b - a * b2) / D ** 2 - 2.0 * num1 * (a1 + b1) / D ** 3
    return g, g1, g2


@dataclass(frozen=True)
class PartitionFactor:
    """1D periodic factor: f₁ (which=1) or f₂ = 1 − f₁ (which=2)."""

    L: float
    which: int

    def evaluate(self, x):
        """(f, f′, f″) at positions x."""
        L = self.L
        x = np.mod(np.asarray(x, dtype=float), L)
        w = L / 6.0
        g_up, g1_up, g2_up = smooth_transition((x - w) / w)
        g_dn, g1_dn, g2_dn = smooth_transition((x - 4.0 * w) / w)
        f = g_up - g_dn
        f1 = (g1_up - g1_dn) / w
        f2 = (g2_up - g2_dn) / w ** 2
        if self.which == 2:
            return 1.0 - f, -f1, -f2
        return f, f1, f2

    def support_interval(self) -> Tuple[float, float]:
        """Closed support as an interval, f₂'s expressed in the box shifted by L/2."""
        if self.which == 1:
            return self.L / 6.0, 5.0 * self.L / 6.0
        return -self.L / 3.0, self.L / 3.0


@dataclass(frozen=True)
class PartitionElement:
    """ψ_{i₁i₂i₃}(x) = f_{i₁}(x₁) f_{i₂}(x₂) f_{i₃}(x₃)."""

    L: float
    indices: Tuple[int, int, int]

    @property
    def R(self) -> float:
        return self.L / 4.0

    @property
    def factors(self) -> Tuple[PartitionFactor, ...]:
        return tuple(PartitionFactor(self.L, i) for i in self.indices)

    def sample(self, coords: Sequence[np.ndarray]) -> CutoffSample:
        dim = len(coords)
        vals = []
        for axis, (fac, c) in enumerate(zip(self.factors, coords)):
            shape = [1] * dim
            shape[axis] = len(c)
            vals.append(tuple(v.reshape(shape) for v in fac.evaluate(c)))
        (fx, dfx, ddfx), (fy, dfy, ddfy), (fz, dfz, ddfz) = vals
        psi = fx * fy * fz
        full = np.broadcast_shapes(fx.shape, fy.shape, fz.shape)
        grad = np.stack([np.broadcast_to(g, full) for g in (dfx * fy * fz, fx * dfy * fz, fx * fy * dfz)])
        lap = ddfx * fy * fz + fx * ddfy * fz + fx * fy * ddfz
        index = tuple(np.arange(len(c)) for c in coords)
        return CutoffSample(index, psi, grad, lap)


def partition_of_unity(L: float):
    """The 8 periodic bumps ψ_{i₁i₂i₃}, i_k ∈ {1, 2}, summing to 1."""
    return tuple(
        PartitionElement(L, (i, j, k)) for i in (1, 2) for j in (1, 2) for k in (1, 2)
    )
