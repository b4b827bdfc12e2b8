"""
Spectral field types and operators on the periodic grid.

Fields are immutable values: every operator returns a new field and the
arrays held by a field are read-only views.  All L² pairings use the grid
rectangle rule, which in spectral form is L³ Σ_k û(k)·conj(v̂(k)).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
import scipy.fft as sfft

from ..errors import GridMismatchError
from ..settings import get_runtime_settings
from .grid import Grid

DIVERGENCE_TOL = 1e-8


class Representation(str, Enum):
    SPECTRAL = "spectral"
    PHYSICAL = "physical"


def _readonly(arr: np.ndarray) -> np.ndarray:
    view = arr.view()
    view.flags.writeable = False
    return view


def _fftn(a: np.ndarray) -> np.ndarray:
    return sfft.fftn(a, axes=(-3, -2, -1), norm="forward", workers=get_runtime_settings().fft_workers)


def _ifftn(a: np.ndarray) -> np.ndarray:
    return sfft.ifftn(a, axes=(-3, -2, -1), norm="forward", workers=get_runtime_settings().fft_workers)


@dataclass(frozen=True)
class VectorField:
    """Three-component field on a Grid, stored either as spectral coefficients or samples."""

    grid: Grid
    data: np.ndarray
    representation: Representation = Representation.SPECTRAL
    mean_zero: bool = True

    def __post_init__(self) -> None:
        if self.data.shape != (3,) + self.grid.shape:
            raise GridMismatchError(
                f"vector data shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "representation", Representation(self.representation))
        if self.representation is Representation.SPECTRAL:
            data = np.asarray(self.data, dtype=complex)
            if self.mean_zero and np.any(data[:, 0, 0, 0] != 0):
                scale = max(np.abs(data).max(), 1.0)
                if np.abs(data[:, 0, 0, 0]).max() > 1e-12 * scale:
                    raise ValueError("mean-zero field has a nonzero mean mode")
                data = data.copy()
                data[:, 0, 0, 0] = 0.0
        else:
            data = np.asarray(self.data, dtype=float)
        object.__setattr__(self, "data", _readonly(data))

    @property
    def is_spectral(self) -> bool:
        return self.representation is Representation.SPECTRAL

    def spectral(self) -> "VectorField":
        return self if self.is_spectral else to_spectral(self)

    def physical(self) -> "VectorField":
        return to_physical(self) if self.is_spectral else self

    def with_data(self, data: np.ndarray) -> "VectorField":
        """New field on the same grid and in the same representation."""
        return VectorField(self.grid, data, self.representation, self.mean_zero)

    def __add__(self, other: "VectorField") -> "VectorField":
        self.grid.check_same(other.grid)
        b = other if other.representation is self.representation else _convert(other, self.representation)
        return VectorField(self.grid, self.data + b.data, self.representation, self.mean_zero and b.mean_zero)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "VectorField":
        return self.with_data(self.data * scalar)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, grid: Grid) -> "VectorField":
        return cls(grid, np.zeros((3,) + grid.shape, dtype=complex))

    @classmethod
    def from_physical(cls, grid: Grid, components, mean_zero: bool = True) -> "VectorField":
        """Build a physical field from three broadcastable arrays."""
        data = np.stack([np.broadcast_to(np.asarray(c, dtype=float), grid.shape) for c in components])
        return cls(grid, data, Representation.PHYSICAL, mean_zero)


@dataclass(frozen=True)
class ScalarField:
    """Scalar field (pressure) on a Grid."""

    grid: Grid
    data: np.ndarray
    representation: Representation = Representation.SPECTRAL
    mean_zero: bool = field(default=True)

    def __post_init__(self) -> None:
        if self.data.shape != self.grid.shape:
            raise GridMismatchError(
                f"scalar data shape {self.data.shape} does not match grid {self.grid.shape}"
            )
        object.__setattr__(self, "representation", Representation(self.representation))
        dtype = complex if self.representation is Representation.SPECTRAL else float
        object.__setattr__(self, "data", _readonly(np.asarray(self.data, dtype=dtype)))

    def spectral(self) -> "ScalarField":
        if self.representation is Representation.SPECTRAL:
            return self
        coeffs = _fftn(self.data)
        if self.mean_zero:
            coeffs[0, 0, 0] = 0.0
        return ScalarField(self.grid, coeffs, Representation.SPECTRAL, self.mean_zero)

    def physical(self) -> "ScalarField":
        if self.representation is Representation.PHYSICAL:
            return self
        return ScalarField(self.grid, _ifftn(self.data).real, Representation.PHYSICAL, self.mean_zero)

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.shape), Representation.PHYSICAL)


def _convert(v: VectorField, rep: Representation) -> VectorField:
    return v.spectral() if rep is Representation.SPECTRAL else v.physical()


def _require_spectral(v: VectorField, op: str) -> None:
    if not v.is_spectral:
        raise ValueError(f"{op} requires a spectral field")


# ----------------------------------------------------------------------
# Transforms
# ----------------------------------------------------------------------

def to_spectral(v: VectorField) -> VectorField:
    """
    Forward transform of a physical field.

    The mean mode is pinned to zero when ``v.mean_zero`` is set.
    """
    if v.is_spectral:
        raise ValueError("field is already spectral")
    coeffs = _fftn(v.data)
    if v.mean_zero:
        coeffs[:, 0, 0, 0] = 0.0
    return VectorField(v.grid, coeffs, Representation.SPECTRAL, v.mean_zero)


def to_physical(v: VectorField) -> VectorField:
    """Inverse transform; the imaginary round-off part is dropped."""
    if not v.is_spectral:
        raise ValueError("field is already physical")
    return VectorField(v.grid, _ifftn(v.data).real, Representation.PHYSICAL, v.mean_zero)


# ----------------------------------------------------------------------
# Pairings and norms
# ----------------------------------------------------------------------

def inner_product(u: VectorField, v: VectorField) -> float:
    """L² pairing (u, v) = L³ Σ_k Re(û·conj(v̂))."""
    u.grid.check_same(v.grid)
    a, b = u.spectral().data, v.spectral().data
    return float(u.grid.volume * np.real(np.vdot(b, a)))


def physical_inner(u: VectorField, v: VectorField) -> float:
    """Rectangle-rule pairing (L/N)³ Σ_x u·v on the physical samples."""
    u.grid.check_same(v.grid)
    a, b = u.physical().data, v.physical().data
    return float(np.sum(a * b) * u.grid.cell_volume)


def l2_norm(v: VectorField) -> float:
    return sobolev_norm(v, 0.0)


def _power_factor(grid: Grid, alpha: float) -> np.ndarray:
    if alpha == 0:
        return np.ones(grid.shape)
    factor = grid.kappa_sq_safe ** alpha
    factor[0, 0, 0] = 0.0
    return factor


def _check_negative_power(v: VectorField, alpha: float) -> None:
    if alpha < 0:
        mean = np.abs(v.data[:, 0, 0, 0]).max()
        if mean > 1e-14 * max(np.abs(v.data).max(), 1e-300):
            raise ValueError("negative Stokes powers need a mean-zero field")


def stokes_power(v: VectorField, alpha: float) -> VectorField:
    """
    Apply A^α with A = −Δ: multiply each mode by |2πk/L|^{2α}.

    Args:
        v: Spectral field.
        alpha: Real exponent; negative exponents require a zero mean mode.

    Returns:
        A^α v (the mean mode stays zero for α ≠ 0).
    """
    _require_spectral(v, "stokes_power")
    _check_negative_power(v, alpha)
    return v.with_data(v.data * _power_factor(v.grid, alpha))


def sobolev_norm(v: VectorField, alpha: float) -> float:
    """‖A^{α/2} v‖ = (L³ Σ_k |2πk/L|^{2α} |v̂(k)|²)^{1/2}."""
    s = v.spectral()
    _check_negative_power(s, alpha)
    weight = _power_factor(s.grid, alpha)
    total = np.sum(weight * np.sum(np.abs(s.data) ** 2, axis=0))
    return float(np.sqrt(s.grid.volume * total))


# ----------------------------------------------------------------------
# Projections and differential operators
# ----------------------------------------------------------------------

def leray_project(v: VectorField) -> VectorField:
    """Remove the gradient part: v̂ ← v̂ − κ(κ·v̂)/|κ|², mean mode untouched."""
    _require_spectral(v, "leray_project")
    kappa = v.grid.kappa
    div = np.sum(kappa * v.data, axis=0) / v.grid.kappa_sq_safe
    out = v.data - kappa * div
    return v.with_data(out)


def dealias(v: VectorField) -> VectorField:
    _require_spectral(v, "dealias")
    return v.with_data(v.data * v.grid.dealias_mask)


def divergence_error(v: VectorField) -> float:
    """max_k |κ·v̂(k)| / (|κ| max|v̂|); zero for an exactly solenoidal field."""
    s = v.spectral()
    peak = np.abs(s.data).max()
    if peak == 0:
        return 0.0
    div = np.abs(np.sum(s.grid.kappa * s.data, axis=0)) / np.sqrt(s.grid.kappa_sq_safe)
    return float(div.max() / peak)


def velocity_gradient(u: VectorField) -> np.ndarray:
    """Physical ∂_j u_i as an array of shape (3, 3, N, N, N), index [i, j]."""
    s = u.spectral()
    kappa = s.grid.kappa
    grad_hat = 1j * s.data[:, None] * kappa[None, :]
    return _ifftn(grad_hat).real


def advection(u: VectorField, dealiased: bool = True) -> tuple:
    """
    Pseudo-spectral (u·∇)u in divergence form ∂_j(u_j u_i).

    Returns:
        (N̂, u_phys): spectral advection (not projected) and the physical
        velocity samples used to build it.
    """
    s = u.spectral()
    grid = s.grid
    up = _ifftn(s.data).real
    kappa = grid.kappa
    out = np.zeros((3,) + grid.shape, dtype=complex)
    for i in range(3):
        for j in range(i, 3):
            prod = _fftn(up[i] * up[j])
            out[i] += 1j * kappa[j] * prod
            if j != i:
                out[j] += 1j * kappa[i] * prod
    if dealiased:
        out *= grid.dealias_mask
    return out, up


def nonlinear_term(u: VectorField, dealiased: bool = True) -> VectorField:
    """
    B(u, u) = P_L (u·∇)u with 2/3-rule dealiasing.

    Args:
        u: Divergence-free field.
        dealiased: Set False to reproduce an aliased pipeline.

    Raises:
        ValueError: if u is not divergence-free.
    """
    if divergence_error(u) > DIVERGENCE_TOL:
        raise ValueError("nonlinear_term requires a divergence-free field")
    adv, _ = advection(u, dealiased=dealiased)
    out = VectorField(u.grid, adv, Representation.SPECTRAL, mean_zero=False)
    projected = leray_project(out).data.copy()
    projected[:, 0, 0, 0] = 0.0
    return VectorField(u.grid, projected, Representation.SPECTRAL)


def pressure_from_advection(grid: Grid, adv_hat: np.ndarray) -> ScalarField:
    """Solve −Δp = ∇·N for p with zero mean, given spectral N = (u·∇)u."""
    div = 1j * np.sum(grid.kappa * adv_hat, axis=0)
    p_hat = div / grid.kappa_sq_safe
    p_hat[0, 0, 0] = 0.0
    return ScalarField(grid, p_hat, Representation.SPECTRAL)


def pressure_from_velocity(u: VectorField) -> ScalarField:
    """Pressure of the incompressible flow u (zero-mean convention)."""
    if divergence_error(u) > DIVERGENCE_TOL:
        raise ValueError("pressure_from_velocity requires a divergence-free field")
    adv, _ = advection(u)
    return pressure_from_advection(u.grid, adv)


def poisson_residual(u: VectorField, p: ScalarField) -> float:
    """Relative residual of −Δp = ∇·((u·∇)u)."""
    adv, _ = advection(u)
    grid = u.grid
    rhs = 1j * np.sum(grid.kappa * adv, axis=0)
    rhs[0, 0, 0] = 0.0
    lhs = grid.kappa_sq * p.spectral().data
    scale = max(np.abs(rhs).max(), 1e-300)
    return float(np.abs(lhs - rhs).max() / scale)


# ----------------------------------------------------------------------
# Analytic and random fields
# ----------------------------------------------------------------------

def taylor_green(grid: Grid, amplitude: float = 1.0, three_d: bool = False) -> VectorField:
    """
    Taylor-Green vortex with unit wavenumber 2π/L.

    ``three_d=False`` gives the 2D cell (cos x sin y, −sin x cos y, 0), a
    steady Euler flow; ``three_d=True`` gives (sin x cos y cos z,
    −cos x sin y cos z, 0).
    """
    X, Y, Z = grid.mesh
    k = 2.0 * np.pi / grid.L
    if three_d:
        ux = np.sin(k * X) * np.cos(k * Y) * np.cos(k * Z)
        uy = -np.cos(k * X) * np.sin(k * Y) * np.cos(k * Z)
    else:
        ux = np.cos(k * X) * np.sin(k * Y) + 0.0 * Z
        uy = -np.sin(k * X) * np.cos(k * Y) + 0.0 * Z
    return to_spectral(VectorField.from_physical(grid, (amplitude * ux, amplitude * uy, 0.0 * X)))


def random_solenoidal(
    grid: Grid,
    seed: int,
    k_max: Optional[float] = None,
    amplitude: float = 1.0,
) -> VectorField:
    """
    Random real divergence-free, dealiased field with rms velocity ``amplitude``.

    Modes with integer |k| > k_max are removed (default: everything the 2/3
    rule keeps).
    """
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((3,) + grid.shape)
    coeffs = _fftn(noise)
    coeffs *= grid.dealias_mask
    if k_max is not None:
        coeffs *= grid.k_int_norm <= k_max
    coeffs[:, 0, 0, 0] = 0.0
    v = leray_project(VectorField(grid, coeffs))
    rms = np.sqrt(np.sum(np.abs(v.data) ** 2))
    if rms == 0:
        return VectorField.zeros(grid)
    return v * (amplitude / rms)
