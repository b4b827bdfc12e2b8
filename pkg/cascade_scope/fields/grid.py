"""
Periodic cubic grid on Ω = [0, L]³.

Holds the physical sample coordinates and the integer / physical wavevectors
used by every spectral operation.  Spectral coefficients follow the
``norm="forward"`` convention of ``scipy.fft``:

    u(x) = Σ_k û(k) exp(i 2π k·x / L),   û(k) = N⁻³ Σ_x u(x) exp(−i 2π k·x / L)

so that the grid mean of |u|² equals Σ|û(k)|² and ‖u‖² = L³ Σ|û(k)|².
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ..errors import GridMismatchError


@dataclass(frozen=True)
class Grid:
    """N³ periodic grid with side length L; N is a power of two."""

    N: int
    L: float = 2.0 * np.pi

    def __post_init__(self) -> None:
        if int(self.N) != self.N or self.N < 8 or int(self.N) & (int(self.N) - 1):
            raise ValueError(f"N must be a power of two >= 8, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")

    @property
    def R0(self) -> float:
        """Integral scale; the box holds a ball of radius R0 with its doubled support."""
        return self.L / 4.0

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def cell_volume(self) -> float:
        return self.dx ** 3

    @property
    def volume(self) -> float:
        return self.L ** 3

    @property
    def shape(self) -> tuple:
        return (self.N, self.N, self.N)

    @cached_property
    def x(self) -> np.ndarray:
        """1D sample coordinates, identical along every axis."""
        return np.arange(self.N) * self.dx

    @cached_property
    def mesh(self) -> tuple:
        """Sparse (broadcastable) coordinate arrays X, Y, Z."""
        return tuple(np.meshgrid(self.x, self.x, self.x, indexing="ij", sparse=True))

    @cached_property
    def k_int(self) -> np.ndarray:
        """Integer wavenumbers in [−N/2, N/2) in FFT order."""
        return np.fft.fftfreq(self.N, d=1.0 / self.N).astype(np.int64)

    @cached_property
    def kappa(self) -> np.ndarray:
        """Physical wavevector components 2πk/L, shape (3, N, N, N)."""
        k1 = 2.0 * np.pi / self.L * self.k_int.astype(float)
        kx, ky, kz = np.meshgrid(k1, k1, k1, indexing="ij")
        return np.stack([kx, ky, kz])

    @cached_property
    def kappa_sq(self) -> np.ndarray:
        """|2πk/L|², zero at the mean mode."""
        return np.sum(self.kappa ** 2, axis=0)

    @cached_property
    def kappa_sq_safe(self) -> np.ndarray:
        """|2πk/L|² with the mean mode replaced by 1 (safe divisor)."""
        k2 = self.kappa_sq.copy()
        k2[0, 0, 0] = 1.0
        return k2

    @cached_property
    def k_int_norm(self) -> np.ndarray:
        """|k| of the integer wavevector, shape (N, N, N)."""
        k = self.k_int.astype(float)
        kx, ky, kz = np.meshgrid(k, k, k, indexing="ij")
        return np.sqrt(kx ** 2 + ky ** 2 + kz ** 2)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True where every |k_i| < N/3 (2/3 rule; alias-free for quadratic products)."""
        keep = np.abs(self.k_int) < self.N / 3.0
        return keep[:, None, None] & keep[None, :, None] & keep[None, None, :]

    def check_same(self, other: "Grid") -> None:
        if self != other:
            raise GridMismatchError(f"grid mismatch: {self} vs {other}")
