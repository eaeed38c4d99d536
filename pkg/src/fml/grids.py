"""Periodic spatial grids, spectral machinery, and kernel-operator conventions.

All quadrature follows the discrete measure h^d per grid cell: inner products
carry h^d, operator traces carry h^d, Hilbert-Schmidt norms carry h^{2d} per
entry pair.  A kernel A(x, y) acts on sampled functions as
(Af)(x) = h^d sum_y A(x, y) f(y), so the plain matrix representing the
operator on l2-normalized sample vectors is h^d * entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "ScaleParams",
    "SpatialField",
    "KernelOperator",
    "build_grid",
    "convolve_periodic",
]

# Dense kernels (M^d x M^d) are only materialized below this point count.
DENSE_GUARD = 4096


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on the d-dimensional box [0, L)^d.

    M points per dimension, spacing h = L/M.  The momentum lattice is
    {2*pi*k/L : k integer, -M/2 < k <= M/2} per dimension.
    """

    d: int
    M: int
    L: float

    @property
    def h(self) -> float:
        return self.L / self.M

    @property
    def npoints(self) -> int:
        return self.M**self.d

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.d

    @property
    def weight(self) -> float:
        """Quadrature weight h^d of one grid cell."""
        return self.h**self.d

    def axis_points(self) -> np.ndarray:
        """Grid coordinates 0, h, ..., L-h along one axis."""
        return self.h * np.arange(self.M)

    def coordinates(self, axis: int) -> np.ndarray:
        """Coordinate x_axis as an array over the full d-dimensional grid."""
        x = self.axis_points()
        shape = [1] * self.d
        shape[axis] = self.M
        return np.broadcast_to(x.reshape(shape), self.shape).copy()

    def axis_momenta(self) -> np.ndarray:
        """FFT-ordered angular momenta 2*pi*k/L along one axis."""
        return 2.0 * np.pi * np.fft.fftfreq(self.M, d=self.h)

    def momentum_squared(self) -> np.ndarray:
        """|p|^2 over the full grid, FFT ordering on every axis."""
        q = self.axis_momenta()
        q2 = np.zeros(self.shape)
        for axis in range(self.d):
            shape = [1] * self.d
            shape[axis] = self.M
            q2 = q2 + (q.reshape(shape)) ** 2
        return q2

    def mode_indices(self) -> np.ndarray:
        """Integer mode numbers k in (-M/2, M/2], matching axis order 0..M-1.

        Index j maps to k = j for j <= M/2 and k = j - M otherwise, so the
        Nyquist mode is represented as +M/2.
        """
        k = np.arange(self.M)
        return np.where(k <= self.M // 2, k, k - self.M)


@dataclass(frozen=True)
class ScaleParams:
    """Particle number, dimension, and the semiclassical parameter.

    epsilon = N^(-1/d); this keeps epsilon^d * N = 1 in every dimension, the
    property that makes the Wigner mass and the commutator bounds
    dimension-covariant.
    """

    N: int
    d: int
    epsilon: float = field(init=False)

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        object.__setattr__(self, "epsilon", float(self.N) ** (-1.0 / self.d))


@dataclass
class SpatialField:
    """Scalar field sampled on a Grid (stored with the grid's d-dim shape)."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.size != self.grid.npoints:
            raise ValueError(
                f"field has {self.values.size} samples, grid has {self.grid.npoints} points"
            )
        self.values = self.values.reshape(self.grid.shape)

    def integral(self) -> complex | float:
        return self.grid.weight * self.values.sum()

    def l1_norm(self) -> float:
        return float(self.grid.weight * np.abs(self.values).sum())


@dataclass
class KernelOperator:
    """Dense one-particle integral kernel A(x, y) sampled at grid points.

    entries[i, j] = A(x_i, x_j) over flattened grid indices (C order).
    """

    entries: np.ndarray
    grid: Grid
    hermitian: bool = False

    def __post_init__(self):
        n = self.grid.npoints
        self.entries = np.asarray(self.entries, dtype=complex).reshape(n, n)
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("kernel entries must be finite")
        if self.hermitian:
            defect = np.max(np.abs(self.entries - self.entries.conj().T))
            scale = max(np.max(np.abs(self.entries)), 1e-300)
            if defect > 1e-10 * scale:
                raise ValueError(
                    f"hermitian flag asserted but defect {defect:.3e} exceeds 1e-10*max|A|"
                )

    @property
    def matrix(self) -> np.ndarray:
        """Operator matrix on l2 sample vectors: h^d * entries."""
        return self.grid.weight * self.entries

    def trace(self) -> complex:
        return self.grid.weight * np.trace(self.entries)

    def hs_norm(self) -> float:
        return float(self.grid.weight * np.linalg.norm(self.entries))

    def apply(self, f: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(f).ravel()


def build_grid(d: int, M: int, L: float, *, require_pow2: bool = True) -> Grid:
    """Construct a periodic grid.

    M must be a power of two unless require_pow2=False (the exact-oracle
    lattice path uses arbitrary even/odd M; mixed-radix FFTs handle it).
    """
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if M < 4:
        raise ValueError("M must be >= 4")
    if require_pow2 and (M & (M - 1)) != 0:
        raise ValueError("M must be a power of two")
    if not L > 0:
        raise ValueError("L must be positive")
    return Grid(d=d, M=M, L=float(L))


def convolve_periodic(f: SpatialField, g: SpatialField) -> SpatialField:
    """Periodic convolution (f*g)(x) = h^d sum_y f(x-y) g(y), computed spectrally."""
    if f.grid != g.grid:
        raise ValueError("grid mismatch")
    grid = f.grid
    fa, ga = f.values, g.values
    if not (np.all(np.isfinite(fa)) and np.all(np.isfinite(ga))):
        raise ValueError("fields must be finite")
    out = np.fft.ifftn(np.fft.fftn(fa) * np.fft.fftn(ga)) * grid.weight
    if np.isrealobj(fa) and np.isrealobj(ga):
        out = out.real
    return SpatialField(out, grid)


def convolve_values(f: np.ndarray, g_hat: np.ndarray, grid: Grid) -> np.ndarray:
    """Convolution against a precomputed forward transform g_hat = fftn(g)."""
    return np.fft.ifftn(np.fft.fftn(f.reshape(grid.shape)) * g_hat) * grid.weight
