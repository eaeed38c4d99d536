"""Interaction potentials on the torus and the Fourier-moment diagnostic."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .grids import Grid, SpatialField

__all__ = ["PotentialSpec", "assv_weighted_norm", "cos_well"]


@dataclass(frozen=True)
class PotentialSpec:
    """Pair interaction V.

    kinds:
      zero       -- no interaction
      gaussian   -- V(x) = g exp(-|x|^2 / (2 sigma^2)), periodized by image sums
      tabulated  -- samples on a specific grid, given as displacement values
    """

    kind: str = "zero"
    amplitude: float = 0.0
    width: float = 1.0
    table: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("zero", "gaussian", "tabulated"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "gaussian" and not self.width > 0:
            raise ValueError("gaussian width must be positive")
        if self.kind == "tabulated" and self.table is None:
            raise ValueError("tabulated potential needs a table")

    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "gaussian" and self.amplitude == 0.0)

    def sample(self, grid: Grid) -> np.ndarray:
        """V at displacement points of the grid (periodized), d-dim shape."""
        if self.kind == "zero":
            return np.zeros(grid.shape)
        if self.kind == "tabulated":
            tab = np.asarray(self.table, dtype=float)
            if tab.size != grid.npoints:
                raise ValueError("tabulated potential does not match grid size")
            return tab.reshape(grid.shape)
        # periodized Gaussian: sum images until their contribution vanishes
        x = grid.axis_points()
        n_img = max(1, int(np.ceil(8.0 * self.width / grid.L)) + 1)
        out = np.zeros(grid.shape)
        for shifts in product(range(-n_img, n_img + 1), repeat=grid.d):
            r2 = np.zeros(grid.shape)
            for a, s in enumerate(shifts):
                u = x + s * grid.L
                shape = [1] * grid.d
                shape[a] = grid.M
                r2 = r2 + (u.reshape(shape)) ** 2
            out += np.exp(-r2 / (2.0 * self.width**2))
        return self.amplitude * out

    def sup_norm(self, grid: Grid) -> float:
        return float(np.max(np.abs(self.sample(grid))))

    def fourier_coefficients(self, grid: Grid) -> np.ndarray:
        """V_hat(p) = h^d sum_x V(x) e^{-ip.x} on the FFT-ordered lattice.

        For smooth V this approximates the continuum transform over the box
        to spectral accuracy.
        """
        return np.fft.fftn(self.sample(grid)) * grid.weight


def assv_weighted_norm(V: PotentialSpec, grid: Grid, cutoff: float) -> float:
    """Truncated momentum sum of |V_hat(p)| (1 + |p|^2) over |p| <= cutoff.

    Riemann weight (2*pi/L)^d per lattice point, so the value approximates the
    continuum integral; it is the constant entering the interaction-dependent
    diagnostic bounds.
    """
    if not cutoff > 0:
        raise ValueError("cutoff must be positive")
    if V.is_zero():
        return 0.0
    vhat = V.fourier_coefficients(grid)
    p2 = grid.momentum_squared()
    mask = np.sqrt(p2) <= cutoff
    cell = (2.0 * np.pi / grid.L) ** grid.d
    return float(cell * np.sum(np.abs(vhat[mask]) * (1.0 + p2[mask])))


def cos_well(grid: Grid, depth: float, center: float | None = None) -> SpatialField:
    """Smooth periodic confining well: depth * (1 - cos(2 pi (x-c)/L)) / 2 per axis.

    Minimum 0 at the center, maximum `depth`; supported everywhere but flat
    near the rim, a torus-friendly stand-in for a trap.
    """
    c = grid.L / 2.0 if center is None else center
    out = np.zeros(grid.shape)
    x = grid.axis_points()
    for a in range(grid.d):
        shape = [1] * grid.d
        shape[a] = grid.M
        out = out + (1.0 - np.cos(2.0 * np.pi * (x - c) / grid.L)).reshape(shape)
    return SpatialField(depth * out / (2.0 * grid.d), grid)
