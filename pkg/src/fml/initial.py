"""Semiclassical initial data: Fermi seas, Thomas-Fermi densities, Weyl
quantization, and Hartree-Fock self-consistent ground states."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from itertools import product

import numpy as np
from scipy.optimize import brentq

from .grids import Grid, KernelOperator, ScaleParams, SpatialField, convolve_values
from .potentials import PotentialSpec

__all__ = [
    "OrbitalSet",
    "TFResult",
    "SCFResult",
    "free_fermi_sea",
    "closed_shell_sizes",
    "thomas_fermi_density",
    "tf_energy",
    "fermi_momentum_field",
    "weyl_projection",
    "scf_ground_state",
    "hf_energy",
    "dense_one_body",
    "random_orbital_set",
    "tf_kinetic_coefficient",
    "unit_ball_volume",
]


@dataclass
class OrbitalSet:
    """N orthonormal one-particle orbitals; the low-rank factor of omega.

    Columns are orthonormal under the h^d-weighted inner product, so the
    induced kernel omega(x,y) = sum_j f_j(x) conj f_j(y) is a rank-N
    orthogonal projection with trace exactly N.
    """

    orbitals: np.ndarray  # shape (M^d, N), complex
    grid: Grid
    scale: ScaleParams

    def __post_init__(self):
        self.orbitals = np.ascontiguousarray(self.orbitals, dtype=complex)
        if self.orbitals.ndim != 2 or self.orbitals.shape[0] != self.grid.npoints:
            raise ValueError("orbital array must have shape (grid points, N)")
        if self.orbitals.shape[1] != self.scale.N:
            raise ValueError("orbital count does not match ScaleParams.N")

    @property
    def N(self) -> int:
        return self.scale.N

    def frame(self) -> np.ndarray:
        """l2-orthonormal frame Phi = h^{d/2} * orbitals."""
        return self.orbitals * math.sqrt(self.grid.weight)

    def gram(self) -> np.ndarray:
        return self.grid.weight * (self.orbitals.conj().T @ self.orbitals)

    def orthonormality_defect(self) -> float:
        g = self.gram()
        return float(np.max(np.abs(g - np.eye(self.N))))

    def projection_defect_hs(self) -> float:
        """||omega^2 - omega||_HS computed from the N x N Gram matrix."""
        g = self.gram()
        e = g - np.eye(self.N)
        # omega^2 - omega = Phi (G - I) Phi^*; Frobenius norm via tr((G-I) G (G-I) G)
        val = np.trace(e @ g @ e @ g).real
        return float(math.sqrt(max(val, 0.0)))

    def density(self) -> SpatialField:
        """rho(x) = N^{-1} omega(x,x), normalized so that its integral is 1."""
        rho = np.sum(np.abs(self.orbitals) ** 2, axis=1) / self.N
        return SpatialField(rho, self.grid)

    def validate(self, tol_orth: float = 1e-10, tol_proj: float = 1e-9) -> None:
        d_orth = self.orthonormality_defect()
        if d_orth > tol_orth:
            raise ValueError(f"orthonormality defect {d_orth:.3e} exceeds {tol_orth:.1e}")
        d_proj = self.projection_defect_hs()
        if d_proj > tol_proj * math.sqrt(self.N):
            raise ValueError(f"projection defect {d_proj:.3e} exceeds {tol_proj:.1e}*sqrt(N)")


@dataclass
class TFResult:
    """Thomas-Fermi minimizer: density, chemical potential, and solver record."""

    rho: SpatialField
    mu: float
    iterations: int
    residual: float
    converged: bool = True


@dataclass
class SCFResult:
    """Self-consistent-field output: occupied orbitals plus convergence record."""

    orbitals: OrbitalSet
    converged: bool
    iterations: int
    energy: float
    energy_history: list[float] = field(default_factory=list)
    oscillatory: bool = False
    residual: float = 0.0


def _mode_list(grid: Grid) -> list[tuple]:
    """All integer mode vectors, sorted by (|p|^2, lexicographic indices)."""
    ks = grid.mode_indices()
    modes = list(product(sorted(ks), repeat=grid.d))
    modes.sort(key=lambda k: (sum(c * c for c in k), k))
    return modes


def closed_shell_sizes(grid: Grid, max_n: int | None = None) -> list[int]:
    """Fillings N at which the |p|^2 shell structure closes on this grid."""
    modes = _mode_list(grid)
    cap = len(modes) if max_n is None else min(max_n, len(modes))
    sizes = []
    for n in range(1, cap + 1):
        if n == len(modes) or sum(c * c for c in modes[n]) > sum(c * c for c in modes[n - 1]):
            sizes.append(n)
    return sizes


def _plane_wave(grid: Grid, k: tuple) -> np.ndarray:
    """e^{i p.x} / L^{d/2} over the grid, p = 2 pi k / L."""
    phase = np.zeros(grid.shape)
    x = grid.axis_points()
    for a, ka in enumerate(k):
        shape = [1] * grid.d
        shape[a] = grid.M
        phase = phase + (2.0 * np.pi * ka / grid.L) * x.reshape(shape)
    return np.exp(1j * phase).ravel() / grid.L ** (grid.d / 2.0)


def free_fermi_sea(grid: Grid, scale: ScaleParams) -> OrbitalSet:
    """Fill the N plane-wave modes of smallest |p|^2 (ties broken lexicographically)."""
    if scale.N > grid.npoints:
        raise ValueError(f"cannot fill {scale.N} modes on a grid with {grid.npoints} points")
    if scale.d != grid.d:
        raise ValueError("scale dimension does not match grid")
    modes = _mode_list(grid)
    occupied = modes[: scale.N]
    if scale.N < len(modes):
        e_last = sum(c * c for c in occupied[-1])
        e_next = sum(c * c for c in modes[scale.N])
        if e_last == e_next:
            warnings.warn(
                f"N={scale.N} is not a closed shell (degenerate Fermi surface); "
                "filling is deterministic but anisotropic",
                stacklevel=2,
            )
    cols = np.stack([_plane_wave(grid, k) for k in occupied], axis=1)
    return OrbitalSet(cols, grid, scale)


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def tf_kinetic_coefficient(d: int) -> float:
    """Coefficient of integral rho^{1+2/d} in the Thomas-Fermi energy.

    Derived from the phase-space integral (2 pi eps)^{-d} int_{|p|<=p_F} |p|^2 dp
    with eps^d N = 1 and spinless filling; at d=3 this is (3/5)(6 pi^2)^{2/3}.
    """
    v_d = unit_ball_volume(d)
    return (d / (d + 2.0)) * ((2.0 * np.pi) ** d / v_d) ** (2.0 / d)


def fermi_momentum_field(rho: SpatialField, scale: ScaleParams) -> SpatialField:
    """Local Fermi momentum p_F(x) = ((2 pi)^d rho(x) / v_d)^{1/d}.

    Reduces to (6 pi^2 rho)^{1/3} at d=3 and to pi rho at d=1.
    """
    vals = np.asarray(rho.values, dtype=float)
    if np.min(vals) < -1e-10:
        raise ValueError("density must be nonnegative")
    vals = np.clip(vals, 0.0, None)
    d = scale.d
    pf = ((2.0 * np.pi) ** d * vals / unit_ball_volume(d)) ** (1.0 / d)
    return SpatialField(pf, rho.grid)


def tf_energy(
    rho: SpatialField,
    V_ext: SpatialField | None,
    V: PotentialSpec,
    scale: ScaleParams,
) -> float:
    """Thomas-Fermi energy: kinetic rho^{1+2/d} term + trap + mean-field pair term."""
    grid = rho.grid
    r = np.clip(np.asarray(rho.values, dtype=float), 0.0, None)
    c_kin = tf_kinetic_coefficient(scale.d)
    e = c_kin * grid.weight * np.sum(r ** (1.0 + 2.0 / scale.d))
    if V_ext is not None:
        e += grid.weight * np.sum(V_ext.values * r)
    if not V.is_zero():
        vhat = np.fft.fftn(V.sample(grid))
        vr = convolve_values(r, vhat, grid).real
        e += 0.5 * grid.weight * np.sum(r * vr)
    return float(e)


def thomas_fermi_density(
    V_ext: SpatialField,
    V: PotentialSpec,
    scale: ScaleParams,
    tol: float = 1e-10,
    max_iter: int = 500,
    mixing: float = 0.5,
) -> TFResult:
    """Solve rho = c_d (mu - V_ext - V*rho)_+^{d/2} with mu fixed by int rho = 1.

    Damped fixed point on rho (mixing alpha), with the chemical potential
    re-bracketed by a scalar root find at every sweep.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = V_ext.grid
    vext = np.asarray(V_ext.values, dtype=float)
    if not np.all(np.isfinite(vext)):
        raise ValueError("external potential must be finite on the grid (no mu bracket)")
    d = scale.d
    c_d = (tf_kinetic_coefficient(d) * (1.0 + 2.0 / d)) ** (-d / 2.0)
    vhat = None if V.is_zero() else np.fft.fftn(V.sample(grid))

    def solve_mu(u: np.ndarray) -> tuple[float, np.ndarray]:
        def mass(mu):
            return grid.weight * np.sum(c_d * np.clip(mu - u, 0.0, None) ** (d / 2.0)) - 1.0

        lo = float(np.min(u))
        hi = float(np.max(u)) + (c_d * grid.L**d) ** (-2.0 / d) + 1e-12
        mu = brentq(mass, lo, hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
        return mu, c_d * np.clip(mu - u, 0.0, None) ** (d / 2.0)

    rho = np.full(grid.shape, 1.0 / grid.L**d)
    mu = 0.0
    residual = np.inf
    for it in range(1, max_iter + 1):
        u = vext.copy()
        if vhat is not None:
            u = u + convolve_values(rho, vhat, grid).real
        mu, rho_new = solve_mu(u)
        mixed = (1.0 - mixing) * rho + mixing * rho_new
        # renormalize the mixed iterate; mixing preserves mass to rounding anyway
        mixed /= grid.weight * mixed.sum()
        residual = float(np.max(np.abs(mixed - rho)))
        rho = mixed
        if residual <= tol:
            return TFResult(SpatialField(rho, grid), float(mu), it, residual, True)
    return TFResult(SpatialField(rho, grid), float(mu), max_iter, residual, False)


def _half_grid_density(rho: SpatialField) -> np.ndarray:
    """Spectral upsampling of rho onto the doubled (half-spacing) grid."""
    grid = rho.grid
    vals = np.asarray(rho.values, dtype=float)
    spec = np.fft.fftn(vals)
    M = grid.M
    pad = np.zeros((2 * M,) * grid.d, dtype=complex)
    idx_map = np.fft.fftfreq(M, d=1.0 / M).astype(int)  # mode numbers, fft order
    sel = tuple(np.ix_(*[idx_map % (2 * M)] * grid.d))
    pad[sel] = spec
    up = np.fft.ifftn(pad).real * (2**grid.d)
    return np.clip(up, 0.0, None)


def weyl_projection(
    rho: SpatialField,
    grid: Grid,
    scale: ScaleParams,
) -> tuple[KernelOperator, OrbitalSet]:
    """Weyl quantization of the local Fermi-ball phase-space density, then the
    nearest rank-N projection.

    Kernel: Op(x,y) = L^{-d} sum_q chi(|eps q| <= p_F((x+y)/2)) e^{i q.(x-y)},
    the lattice form of the eps-scaled oscillatory integral.  The lattice Weyl
    kernel is only approximately idempotent, so the returned OrbitalSet holds
    the top-N eigenvectors of the Hermitized kernel.
    """
    if grid.npoints > 4096:
        raise ValueError("weyl_projection builds a dense kernel; grid too large")
    mass = grid.weight * np.sum(rho.values)
    if abs(mass - 1.0) > 1e-6:
        raise ValueError("density must be normalized to 1")
    pf_half = fermi_momentum_field(
        SpatialField(_half_grid_density(rho), Grid(grid.d, 2 * grid.M, grid.L)),
        scale,
    ).values

    n = grid.npoints
    M = grid.M
    # cumulative shell sums C_s(u) = sum_{|q| <= q_s} e^{i q.u} over displacements u
    q2 = grid.momentum_squared().ravel()
    order = np.argsort(q2, kind="stable")
    q2_sorted = q2[order]
    shell_edges = np.flatnonzero(np.diff(q2_sorted)) + 1
    shell_starts = np.concatenate(([0], shell_edges))
    shell_q = np.sqrt(q2_sorted[shell_starts])
    # plane-wave table E[q, u] built per shell: accumulate via FFT of mode masks
    flat_modes = np.unravel_index(order, grid.shape)
    cum = np.zeros((len(shell_starts) + 1, n), dtype=complex)
    mask = np.zeros(grid.shape, dtype=complex)
    bounds = list(shell_starts) + [n]
    for s in range(len(shell_starts)):
        sel = tuple(ax[bounds[s] : bounds[s + 1]] for ax in flat_modes)
        mask[sel] = 1.0
        # sum over modes in shells <= s of e^{i q.u}: inverse DFT of the mask * M^d
        cum[s + 1] = (np.fft.ifftn(mask) * grid.npoints).ravel()

    # midpoint shell index per (x, y) pair from the half-grid Fermi momentum;
    # (x+y)/2 lands on the half-spacing grid, indexed (i+j) mod 2M per axis
    shell_count_half = np.searchsorted(
        shell_q, pf_half.ravel() / scale.epsilon + 1e-12, side="right"
    )
    multi = np.array(np.unravel_index(np.arange(n), grid.shape))
    mid_multi = (multi[:, :, None] + multi[:, None, :]) % (2 * M)
    mid_flat = np.ravel_multi_index(tuple(mid_multi), (2 * M,) * grid.d)
    disp_multi = (multi[:, :, None] - multi[:, None, :]) % M
    disp = np.ravel_multi_index(tuple(disp_multi), grid.shape)

    sidx = shell_count_half[mid_flat]
    entries = cum[sidx, disp] / grid.L**grid.d
    entries = 0.5 * (entries + entries.conj().T)
    kernel = KernelOperator(entries, grid, hermitian=True)

    evals, evecs = np.linalg.eigh(kernel.matrix)
    N = scale.N
    if N < n and evals[-N] - evals[-N - 1] < 1e-10:
        warnings.warn(
            "degenerate occupation boundary in Weyl projection; "
            "tie broken by eigenvalue-then-index order",
            stacklevel=2,
        )
    frame = evecs[:, -N:][:, ::-1]
    orbitals = frame / math.sqrt(grid.weight)
    return kernel, OrbitalSet(orbitals, grid, scale)


def dense_one_body(grid: Grid, scale: ScaleParams, V_ext: SpatialField | None = None) -> np.ndarray:
    """Dense l2 matrix of -eps^2 Lap (+ V_ext), via the spectral symbol eps^2 |p|^2."""
    n = grid.npoints
    sym = scale.epsilon**2 * grid.momentum_squared()
    eye = np.eye(n).reshape(grid.shape + (n,))
    axes = tuple(range(grid.d))
    h = np.fft.ifftn(np.fft.fftn(eye, axes=axes) * sym[..., None], axes=axes)
    h = h.reshape(n, n)
    if V_ext is not None:
        h = h + np.diag(V_ext.values.ravel())
    return 0.5 * (h + h.conj().T)


def hf_energy(
    state: OrbitalSet,
    V_ext: SpatialField | None = None,
    V: PotentialSpec | None = None,
) -> float:
    """Hartree-Fock energy:

    tr (-eps^2 Lap + V_ext) omega
      + (1/2N) int V(x-y) [omega(x,x) omega(y,y) - |omega(x,y)|^2] dx dy,
    with all integrals as h^d-weighted sums and convolutions done spectrally.
    """
    grid, scale = state.grid, state.scale
    F = state.orbitals.reshape(grid.shape + (scale.N,))
    axes = tuple(range(grid.d))
    sym = scale.epsilon**2 * grid.momentum_squared()
    Fhat = np.fft.fftn(F, axes=axes)
    kin = grid.weight * np.sum(np.abs(Fhat) ** 2 * sym[..., None]) / grid.npoints
    e = float(kin)
    dens = np.sum(np.abs(F) ** 2, axis=-1)
    if V_ext is not None:
        e += float(grid.weight * np.sum(V_ext.values * dens))
    if V is not None and not V.is_zero():
        vhat = np.fft.fftn(V.sample(grid))
        direct = grid.weight * np.sum(dens * convolve_values(dens, vhat, grid).real)
        # exchange: pair products g_jk = f_j conj f_k convolved against V
        N = scale.N
        pair = F[..., :, None] * F.conj()[..., None, :]
        pair_flat = pair.reshape(grid.shape + (N * N,))
        conv = np.fft.ifftn(np.fft.fftn(pair_flat, axes=axes) * vhat[..., None], axes=axes)
        conv *= grid.weight
        exch = grid.weight * np.sum(pair_flat.conj() * conv).real
        e += float((direct - exch) / (2.0 * scale.N))
    return e


def scf_ground_state(
    V_ext: SpatialField,
    V: PotentialSpec,
    scale: ScaleParams,
    mixing: float = 0.3,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> SCFResult:
    """Self-consistent minimization of the Hartree-Fock energy over rank-N projections.

    Aufbau occupation of h[omega] = -eps^2 Lap + V_ext + V*rho - X with linear
    density mixing; iteration stops when the L1 density update drops below tol.
    """
    if not 0 < mixing <= 1:
        raise ValueError("mixing must lie in (0, 1]")
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = V_ext.grid
    if grid.npoints > 4096:
        raise ValueError("scf_ground_state diagonalizes dense operators; grid too large")
    n = grid.npoints
    N = scale.N
    h0 = dense_one_body(grid, scale, V_ext)
    vhat = None if V.is_zero() else np.fft.fftn(V.sample(grid))
    vsamp = None if V.is_zero() else V.sample(grid)

    def occupy(h):
        evals, evecs = np.linalg.eigh(h)
        if N < n and evals[N] - evals[N - 1] < 1e-10:
            warnings.warn("degenerate Fermi level; deterministic tie-break", stacklevel=2)
        frame = evecs[:, :N]
        return OrbitalSet(frame / math.sqrt(grid.weight), grid, scale)

    state = occupy(h0)
    rho = state.density().values
    energies: list[float] = []
    best: tuple[float, OrbitalSet] | None = None
    oscillatory = False
    residual = np.inf
    for it in range(1, max_iter + 1):
        h = h0.copy()
        if vhat is not None:
            h += np.diag(convolve_values(rho, vhat, grid).real.ravel())
            # exchange from the latest occupied orbitals
            omega = state.orbitals @ state.orbitals.conj().T
            vdisp = np.empty((n, n))
            if grid.d == 1:
                ia = np.arange(n)
                vdisp = vsamp.ravel()[(ia[:, None] - ia[None, :]) % n]
            else:
                multi = np.array(np.unravel_index(np.arange(n), grid.shape))
                dmulti = (multi[:, :, None] - multi[:, None, :]) % grid.M
                vdisp = vsamp[tuple(dmulti)]
            X = vdisp * omega / N
            h -= grid.weight * X
            h = 0.5 * (h + h.conj().T)
        new_state = occupy(h)
        e = hf_energy(new_state, V_ext, V)
        energies.append(e)
        if best is None or e < best[0]:
            best = (e, new_state)
        if len(energies) > 3 and e > energies[-2] + 1e-12 * max(1.0, abs(e)):
            oscillatory = True
        rho_new = new_state.density().values
        residual = float(grid.weight * np.sum(np.abs(rho_new - rho)))
        state = new_state
        if residual <= tol:
            return SCFResult(new_state, True, it, e, energies, oscillatory, residual)
        rho = (1.0 - mixing) * rho + mixing * rho_new
    e_best, s_best = best
    return SCFResult(s_best, False, max_iter, e_best, energies, oscillatory, residual)


def random_orbital_set(grid: Grid, scale: ScaleParams, rng: np.random.Generator) -> OrbitalSet:
    """Haar-ish random rank-N projection frame, for cross-check sweeps."""
    z = rng.standard_normal((grid.npoints, scale.N)) + 1j * rng.standard_normal(
        (grid.npoints, scale.N)
    )
    q, _ = np.linalg.qr(z)
    return OrbitalSet(q / math.sqrt(grid.weight), grid, scale)
