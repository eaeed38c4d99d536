"""Exact many-body Schrodinger evolution on small 1D lattices.

States live in the N-particle occupation-number basis (bitmasks over M
sites).  The one-body kinetic matrix is the spectral symbol eps^2 p^2
conjugated to the position basis -- the identical discretization used by the
mean-field modules, so convergence measurements compare the same operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from numba import njit

from .grids import Grid, KernelOperator, ScaleParams
from .initial import OrbitalSet, dense_one_body
from .potentials import PotentialSpec

__all__ = [
    "FockBasis",
    "FockState",
    "LatticeHamiltonian",
    "FluctuationReport",
    "build_fock_basis",
    "build_hamiltonian",
    "slater_to_fock",
    "krylov_propagate",
    "one_particle_density",
    "fluctuation_number",
    "StudyConfig",
    "convergence_study",
]

BASIS_GUARD = 200_000


@dataclass(frozen=True)
class FockBasis:
    """N-particle occupation masks over M sites, in increasing mask order."""

    M: int
    N: int
    masks: np.ndarray  # int64, sorted ascending
    sites: np.ndarray = field(repr=False)  # (dim, N) occupied positions per mask

    @property
    def dim(self) -> int:
        return self.masks.size

    def index(self, mask: int) -> int:
        i = int(np.searchsorted(self.masks, mask))
        if i >= self.dim or self.masks[i] != mask:
            raise KeyError(f"mask {mask:#x} not in basis")
        return i


@dataclass
class FockState:
    amplitudes: np.ndarray
    basis: FockBasis

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if self.amplitudes.size != self.basis.dim:
            raise ValueError("amplitude count does not match basis")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def validate(self, tol: float = 1e-10) -> None:
        if abs(self.norm() - 1.0) > tol:
            raise ValueError(f"state norm {self.norm():.12f} deviates from 1")


def build_fock_basis(M: int, N: int) -> FockBasis:
    if not (1 <= N <= M <= 24):
        raise ValueError("need 1 <= N <= M <= 24")
    dim = math.comb(M, N)
    if dim > BASIS_GUARD:
        raise ValueError(f"basis size {dim} exceeds guard {BASIS_GUARD}")
    masks = np.empty(dim, dtype=np.int64)
    sites = np.empty((dim, N), dtype=np.int64)
    for i, occ in enumerate(combinations(range(M), N)):
        masks[i] = sum(1 << p for p in occ)
        sites[i] = occ
    order = np.argsort(masks)
    return FockBasis(M=M, N=N, masks=masks[order], sites=sites[order])


@njit(cache=True, inline="always")
def _popcount(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


@njit(cache=True, inline="always")
def _find(masks, m):
    lo, hi = 0, masks.size
    while lo < hi:
        mid = (lo + hi) >> 1
        if masks[mid] < m:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True)
def _build_diag(masks, tdiag, vtab, M, inv_n):
    out = np.zeros(masks.size)
    for i in range(masks.size):
        m = masks[i]
        e = 0.0
        for r in range(M):
            if not (m >> r) & 1:
                continue
            e += tdiag[r]
            for s in range(r + 1, M):
                if (m >> s) & 1:
                    e += inv_n * vtab[(r - s) % M]
        out[i] = e
    return out


@njit(cache=True)
def _matvec(masks, amp, T, diag, M, out):
    for i in range(masks.size):
        a = amp[i]
        out[i] += diag[i] * a
        if a == 0:
            continue
        m = masks[i]
        for s in range(M):
            if not (m >> s) & 1:
                continue
            m1 = m & ~(np.int64(1) << s)
            par_s = _popcount(m & ((np.int64(1) << s) - 1)) & 1
            for r in range(M):
                if r == s or (m1 >> r) & 1:
                    continue
                m2 = m1 | (np.int64(1) << r)
                par = par_s ^ (_popcount(m1 & ((np.int64(1) << r) - 1)) & 1)
                j = _find(masks, m2)
                if par:
                    out[j] -= T[r, s] * a
                else:
                    out[j] += T[r, s] * a


@njit(cache=True)
def _one_pdm(masks, amp, M):
    gam = np.zeros((M, M), dtype=np.complex128)
    for i in range(masks.size):
        a = amp[i]
        if a == 0:
            continue
        m = masks[i]
        for r in range(M):
            if not (m >> r) & 1:
                continue
            gam[r, r] += (a.conjugate() * a).real
            m1 = m & ~(np.int64(1) << r)
            par_r = _popcount(m & ((np.int64(1) << r) - 1)) & 1
            for s in range(M):
                if s == r or (m1 >> s) & 1:
                    continue
                m2 = m1 | (np.int64(1) << s)
                par = par_r ^ (_popcount(m1 & ((np.int64(1) << s) - 1)) & 1)
                j = _find(masks, m2)
                val = amp[j].conjugate() * a
                if par:
                    gam[r, s] -= val
                else:
                    gam[r, s] += val
    return gam


@dataclass
class LatticeHamiltonian:
    """H = sum_rs T_rs a_r^+ a_s + (1/2N) sum_{r != s} V(x_r - x_s) n_r n_s.

    T is the l2 matrix of -eps^2 Lap; per-mask diagonals (kinetic diagonal plus
    interaction) are precomputed at build time.  Number-conserving by
    construction; matvec runs over the occupation basis.
    """

    basis: FockBasis
    grid: Grid
    scale: ScaleParams
    T: np.ndarray
    vtab: np.ndarray
    diag: np.ndarray
    T_off: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.T_off = np.ascontiguousarray(self.T, dtype=complex).copy()
        np.fill_diagonal(self.T_off, 0.0)

    def matvec(self, amp: np.ndarray) -> np.ndarray:
        amp = np.ascontiguousarray(amp, dtype=complex)
        out = np.zeros_like(amp)
        _matvec(self.basis.masks, amp, self.T_off, self.diag, self.basis.M, out)
        return out

    def expectation(self, state: FockState) -> float:
        return float(np.real(np.vdot(state.amplitudes, self.matvec(state.amplitudes))))

    def dense_matrix(self) -> np.ndarray:
        if self.basis.dim > 4096:
            raise ValueError("basis too large for a dense Hamiltonian")
        out = np.empty((self.basis.dim, self.basis.dim), dtype=complex)
        e = np.zeros(self.basis.dim, dtype=complex)
        for i in range(self.basis.dim):
            e[:] = 0.0
            e[i] = 1.0
            out[:, i] = self.matvec(e)
        return out


def build_hamiltonian(
    grid1d: Grid, V: PotentialSpec, scale: ScaleParams, basis: FockBasis
) -> LatticeHamiltonian:
    if grid1d.d != 1:
        raise ValueError("the exact oracle is 1D only")
    if grid1d.M != basis.M:
        raise ValueError("grid site count does not match basis")
    if scale.N != basis.N:
        raise ValueError("scale particle count does not match basis")
    T = dense_one_body(grid1d, scale)
    vtab = V.sample(grid1d).ravel()
    diag = _build_diag(
        basis.masks, np.real(np.diag(T)).copy(), vtab, basis.M, 1.0 / scale.N
    )
    return LatticeHamiltonian(basis=basis, grid=grid1d, scale=scale, T=T, vtab=vtab, diag=diag)


def slater_to_fock(state: OrbitalSet, basis: FockBasis | None = None) -> FockState:
    """Amplitudes <mask|a*(f_1)...a*(f_N)|0> = det of the frame rows on the
    occupied sites (h^{1/2} quadrature normalization per orbital)."""
    if state.grid.d != 1:
        raise ValueError("Slater embedding is 1D only")
    if basis is None:
        basis = build_fock_basis(state.grid.M, state.N)
    if basis.M != state.grid.M or basis.N != state.N:
        raise ValueError("basis does not match orbital set")
    if state.orthonormality_defect() > 1e-8:
        raise ValueError("orbitals are not orthonormal")
    frame = state.frame()  # l2-orthonormal columns
    sub = frame[basis.sites]  # (dim, N, N): rows sites ascending, cols orbitals
    amps = np.linalg.det(sub)
    out = FockState(amps, basis)
    if abs(out.norm() - 1.0) > 1e-8:
        raise ValueError(f"Slater embedding norm {out.norm():.2e} deviates from 1")
    return out


def krylov_propagate(
    H: LatticeHamiltonian,
    psi: FockState,
    dt: float,
    scale: ScaleParams | None = None,
    krylov_dim: int = 30,
    tol: float = 1e-12,
) -> FockState:
    """exp(-i dt H / eps) psi via a Lanczos subspace with residual control.

    Oversized steps are split recursively; a breakdown restarts once with a
    jittered vector before failing.
    """
    eps = (scale or H.scale).epsilon
    if not dt > 0:
        raise ValueError("dt must be positive")
    amp = _lanczos_exp(H, psi.amplitudes, dt / eps, krylov_dim, tol)
    return FockState(amp, psi.basis)


def _lanczos_exp(H, v, tau, kdim, tol, depth=0, jittered=False):
    n = v.size
    k = min(kdim, n)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return v.copy()
    Vs = np.zeros((k, n), dtype=complex)
    Vs[0] = v / nrm
    alpha = np.zeros(k)
    beta = np.zeros(k)
    actual = k
    resid_beta = 0.0
    for j in range(k):
        w = H.matvec(Vs[j])
        if not np.all(np.isfinite(w)):
            if jittered:
                raise RuntimeError("Lanczos breakdown persisted after jitter restart")
            rng = np.random.default_rng(0)
            vj = v + 1e-13 * nrm * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
            return _lanczos_exp(H, vj, tau, kdim, tol, depth, jittered=True)
        alpha[j] = np.real(np.vdot(Vs[j], w))
        w = w - alpha[j] * Vs[j]
        if j > 0:
            w = w - beta[j] * Vs[j - 1]
        b = np.linalg.norm(w)
        if j + 1 < k:
            beta[j + 1] = b
            if b < 1e-14 * max(1.0, abs(alpha[j])):
                actual = j + 1
                resid_beta = 0.0
                break
            Vs[j + 1] = w / b
        else:
            resid_beta = b
    d = alpha[:actual]
    e = beta[1:actual]
    evals, evecs = np.linalg.eigh(np.diag(d) + np.diag(e, 1) + np.diag(e, -1))
    y = evecs @ (np.exp(-1j * tau * evals) * evecs[0])
    resid = resid_beta * abs(y[-1]) * abs(tau)
    if resid > tol and depth < 12:
        half = _lanczos_exp(H, v, tau / 2.0, kdim, tol, depth + 1)
        return _lanczos_exp(H, half, tau / 2.0, kdim, tol, depth + 1)
    return (Vs[:actual].T @ y) * nrm


def one_particle_density(psi: FockState, grid: Grid | None = None) -> KernelOperator:
    """gamma(x_r, x_s) = <a_s^+ a_r> / h, the kernel normalized to trace N."""
    psi.validate(1e-8)
    basis = psi.basis
    gam_l2 = _one_pdm(basis.masks, psi.amplitudes, basis.M)
    gam_l2 = 0.5 * (gam_l2 + gam_l2.conj().T)
    if grid is None:
        grid = Grid(d=1, M=basis.M, L=2.0 * np.pi)
    return KernelOperator(gam_l2 / grid.weight, grid, hermitian=True)


@dataclass
class FluctuationReport:
    """2 tr gamma (1-omega) plus the slack of ||gamma-omega||_HS^2 <= 2 tr gamma(1-omega)."""

    number: float
    hs_slack: float


def fluctuation_number(gamma: KernelOperator, omega: KernelOperator) -> FluctuationReport:
    if gamma.grid != omega.grid:
        raise ValueError("grid mismatch")
    P = omega.matrix
    defect = np.linalg.norm(P @ P - P)
    if defect > 1e-7 * max(1.0, math.sqrt(abs(np.trace(P).real))):
        raise ValueError(f"omega is not a projection (defect {defect:.3e})")
    G = gamma.matrix
    number = 2.0 * float(np.trace(G).real - np.trace(G @ P).real)
    hs2 = float(np.linalg.norm(G - P) ** 2)
    return FluctuationReport(number=number, hs_slack=number - hs2)


# ---------------------------------------------------------------------------
# Convergence study: exact oracle vs mean-field dynamics
# ---------------------------------------------------------------------------


@dataclass
class StudyConfig:
    """Sweep definition for the mean-field vs exact comparison.

    For each N, the initial Slater is the non-interacting ground state of the
    trap; at t=0 the trap switches off and both the Hartree-Fock flow and the
    exact N-body flow run under the pair interaction alone.
    """

    M: int = 12
    N_list: tuple[int, ...] = (2, 3)
    times: tuple[float, ...] = (0.0, 0.25, 0.5)
    dt_mf: float = 1e-3
    L: float = 2.0 * np.pi
    potential: PotentialSpec = field(default_factory=lambda: PotentialSpec("zero"))
    trap_depth: float = 1.0
    exchange_on: bool = True
    lanczos_dim: int = 30

    def cells(self) -> list[int]:
        return list(self.N_list)


RESULT_COLUMNS = [
    "d",
    "M",
    "N",
    "epsilon",
    "t",
    "dt",
    "hs_dist",
    "trace_dist",
    "fluct_number",
    "comm_x_ratio",
    "energy_mf",
    "energy_exact",
    "cell_status",
]


def _study_cell(config: StudyConfig, N: int) -> list[dict]:
    from .dynamics import EvolveConfig, evolve, mean_field_energy
    from .initial import scf_ground_state
    from .potentials import cos_well
    from .semiclassics import commutator_trace_norm, density_kernel, hs_distance, trace_distance

    grid = Grid(d=1, M=config.M, L=config.L)
    scale = ScaleParams(N=N, d=1)
    v_ext = cos_well(grid, config.trap_depth)
    initial = scf_ground_state(v_ext, PotentialSpec("zero"), scale).orbitals

    times = sorted(set(float(t) for t in config.times))
    t_final = max(times)
    if t_final == 0.0:
        traj_snaps = [(0.0, initial)]
    else:
        cfg = EvolveConfig(
            t_final=t_final,
            dt=config.dt_mf,
            exchange_on=config.exchange_on,
            snapshot_times=times,
            record_commutators=False,
        )
        traj = evolve(initial, config.potential, cfg)
        traj_snaps = traj.snapshots

    basis = build_fock_basis(config.M, N)
    H = build_hamiltonian(grid, config.potential, scale, basis)
    psi = slater_to_fock(initial, basis)

    rows = []
    t_prev = 0.0
    for (t, state_mf) in traj_snaps:
        if t > t_prev:
            psi = krylov_propagate(H, psi, t - t_prev, krylov_dim=config.lanczos_dim)
            t_prev = t
        gamma = one_particle_density(psi, grid)
        omega = density_kernel(state_mf)
        fluct = fluctuation_number(gamma, omega)
        n_eps = N * scale.epsilon
        rows.append(
            {
                "d": 1,
                "M": config.M,
                "N": N,
                "epsilon": scale.epsilon,
                "t": t,
                "dt": config.dt_mf,
                "hs_dist": hs_distance(gamma, omega),
                "trace_dist": trace_distance(gamma, omega),
                "fluct_number": fluct.number,
                "comm_x_ratio": commutator_trace_norm(state_mf, ("position", 0)) / n_eps,
                "energy_mf": mean_field_energy(state_mf, config.potential, None, config.exchange_on),
                "energy_exact": H.expectation(psi),
                "cell_status": "ok",
            }
        )
    return rows


def convergence_study(config: StudyConfig) -> list[dict]:
    """Run every (N, t) comparison cell; failures are recorded per cell and the
    sweep continues."""
    rows: list[dict] = []
    for N in config.cells():
        try:
            rows.extend(_study_cell(config, N))
        except Exception as exc:  # cell failure must not kill the sweep
            rows.append(
                {
                    "d": 1,
                    "M": config.M,
                    "N": N,
                    "epsilon": ScaleParams(N=N, d=1).epsilon,
                    "t": float("nan"),
                    "dt": config.dt_mf,
                    "hs_dist": float("nan"),
                    "trace_dist": float("nan"),
                    "fluct_number": float("nan"),
                    "comm_x_ratio": float("nan"),
                    "energy_mf": float("nan"),
                    "energy_exact": float("nan"),
                    "cell_status": f"failed: {exc}",
                }
            )
    return rows
