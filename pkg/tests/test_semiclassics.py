import warnings

import numpy as np
import pytest

from fml.grids import ScaleParams, SpatialField, build_grid
from fml.initial import free_fermi_sea, random_orbital_set, scf_ground_state
from fml.potentials import PotentialSpec, cos_well
from fml.semiclassics import (
    PhaseSpaceDensity,
    VelocityGrid,
    commutator_report,
    commutator_trace_norm,
    density_kernel,
    evolve_vlasov,
    fourier_commutator_check,
    hs_distance,
    phase_space_l1_distance,
    trace_distance,
    wigner_transform,
)


@pytest.fixture
def grid16():
    return build_grid(1, 16, 2 * np.pi)


def test_density_kernel_trace_and_hs(grid16):
    s = ScaleParams(N=5, d=1)
    st = random_orbital_set(grid16, s, np.random.default_rng(0))
    k = density_kernel(st)
    assert k.trace().real == pytest.approx(5.0, abs=1e-10)
    assert k.hs_norm() == pytest.approx(np.sqrt(5.0), abs=1e-8)


def test_density_kernel_constant_mode(grid16):
    s = ScaleParams(N=1, d=1)
    sea = free_fermi_sea(grid16, s)
    k = density_kernel(sea)
    assert np.max(np.abs(k.entries - 1 / grid16.L)) < 1e-12


def test_commutator_fourier_zero_momentum(grid16):
    sea = free_fermi_sea(grid16, ScaleParams(N=3, d=1))
    assert commutator_trace_norm(sea, ("fourier", 0.0)) < 1e-12


def test_commutator_gradient_free_sea(grid16):
    s = ScaleParams(N=5, d=1)
    sea = free_fermi_sea(grid16, s)
    assert commutator_trace_norm(sea, ("gradient", 0)) <= 1e-10 * s.N * s.epsilon


@pytest.mark.parametrize("kind", [("position", 0), ("gradient", 0), ("fourier", 3.0)])
def test_commutator_lowrank_matches_dense(grid16, kind):
    s = ScaleParams(N=3, d=1)
    st = random_orbital_set(grid16, s, np.random.default_rng(1))
    lr = commutator_trace_norm(st, kind, "lowrank")
    dn = commutator_trace_norm(st, kind, "dense")
    assert lr == pytest.approx(dn, rel=1e-10)


def test_position_commutator_is_sine_displacement_kernel(grid16):
    # the periodic position generator gives singular values equal to those of
    # the kernel (L/pi) sin(pi (x-y)/L) omega(x,y)
    s = ScaleParams(N=3, d=1)
    st = random_orbital_set(grid16, s, np.random.default_rng(2))
    k = density_kernel(st).entries
    x = grid16.axis_points()
    disp = (grid16.L / np.pi) * np.sin(np.pi * (x[:, None] - x[None, :]) / grid16.L)
    ref = np.sum(np.linalg.svd(grid16.weight * disp * k, compute_uv=False))
    assert commutator_trace_norm(st, ("position", 0)) == pytest.approx(ref, rel=1e-10)


def test_commutator_report_components_d2():
    g = build_grid(2, 8, 2 * np.pi)
    s = ScaleParams(N=5, d=2)
    sea = free_fermi_sea(g, s)
    rep = commutator_report(sea)
    assert len(rep.position) == 2
    assert rep.position_sum == pytest.approx(sum(rep.position))
    assert all(v <= 1e-10 for v in rep.gradient)


def test_fourier_commutator_check_free_sea():
    g = build_grid(1, 64, 2 * np.pi)
    sea = free_fermi_sea(g, ScaleParams(N=17, d=1))
    ps = [0.0] + [float(p) for p in range(1, 9)]
    rep = fourier_commutator_check(sea, ps)
    assert rep.rows[0][1] < 1e-12 and rep.rows[0][3] < 1e-12
    assert rep.max_ratio <= 2 * np.pi


def test_fourier_commutator_even_in_p():
    g = build_grid(1, 32, 2 * np.pi)
    s = ScaleParams(N=5, d=1)
    vext = cos_well(g, 2.0)
    st = scf_ground_state(vext, PotentialSpec("zero"), s).orbitals
    a = commutator_trace_norm(st, ("fourier", 3.0))
    b = commutator_trace_norm(st, ("fourier", -3.0))
    assert a == pytest.approx(b, rel=1e-10)


def test_hs_and_trace_distance_trivial(grid16):
    s = ScaleParams(N=3, d=1)
    st = random_orbital_set(grid16, s, np.random.default_rng(3))
    k = density_kernel(st)
    assert hs_distance(k, k) == 0.0
    assert trace_distance(k, k) == 0.0


def test_norm_ordering_random_pairs(grid16):
    rng = np.random.default_rng(4)
    for _ in range(5):
        a = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        b = rng.standard_normal((16, 16)) + 1j * rng.standard_normal((16, 16))
        from fml.grids import KernelOperator

        A = KernelOperator(0.5 * (a + a.conj().T), grid16, hermitian=True)
        B = KernelOperator(0.5 * (b + b.conj().T), grid16, hermitian=True)
        assert hs_distance(A, B) <= trace_distance(A, B) + 1e-12


def test_rank_one_difference(grid16):
    from fml.grids import KernelOperator

    rng = np.random.default_rng(5)
    u = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    u /= np.sqrt(grid16.weight) * np.linalg.norm(u)  # h-weighted unit norm
    alpha = 0.37
    A = KernelOperator(np.zeros((16, 16)), grid16)
    B = KernelOperator(alpha * np.outer(u, u.conj()), grid16)
    assert hs_distance(A, B) == pytest.approx(alpha, rel=1e-10)
    assert trace_distance(A, B) == pytest.approx(alpha, rel=1e-10)


def test_wigner_mass_and_marginal():
    g = build_grid(1, 64, 2 * np.pi)
    s = ScaleParams(N=9, d=1)
    sea = free_fermi_sea(g, s)
    W = wigner_transform(sea)
    assert abs(W.mass - 1.0) < 1e-8
    assert np.max(np.abs(W.x_marginal().values - sea.density().values)) < 1e-8


def test_wigner_free_sea_indicator_convergence():
    g = build_grid(1, 256, 2 * np.pi)
    dists = []
    for n in (8, 16, 32, 64):
        s = ScaleParams(N=n, d=1)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            sea = free_fermi_sea(g, s)
        W = wigner_transform(sea)
        vv = W.v_grid.axis_values()
        p_f = np.pi / g.L  # continuum Fermi momentum of the uniform density
        ind = np.where(np.abs(vv)[None, :] <= p_f, 1 / (2 * np.pi), 0.0) * np.ones((g.M, 1))
        dists.append(
            phase_space_l1_distance(W, PhaseSpaceDensity(ind, g, W.v_grid))
        )
    assert dists == sorted(dists, reverse=True)
    assert dists[-1] < dists[0]


def test_wigner_real_and_trapped_state():
    g = build_grid(1, 64, 2 * np.pi)
    s = ScaleParams(N=7, d=1)
    st = scf_ground_state(cos_well(g, 2.0), PotentialSpec("zero"), s).orbitals
    W = wigner_transform(st)
    assert abs(W.mass - 1.0) < 1e-8
    assert np.max(np.abs(W.x_marginal().values - st.density().values)) < 1e-8


def test_wigner_rejects_oversized_window():
    g = build_grid(1, 32, 2 * np.pi)
    sea = free_fermi_sea(g, ScaleParams(N=3, d=1))
    with pytest.raises(ValueError, match="representable"):
        wigner_transform(sea, v_grid=VelocityGrid(d=1, M_v=64, dv=2 * 3 ** (-1) * np.pi / g.L))


def _gaussian_blob(g, vg, x0=np.pi, sx=0.5, sv=0.3):
    x = g.axis_points()
    v = vg.axis_values()
    xs = np.mod(x - x0 + np.pi, 2 * np.pi) - np.pi
    vals = np.exp(-(xs[:, None] ** 2) / (2 * sx**2)) * np.exp(-(v[None, :] ** 2) / (2 * sv**2))
    vals /= g.weight * vg.weight * vals.sum()
    return PhaseSpaceDensity(vals, g, vg)


def test_vlasov_free_streaming_matches_characteristics():
    g = build_grid(1, 256, 2 * np.pi)
    vg = VelocityGrid(d=1, M_v=128, dv=0.025)
    W0 = _gaussian_blob(g, vg)
    traj = evolve_vlasov(W0, PotentialSpec("zero"), t_final=0.5, dt=0.01)
    x = g.axis_points()
    v = vg.axis_values()
    xs = np.mod(x[:, None] - 2 * v[None, :] * 0.5 - np.pi + np.pi, 2 * np.pi) - np.pi
    exact = np.exp(-(xs**2) / (2 * 0.5**2)) * np.exp(-(v[None, :] ** 2) / (2 * 0.3**2))
    exact /= g.weight * vg.weight * exact.sum()
    err = phase_space_l1_distance(traj.final(), PhaseSpaceDensity(exact, g, vg))
    assert err <= 1e-4


def test_vlasov_two_resolution_order():
    errs = []
    for m, dv in ((64, 0.05), (128, 0.025)):
        g = build_grid(1, m, 2 * np.pi)
        vg = VelocityGrid(d=1, M_v=m, dv=dv)
        W0 = _gaussian_blob(g, vg)
        traj = evolve_vlasov(W0, PotentialSpec("zero"), t_final=0.5, dt=0.01)
        x, v = g.axis_points(), vg.axis_values()
        xs = np.mod(x[:, None] - v[None, :] - np.pi + np.pi, 2 * np.pi) - np.pi
        exact = np.exp(-(xs**2) / (2 * 0.5**2)) * np.exp(-(v[None, :] ** 2) / (2 * 0.3**2))
        exact /= g.weight * vg.weight * exact.sum()
        errs.append(phase_space_l1_distance(traj.final(), PhaseSpaceDensity(exact, g, vg)))
    assert errs[0] / errs[1] >= 3.0


def test_vlasov_mass_conserved_interacting():
    g = build_grid(1, 64, 2 * np.pi)
    vg = VelocityGrid(d=1, M_v=96, dv=0.05)
    W0 = _gaussian_blob(g, vg)
    V = PotentialSpec("gaussian", amplitude=0.5, width=0.5)
    traj = evolve_vlasov(W0, V, t_final=0.3, dt=5e-3)
    drifts = [abs(m - traj.mass_history[0][1]) for _, m in traj.mass_history]
    assert max(drifts) < 1e-8


def test_vlasov_cfl_guard():
    g = build_grid(1, 32, 2 * np.pi)
    vg = VelocityGrid(d=1, M_v=32, dv=0.5)
    W0 = _gaussian_blob(g, vg, sv=1.5)
    with pytest.raises(ValueError, match="CFL"):
        evolve_vlasov(W0, PotentialSpec("zero"), t_final=1.0, dt=0.5)


def test_l1_distance_properties():
    g = build_grid(1, 16, 2 * np.pi)
    vg = VelocityGrid(d=1, M_v=16, dv=0.1)
    rng = np.random.default_rng(6)
    mk = lambda: PhaseSpaceDensity(rng.random((16, 16)), g, vg)
    a, b, c = mk(), mk(), mk()
    assert phase_space_l1_distance(a, a) == 0.0
    assert phase_space_l1_distance(a, b) <= (
        phase_space_l1_distance(a, c) + phase_space_l1_distance(c, b) + 1e-12
    )
    scaled = PhaseSpaceDensity(2.5 * a.values, g, vg)
    zero = PhaseSpaceDensity(np.zeros_like(a.values), g, vg)
    assert phase_space_l1_distance(scaled, zero) == pytest.approx(
        2.5 * phase_space_l1_distance(a, zero), rel=1e-12
    )


def test_l1_distance_grid_mismatch():
    g = build_grid(1, 16, 2 * np.pi)
    vg1 = VelocityGrid(d=1, M_v=16, dv=0.1)
    vg2 = VelocityGrid(d=1, M_v=16, dv=0.2)
    a = PhaseSpaceDensity(np.zeros((16, 16)), g, vg1)
    b = PhaseSpaceDensity(np.zeros((16, 16)), g, vg2)
    with pytest.raises(ValueError, match="mismatch"):
        phase_space_l1_distance(a, b)


def test_free_sea_band_d2_closed_shells():
    g = build_grid(2, 16, 2 * np.pi)
    ratios = []
    for n in (5, 13, 25):
        s = ScaleParams(N=n, d=2)
        sea = free_fermi_sea(g, s)
        ratios.append(
            max(commutator_trace_norm(sea, ("position", a)) for a in (0, 1))
            / (n * s.epsilon)
        )
    assert max(ratios) <= 2.0 * min(ratios)


def test_wigner_momentum_marginal_closed_shell():
    # x-integrated Wigner mass per velocity cell equals eps per occupied mode
    g = build_grid(1, 64, 2 * np.pi)
    s = ScaleParams(N=9, d=1)
    sea = free_fermi_sea(g, s)
    W = wigner_transform(sea)
    per_cell = W.values.sum(axis=0) * g.weight * W.v_grid.dv
    vv = W.v_grid.axis_values()
    occupied = np.abs(vv) <= s.epsilon * 4 + 1e-12
    assert np.max(np.abs(per_cell[occupied] - s.epsilon)) < 1e-8
    assert np.max(np.abs(per_cell[~occupied])) < 1e-12


def test_coarse_grain_preserves_mass_and_marginal_scale():
    from fml.semiclassics import coarse_grain

    g = build_grid(1, 64, 2 * np.pi)
    s = ScaleParams(N=9, d=1)
    W = wigner_transform(free_fermi_sea(g, s))
    Wc = coarse_grain(W, 0.3, 0.05)
    assert Wc.mass == pytest.approx(W.mass, abs=1e-8)
