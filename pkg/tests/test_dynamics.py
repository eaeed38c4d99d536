import numpy as np
import pytest

from fml.dynamics import (
    EvolveConfig,
    evolve,
    exchange_commutator_hs,
    hartree_vs_hf_gap,
    mean_field_apply,
    projection_hs_distance,
)
from fml.grids import ScaleParams, build_grid
from fml.initial import (
    OrbitalSet,
    dense_one_body,
    free_fermi_sea,
    random_orbital_set,
    scf_ground_state,
)
from fml.potentials import PotentialSpec, cos_well


@pytest.fixture
def small_state():
    g = build_grid(1, 8, 2 * np.pi)
    s = ScaleParams(N=2, d=1)
    return random_orbital_set(g, s, np.random.default_rng(1))


GAUSS = PotentialSpec("gaussian", amplitude=0.7, width=0.6)


def test_apply_plane_wave_eigenmode():
    g = build_grid(1, 16, 2 * np.pi)
    s = ScaleParams(N=3, d=1)
    sea = free_fermi_sea(g, s)
    x = g.axis_points()
    f = np.exp(2j * x) / np.sqrt(g.L)
    out = mean_field_apply(sea, f, PotentialSpec("zero"))
    assert np.max(np.abs(out - s.epsilon**2 * 4 * f)) < 1e-12


def test_apply_n1_self_interaction_cancels():
    g = build_grid(1, 16, 2 * np.pi)
    s = ScaleParams(N=1, d=1)
    st = random_orbital_set(g, s, np.random.default_rng(2))
    f = st.orbitals[:, 0]
    got = mean_field_apply(st, f, GAUSS, exchange_on=True)
    kin = np.fft.ifft(s.epsilon**2 * g.momentum_squared() * np.fft.fft(f))
    assert np.max(np.abs(got - kin)) < 1e-12


def test_apply_matches_dense_assembly(small_state):
    st = small_state
    g, s = st.grid, st.scale
    rng = np.random.default_rng(3)
    f = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    h = dense_one_body(g, s)
    rho = st.density().values
    vs = GAUSS.sample(g)
    h = h + np.diag(np.fft.ifft(np.fft.fft(rho) * np.fft.fft(vs)).real * g.weight)
    omega = st.orbitals @ st.orbitals.conj().T
    ia = np.arange(8)
    h = h - vs[(ia[:, None] - ia[None, :]) % 8] * omega * g.weight / s.N
    w = np.sqrt(g.weight)
    ref = (h @ (f * w)) / w
    got = mean_field_apply(st, f, GAUSS, exchange_on=True)
    assert np.max(np.abs(got - ref)) < 1e-12


def test_evolve_free_translation_invariant():
    g = build_grid(1, 16, 2 * np.pi)
    sea = free_fermi_sea(g, ScaleParams(N=3, d=1))
    traj = evolve(sea, PotentialSpec("zero"), EvolveConfig(t_final=0.3, dt=0.01))
    assert projection_hs_distance(sea, traj.snapshots[-1][1]) < 1e-10


def test_evolve_n1_interaction_is_free():
    # for N=1 the mean field cancels the exchange, so the interacting flow is
    # the free flow; the discrete deviation must vanish at integrator order
    g = build_grid(1, 16, 2 * np.pi)
    s = ScaleParams(N=1, d=1)
    st = random_orbital_set(g, s, np.random.default_rng(4))
    dists = []
    for dt in (0.01, 0.0025):
        cfg = EvolveConfig(t_final=0.2, dt=dt, exchange_on=True, record_commutators=False)
        with_v = evolve(st, GAUSS, cfg).snapshots[-1][1]
        free = evolve(st, PotentialSpec("zero"), cfg).snapshots[-1][1]
        dists.append(projection_hs_distance(with_v, free))
    assert dists[-1] < 1e-5
    assert dists[0] / dists[-1] > 10.0


def test_evolve_second_order_refinement():
    g = build_grid(1, 32, 2 * np.pi)
    s = ScaleParams(N=4, d=1)
    vext = cos_well(g, 2.0)
    init = scf_ground_state(vext, PotentialSpec("zero"), s).orbitals
    finals = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        cfg = EvolveConfig(t_final=0.5, dt=dt, snapshot_times=[0.5], record_commutators=False)
        finals.append(evolve(init, GAUSS, cfg).snapshots[-1][1])
    d1 = projection_hs_distance(finals[0], finals[1])
    d2 = projection_hs_distance(finals[1], finals[2])
    assert d1 / d2 >= 3.0


def test_evolve_unitarity_long_run():
    g = build_grid(1, 32, 2 * np.pi)
    s = ScaleParams(N=4, d=1)
    vext = cos_well(g, 1.0)
    init = scf_ground_state(vext, GAUSS, s).orbitals
    cfg = EvolveConfig(t_final=0.12, dt=1e-3, record_commutators=False)
    traj = evolve(init, GAUSS, cfg)
    assert len(traj.diagnostics) >= 100
    assert max(r.orthonormality_defect for r in traj.diagnostics) <= 1e-9
    assert not traj.events  # no forced re-orthonormalizations


def test_evolve_projection_structure_preserved():
    g = build_grid(1, 32, 2 * np.pi)
    s = ScaleParams(N=5, d=1)
    init = scf_ground_state(cos_well(g, 1.5), PotentialSpec("zero"), s).orbitals
    traj = evolve(init, GAUSS, EvolveConfig(t_final=0.1, dt=1e-3, record_commutators=False))
    for rec in traj.diagnostics:
        assert rec.trace == pytest.approx(5.0)
        assert rec.projection_defect <= 1e-8 * np.sqrt(5)


def test_evolve_time_reversal():
    g = build_grid(1, 32, 2 * np.pi)
    s = ScaleParams(N=4, d=1)
    init = scf_ground_state(cos_well(g, 2.0), PotentialSpec("zero"), s).orbitals
    cfg = EvolveConfig(t_final=0.3, dt=1e-3, snapshot_times=[0.3], record_commutators=False)
    fwd = evolve(init, GAUSS, cfg).snapshots[-1][1]
    # h is real in the position basis, so conjugation reverses time
    back = evolve(OrbitalSet(fwd.orbitals.conj(), g, s), GAUSS, cfg).snapshots[-1][1]
    back = OrbitalSet(back.orbitals.conj(), g, s)
    assert projection_hs_distance(back, init) < 1e-6


def test_evolve_energy_conservation_short():
    g = build_grid(1, 32, 2 * np.pi)
    s = ScaleParams(N=4, d=1)
    init = scf_ground_state(cos_well(g, 2.0), PotentialSpec("zero"), s).orbitals
    traj = evolve(init, GAUSS, EvolveConfig(t_final=0.2, dt=1e-3, record_commutators=False))
    e = np.array([r.energy for r in traj.diagnostics])
    assert np.max(np.abs(e - e[0])) / abs(e[0]) < 1e-7


def test_evolve_rejects_bad_config():
    with pytest.raises(ValueError):
        EvolveConfig(t_final=1.0, dt=2.0)
    with pytest.raises(ValueError):
        EvolveConfig(t_final=1.0, dt=0.1, krylov_dim=2)


def test_exchange_commutator_zero_potential(small_state):
    assert exchange_commutator_hs(small_state, PotentialSpec("zero")) == 0.0


def test_exchange_commutator_bounded(small_state):
    val = exchange_commutator_hs(small_state, GAUSS)
    assert val <= 2.0 * GAUSS.sup_norm(small_state.grid)


def test_exchange_commutator_matches_dense_kernel(small_state):
    # dense oracle from the integral kernel formula:
    # [X, omega](x,y) = N^{-1} int dz (V(x-z) - V(y-z)) omega(x,z) omega(z,y)
    st = small_state
    g, s = st.grid, st.scale
    om = st.orbitals @ st.orbitals.conj().T
    vs = GAUSS.sample(g)
    ia = np.arange(8)
    vd = vs[(ia[:, None] - ia[None, :]) % 8]
    comm = np.zeros((8, 8), dtype=complex)
    for i in range(8):
        for j in range(8):
            comm[i, j] = (
                g.weight * np.sum((vd[i, :] - vd[j, :]) * om[i, :] * om[:, j]) / s.N
            )
    dense = g.weight * np.linalg.norm(comm)
    assert exchange_commutator_hs(st, GAUSS) == pytest.approx(dense, abs=1e-12)


def test_hartree_vs_hf_gap_trivial_cases():
    g = build_grid(1, 16, 2 * np.pi)
    s = ScaleParams(N=3, d=1)
    sea = free_fermi_sea(g, s)
    cfg = EvolveConfig(
        t_final=0.2, dt=0.01, snapshot_times=[0.0, 0.2], record_commutators=False
    )
    gaps = hartree_vs_hf_gap(sea, PotentialSpec("zero"), cfg)
    assert all(gap < 1e-10 for _, gap in gaps)


def test_hartree_keeps_self_interaction_at_n1():
    # at N=1 only the HF flow reduces to the free one (mean field cancels
    # exchange); the Hartree equation retains the self-interaction, so the
    # gap is a genuine, dt-converged property of the two equations
    g = build_grid(1, 16, 2 * np.pi)
    s1 = ScaleParams(N=1, d=1)
    st1 = random_orbital_set(g, s1, np.random.default_rng(5))
    vals = []
    for dt in (1e-3, 5e-4):
        cfg = EvolveConfig(t_final=0.2, dt=dt, snapshot_times=[0.2], record_commutators=False)
        vals.append(hartree_vs_hf_gap(st1, GAUSS, cfg)[0][1])
    assert vals[0] > 1e-3
    assert abs(vals[0] - vals[1]) < 1e-4 * vals[0]


def test_evolve_include_vext_requires_field():
    g = build_grid(1, 16, 2 * np.pi)
    sea = free_fermi_sea(g, ScaleParams(N=3, d=1))
    cfg = EvolveConfig(t_final=0.1, dt=0.01, include_Vext=True)
    with pytest.raises(ValueError, match="V_ext"):
        evolve(sea, PotentialSpec("zero"), cfg)


def test_evolve_with_trap_holds_ground_state():
    # the SCF ground state of the trap is stationary under the trapped flow
    g = build_grid(1, 32, 2 * np.pi)
    s = ScaleParams(N=3, d=1)
    vext = cos_well(g, 2.0)
    init = scf_ground_state(vext, PotentialSpec("zero"), s).orbitals
    cfg = EvolveConfig(
        t_final=0.2, dt=1e-3, include_Vext=True, snapshot_times=[0.2], record_commutators=False
    )
    traj = evolve(init, PotentialSpec("zero"), cfg, V_ext=vext)
    assert projection_hs_distance(init, traj.snapshots[-1][1]) < 1e-8
