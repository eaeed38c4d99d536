"""From quantum orbitals to classical phase space.

Takes the Wigner transform of a trapped SCF state (a filled local Fermi ball:
W ~ (2 pi)^{-d} inside |v| <= p_F(x)), quenches the trap, and compares the
evolved Hartree-Fock Wigner function against the Vlasov transport of the same
initial data.  The raw L1 gap is dominated by quantum interference fringes at
the eps scale (Wigner -> Vlasov is weak-* convergence); after coarse-graining
at a fixed phase-space scale the gap decays like a power of eps.

Run:  python3 demos/wigner_vlasov.py        (about two minutes)
"""

import time

import numpy as np

from fml import ScaleParams, build_grid
from fml.dynamics import EvolveConfig, evolve
from fml.initial import scf_ground_state
from fml.potentials import PotentialSpec, cos_well
from fml.semiclassics import (
    coarse_grain,
    evolve_vlasov,
    phase_space_l1_distance,
    wigner_transform,
)


def main():
    V = PotentialSpec("gaussian", amplitude=0.4, width=0.5)
    raw, smooth, epss = [], [], []
    for n, m in ((16, 256), (32, 256), (64, 512)):
        t0 = time.time()
        grid = build_grid(1, m, 2 * np.pi)
        scale = ScaleParams(N=n, d=1)
        trap = cos_well(grid, 2.0)
        initial = scf_ground_state(trap, V, scale, tol=1e-9, max_iter=300).orbitals

        cfg = EvolveConfig(
            t_final=0.5, dt=2e-3, snapshot_times=[0.0, 0.5], record_commutators=False
        )
        traj = evolve(initial, V, cfg)
        W0 = wigner_transform(traj.snapshots[0][1])
        W_hf = wigner_transform(traj.snapshots[1][1], v_grid=W0.v_grid)
        vlasov = evolve_vlasov(W0, V, t_final=0.5, dt=2e-3)
        W_vl = vlasov.final()

        mass_drift = max(abs(mm - 1.0) for _, mm in vlasov.mass_history)
        d_raw = phase_space_l1_distance(W_hf, W_vl)
        d_sm = phase_space_l1_distance(
            coarse_grain(W_hf, 0.25, 0.12), coarse_grain(W_vl, 0.25, 0.12)
        )
        raw.append(d_raw)
        smooth.append(d_sm)
        epss.append(scale.epsilon)
        print(
            f"N={n:>3} (M={m}): Wigner mass {W0.mass:.10f}, Vlasov mass drift {mass_drift:.1e}, "
            f"L1 raw {d_raw:.4f}, coarse-grained {d_sm:.5f}   ({time.time() - t0:.0f}s)"
        )

    slope_raw = np.polyfit(np.log(epss), np.log(raw), 1)[0]
    slope_sm = np.polyfit(np.log(epss), np.log(smooth), 1)[0]
    print()
    print(f"log-log order in eps: raw {slope_raw:+.2f} (fringe-dominated, flat),")
    print(f"                      coarse-grained {slope_sm:+.2f} (the semiclassical rate)")


if __name__ == "__main__":
    main()
