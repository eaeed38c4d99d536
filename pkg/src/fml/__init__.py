"""Mean-field and semiclassical dynamics of N fermions.

Builds Slater-determinant initial data with semiclassical structure, evolves
the time-dependent Hartree-Fock and Hartree equations, compares against the
Vlasov limit through Wigner transforms, and validates the mean-field
approximation against an exact small-lattice many-body oracle.
"""

__version__ = "0.1.0"

from .grids import Grid, KernelOperator, ScaleParams, SpatialField, build_grid, convolve_periodic
from .potentials import PotentialSpec, assv_weighted_norm, cos_well
from .initial import (
    OrbitalSet,
    SCFResult,
    TFResult,
    closed_shell_sizes,
    fermi_momentum_field,
    free_fermi_sea,
    hf_energy,
    random_orbital_set,
    scf_ground_state,
    tf_energy,
    thomas_fermi_density,
    weyl_projection,
)
from .dynamics import (
    EvolveConfig,
    PropagationError,
    Trajectory,
    evolve,
    exchange_commutator_hs,
    hartree_vs_hf_gap,
    mean_field_apply,
    mean_field_energy,
    projection_hs_distance,
)
from .semiclassics import (
    CommutatorReport,
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
from .oracle import (
    FockBasis,
    FockState,
    LatticeHamiltonian,
    StudyConfig,
    build_fock_basis,
    build_hamiltonian,
    convergence_study,
    fluctuation_number,
    krylov_propagate,
    one_particle_density,
    slater_to_fock,
)

__all__ = [name for name in dir() if not name.startswith("_")]
