"""Discrete fractional Laplacian on Z, the random fractional Schrodinger
operator, and the Krylov spectral-distance probe of localization."""

__version__ = "0.1.0"

from .errors import DomainError, NumericalContractError
from .kernel import (
    JumpWeights,
    KernelTable,
    jump_distribution,
    kernel_table,
    kernel_value,
    normalization_A,
    tail_bound,
)
from .lattice import (
    DisorderField,
    Hamiltonian,
    LatticeVector,
    apply_frac_laplacian,
    apply_hamiltonian,
    derive_seed,
    epsilon,
)
from .spectral import (
    DistanceTrace,
    KrylovBasis,
    OrthogonalityReport,
    average_traces,
    distance_trace,
    krylov_start,
    krylov_step,
    make_test_vector,
    orthogonality_check,
)
from .green import (
    DispersionFit,
    GreenProfile,
    dispersion_exponent,
    evolve,
    green_profile,
    green_value,
    half_mass_width,
)
