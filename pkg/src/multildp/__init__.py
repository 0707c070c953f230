"""Large deviations of multiple sums over boxes in N^d."""

from .errors import LDPError, NonConvergence, NumericalError, ValidationError
from .free_energy import (
    MOBIUS_PROFILE,
    BoundaryFreeEnergy,
    BoundaryKind,
    GeneralFreeEnergy,
    MobiusFreeEnergy,
    SeriesControl,
    SymmetricFreeEnergy,
    WeightedFreeEnergy,
    WeightProfile,
    asymptotic_free_energy,
    boundary_free_energy,
    finite_volume_free_energy,
    free_energy_derivative,
    mobius_free_energy,
    symmetric_free_energy,
    weighted_free_energy,
)
from .ising import chain_mgf_log, field_from_bias, partition_function_log, spectrum
from .lattice import (
    BoxSpec,
    MultiplierVector,
    asymptotic_chain_density,
    chain_census,
    count_all_chains,
    count_free_chains,
    decompose_box,
    enumerate_census,
    validate_multipliers,
)
from .oracle import (
    brute_force_mgf_log,
    empirical_rate,
    exact_symmetric_distribution,
    mc_free_energy,
    multiple_sum,
)
from .rate import (
    RateValue,
    SolverControl,
    fan_dimension_E,
    legendre_rate,
    mobius_dimension_F,
    symmetric_rate_closed,
    weighted_rate,
)

__all__ = [
    "LDPError",
    "NonConvergence",
    "NumericalError",
    "ValidationError",
    "MOBIUS_PROFILE",
    "BoundaryFreeEnergy",
    "BoundaryKind",
    "GeneralFreeEnergy",
    "MobiusFreeEnergy",
    "SeriesControl",
    "SymmetricFreeEnergy",
    "WeightedFreeEnergy",
    "WeightProfile",
    "asymptotic_free_energy",
    "boundary_free_energy",
    "finite_volume_free_energy",
    "free_energy_derivative",
    "mobius_free_energy",
    "symmetric_free_energy",
    "weighted_free_energy",
    "chain_mgf_log",
    "field_from_bias",
    "partition_function_log",
    "spectrum",
    "BoxSpec",
    "MultiplierVector",
    "asymptotic_chain_density",
    "chain_census",
    "count_all_chains",
    "count_free_chains",
    "decompose_box",
    "enumerate_census",
    "validate_multipliers",
    "brute_force_mgf_log",
    "empirical_rate",
    "exact_symmetric_distribution",
    "mc_free_energy",
    "multiple_sum",
    "RateValue",
    "SolverControl",
    "fan_dimension_E",
    "legendre_rate",
    "mobius_dimension_F",
    "symmetric_rate_closed",
    "weighted_rate",
]

__version__ = "0.1.0"
