"""Directional collective decay of atom chains coupled to an optical nanofiber."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvergenceError,
    DomainError,
    FiberQEDError,
    SolverError,
)
from .fiber import (
    FiberSpec,
    GuidedModeData,
    ModeIndex,
    check_single_mode,
    guided_profile,
    radiation_profile,
    sellmeier_index,
    solve_he11,
)
from .coupling import (
    ChainSpec,
    CouplingMatrices,
    QuadratureConfig,
    assemble,
    free_space_oracle,
)
from .modes import (
    ModeDecomposition,
    ModeProfile,
    diagonalize,
    guided_only_modes,
    hybridization_overlap,
    mode_profile,
    reconstruct,
    superradiant_profile,
)
from .steady import (
    DriveField,
    EmissionRates,
    SteadyStateAmplitudes,
    drive_vector,
    emission_rates,
    solve_steady,
)
from .observables import (
    CollectiveObservables,
    SingleAtomObservables,
    SpectrumTable,
    collective_observables,
    collective_residue,
    emission_spectrum,
    integrate_collective,
    mode_matching_angle,
    rotate_dipole,
    single_atom,
    sweep,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DomainError",
    "FiberQEDError",
    "SolverError",
    "FiberSpec",
    "GuidedModeData",
    "ModeIndex",
    "check_single_mode",
    "guided_profile",
    "radiation_profile",
    "sellmeier_index",
    "solve_he11",
    "ChainSpec",
    "CouplingMatrices",
    "QuadratureConfig",
    "assemble",
    "free_space_oracle",
    "ModeDecomposition",
    "ModeProfile",
    "diagonalize",
    "guided_only_modes",
    "hybridization_overlap",
    "mode_profile",
    "reconstruct",
    "superradiant_profile",
    "DriveField",
    "EmissionRates",
    "SteadyStateAmplitudes",
    "drive_vector",
    "emission_rates",
    "solve_steady",
    "CollectiveObservables",
    "SingleAtomObservables",
    "SpectrumTable",
    "collective_observables",
    "collective_residue",
    "emission_spectrum",
    "integrate_collective",
    "mode_matching_angle",
    "rotate_dipole",
    "single_atom",
    "sweep",
    "__version__",
]
