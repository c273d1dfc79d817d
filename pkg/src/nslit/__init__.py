"""Matter-wave diffraction behind an n-slit grating.

Wave fields by spectral synthesis, exact per-slit propagation, and the
far-field form; Bohmian trajectory ensembles with their no-crossing
topology; straight-line momentum-distribution trajectories; and the
statistics comparing both against the wave-function momentum density.
"""

__version__ = "0.1.0"

from .beamgrating import (
    HBAR,
    GratingSpec,
    MomentumSpectrum,
    ParticleBeam,
    build_initial_wavefunction,
    sample_initial_positions,
    spectrum_analytic,
    spectrum_numeric,
    square_momentum_cdf,
    square_tail_mass,
    talbot_length,
)
from .bohm import (
    StepPolicy,
    TrajectoryEnsemble,
    VelocityField,
    integrate_trajectory,
    launch_ensemble,
    order_violations,
    velocity_x,
)
from .config import parse_config, parse_config_file, scenario_to_config
from .errors import (
    ConfigError,
    DomainError,
    NslitError,
    QuadratureError,
    ResolutionError,
    UnsupportedConfigurationError,
)
from .mdmodel import (
    ArrivalProbability,
    MDTrajectory,
    arrival_probability,
    near_field_discrepancy,
    sample_md_ensemble,
)
from .momstats import (
    MomentumHistogram,
    bohm_momentum_histogram,
    distribution_distance,
    farfield_jacobian_density,
    momentum_bins,
    quantum_momentum_density,
)
from .presets import Scenario, presets
from .runner import RunResult, run_scenario
from .wavefield import (
    IntensityProfile,
    WaveField,
    carpet,
    default_profile_grid,
    intensity_profile,
    probability_mass,
    psi_farfield,
    psi_fresnel,
    psi_spectral,
)

__all__ = [
    "HBAR",
    "__version__",
    "ParticleBeam",
    "GratingSpec",
    "MomentumSpectrum",
    "build_initial_wavefunction",
    "spectrum_analytic",
    "spectrum_numeric",
    "talbot_length",
    "sample_initial_positions",
    "square_tail_mass",
    "square_momentum_cdf",
    "WaveField",
    "IntensityProfile",
    "psi_spectral",
    "psi_fresnel",
    "psi_farfield",
    "intensity_profile",
    "carpet",
    "probability_mass",
    "default_profile_grid",
    "StepPolicy",
    "VelocityField",
    "TrajectoryEnsemble",
    "velocity_x",
    "integrate_trajectory",
    "launch_ensemble",
    "order_violations",
    "MDTrajectory",
    "ArrivalProbability",
    "arrival_probability",
    "sample_md_ensemble",
    "near_field_discrepancy",
    "MomentumHistogram",
    "momentum_bins",
    "bohm_momentum_histogram",
    "quantum_momentum_density",
    "farfield_jacobian_density",
    "distribution_distance",
    "Scenario",
    "presets",
    "parse_config",
    "parse_config_file",
    "scenario_to_config",
    "RunResult",
    "run_scenario",
    "NslitError",
    "ResolutionError",
    "UnsupportedConfigurationError",
    "DomainError",
    "QuadratureError",
    "ConfigError",
]
