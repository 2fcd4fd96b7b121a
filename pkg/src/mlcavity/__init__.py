"""Collective coupling of multilevel-ground-state atoms to a cavity mode."""

from .levels import (
    CouplingSet,
    LevelScheme,
    TransitionGeometry,
    clebsch_gordan,
    clebsch_gordan_exact,
    coupling_set,
    two_transition_scheme,
)
from .meanfield import (
    AtomNumberModel,
    DriveParams,
    IntegrationControl,
    MeanFieldState,
    TimeSeries,
    derivatives,
    initial_state,
    integrate,
)
from .ode import StiffnessError
from .pumping import (
    DegenerateParameterError,
    RateCoefficients,
    RateTrace,
    TwoTransitionParams,
    alpha_strong_coupling,
    classify_regime,
    crosscheck_meanfield,
    implicit_time,
    integrate_rate,
    match_drive_strength,
    rate_coefficients,
)
from .scenarios import (
    DynamicsResult,
    ExperimentConfig,
    Fig5Result,
    atom_number_ballistic,
    dipole_potential_depth,
    eta_from_power,
    run_dynamics,
    scenario_fig2,
    scenario_fig3,
    scenario_fig4,
    scenario_fig5,
    steady_state_populations,
)
from .spectra import (
    SpectrumScan,
    effective_coupling,
    intracavity_intensity_ss,
    normal_mode_splitting,
    transmission_spectrum,
    transmitted_power,
)

__version__ = "0.1.0"

__all__ = [
    "AtomNumberModel",
    "CouplingSet",
    "DegenerateParameterError",
    "DriveParams",
    "DynamicsResult",
    "ExperimentConfig",
    "Fig5Result",
    "IntegrationControl",
    "LevelScheme",
    "MeanFieldState",
    "RateCoefficients",
    "RateTrace",
    "SpectrumScan",
    "StiffnessError",
    "TimeSeries",
    "TransitionGeometry",
    "TwoTransitionParams",
    "alpha_strong_coupling",
    "atom_number_ballistic",
    "classify_regime",
    "clebsch_gordan",
    "clebsch_gordan_exact",
    "coupling_set",
    "crosscheck_meanfield",
    "derivatives",
    "dipole_potential_depth",
    "effective_coupling",
    "eta_from_power",
    "implicit_time",
    "initial_state",
    "integrate",
    "integrate_rate",
    "intracavity_intensity_ss",
    "match_drive_strength",
    "normal_mode_splitting",
    "rate_coefficients",
    "run_dynamics",
    "scenario_fig2",
    "scenario_fig3",
    "scenario_fig4",
    "scenario_fig5",
    "steady_state_populations",
    "transmission_spectrum",
    "transmitted_power",
    "two_transition_scheme",
]
