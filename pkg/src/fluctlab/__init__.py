"""Finite-volume laboratory for conservative stochastic PDEs with
spatially correlated noise on the periodic torus.

The package simulates mass-conserving diffusion equations driven by
spectrally correlated conservative noise, optionally with source terms
and their own noise, and packages the structural properties of their
solution theory (mass behavior, coupled-pair contraction, entropy and
moment bounds, kinetic-measure identities, vanishing-viscosity
convergence) as reproducible experiments with pass/fail verdicts.

Layout
------
``grid``       periodic grids, discrete calculus, initial data
``kernels``    hot loops, compiled when numba is available
``nonlin``     nonlinearity presets, cutoffs, assumption checks
``noise``      spectral noise fields and their increments
``solver``     explicit schemes, ensembles, couplings, cascades
``kinetic``    kinetic-function and dissipation-measure accumulation
``harness``    the frozen reference experiments and their thresholds
``serialize``  deterministic CSV and binary snapshot formats
``config``     sectioned key-value run configurations
``cli``        the ``fluctlab`` command
"""

from .config import RunConfig, parse_config
from .errors import ConfigurationError, DomainError, NumericError, StabilityError
from .grid import GridSpec, GridState, initial_state
from .harness import ExperimentSpec, Verdict, conservative_noise, fit_envelope, \
    reference_experiments, run_acceptance, scalar_noise
from .kinetic import KineticHistogram, accumulate_measure, chi_distance, \
    default_edges, dissipation_density, kinetic_function_slice
from .noise import NoiseField, SpectralNoiseSpec, build_spectral_noise, \
    verify_noise_assumptions
from .nonlin import NonlinearitySet, check_assumptions, custom_set, make_preset, \
    mollify_sigma
from .solver import CascadeReport, SolverConfig, Trajectory, run, run_cascade, \
    run_coupled, run_coupled_ensemble, run_ensemble, stability_bound, step_ito, \
    step_strat_heun
from .thresholds import DEFAULT as DEFAULT_THRESHOLDS
from .thresholds import Thresholds

__version__ = "0.1.0"

__all__ = [
    "CascadeReport", "ConfigurationError", "DEFAULT_THRESHOLDS", "DomainError",
    "ExperimentSpec", "GridSpec", "GridState", "KineticHistogram", "NoiseField",
    "NonlinearitySet", "NumericError", "RunConfig", "SolverConfig",
    "SpectralNoiseSpec", "StabilityError", "Thresholds", "Trajectory", "Verdict",
    "accumulate_measure", "build_spectral_noise", "check_assumptions",
    "chi_distance", "conservative_noise", "custom_set", "default_edges",
    "dissipation_density", "fit_envelope", "initial_state",
    "kinetic_function_slice", "make_preset", "mollify_sigma", "parse_config",
    "reference_experiments", "run", "run_acceptance", "run_cascade",
    "run_coupled", "run_coupled_ensemble", "run_ensemble", "scalar_noise",
    "stability_bound", "step_ito", "step_strat_heun",
    "verify_noise_assumptions",
]
