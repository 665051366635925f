"""Composable finite-size secret-key rates for CV-QKD.

Gaussian-modulated coherent-state protocols with homodyne or heterodyne
detection over a thermal-loss channel: asymptotic rates, finite-size
composable bounds, worst-case parameter estimation, the coherent-attack
extension for heterodyne, and a Monte Carlo oracle for the estimator
statistics.
"""

from .channel import (
    ChannelParams,
    Detection,
    eve_tmsv_variance,
    loss_db_from_transmissivity,
    transmissivity_from_db,
)
from .coherent import (
    EnergyTestConfig,
    coherent_epsilon,
    coherent_rate_bounds,
    dimension_bound,
    dimension_penalty,
    min_energy_test_uses,
)
from .estimation import (
    EstimationError,
    PEConfig,
    TailBound,
    WorstCaseParams,
    chi2_deviations,
    estimate_worst_case,
    estimated_rate,
    excess_noise_std,
    gaussian_deviations,
    transmissivity_std,
    worst_case,
)
from .finite_size import (
    AepForm,
    BlockParams,
    RateBounds,
    SecurityEpsilons,
    aep_penalty,
    composable_rate_bounds,
    hash_offset,
    key_length_ub,
    legacy_rate_lb,
    total_epsilon,
)
from .gaussian import (
    SymplecticSpectrum,
    asymptotic_rate,
    bosonic_entropy,
    eve_conditional_cm,
    eve_output_cm,
    holevo_bound,
    is_physical,
    mutual_information,
    standard_form_spectrum,
    symplectic_eigenvalues,
)
from .montecarlo import (
    SimConfig,
    TrialEstimates,
    estimate_parameters,
    simulate_samples,
    validate_tail_coverage,
    validate_variances,
)
from .optimize import OptimizeResult, optimize_modulation
from .pipeline import (
    Attack,
    COLUMNS,
    RateReport,
    Scenario,
    SweepPoint,
    evaluate_optimized,
    evaluate_point,
    evaluate_sweep_point,
    rate_objective,
    run_points,
)

__version__ = "0.1.0"
