"""Toolkit for studying amplitude-estimation-based numerical differentiation
of expected values, with exact stencils, smoothness-driven schedules, a
seeded QAE simulator, and closed-form financial oracles."""

from .stencil import (
    StencilKey,
    Stencil,
    compute_stencil,
    vandermonde_stencil,
    apply_stencil,
    residual_bound,
    abs_sum_bound,
)
from .schedule import (
    GevreySpec,
    SchedulePreconditionError,
    ScheduleRangeError,
    eps_prime,
    n_th,
    h_th,
    h_min,
    eps_tilde,
    check_h_condition,
    check_eps_condition,
    qubit_estimate,
)
from .distribution import (
    DiscreteDistribution,
    discretize_standard_normal,
    discretize_uniform,
    distribution_from_csv,
    expectation,
)
from .integrand import (
    Integrand,
    QuantizedIntegrand,
    BlackScholesModel,
    GevreyCalibration,
    analytic_greek,
    bs_price,
    bs_value_derivatives,
    calibrate_gevrey,
    call_slope_bound,
    make_greek_integrand,
    make_sine_integrand,
    sine_derivative,
)
from .qae_sim import (
    AmplitudeProblem,
    QAEResult,
    classical_mc_estimate,
    depth_schedule,
    grover_call_count,
    mlae_estimate,
    mlae_estimate_batch,
    shots_for_delta,
    spawn_generators,
)
from .pipeline import (
    DiffEstimate,
    DiffJob,
    EncodingError,
    PrecisionInfeasibleError,
    QAEConfig,
    amplitude_accuracy,
    encoded_probability_nonsmooth,
    encoded_probability_sum_in_qae,
    encoded_probability_smooth,
    make_job,
    minimal_parameters,
    run_job,
    run_naive,
    run_sum_in_qae,
    run_trials,
    select_method,
    smooth_normalizer,
    threshold_parameters,
)
from .audits import (
    AuditReport,
    audit_bounds,
    audit_lemma1,
    audit_lemma2,
    audit_lemma3,
    audit_lemma5,
    audit_lemma6,
)
from .experiments import (
    ConfigError,
    ExperimentConfig,
    config_from_dict,
    load_config,
    run_experiment,
    run_sweep,
    table1_report,
)

__version__ = "0.1.0"

__all__ = [
    "StencilKey",
    "Stencil",
    "compute_stencil",
    "vandermonde_stencil",
    "apply_stencil",
    "residual_bound",
    "abs_sum_bound",
    "GevreySpec",
    "SchedulePreconditionError",
    "ScheduleRangeError",
    "eps_prime",
    "n_th",
    "h_th",
    "h_min",
    "eps_tilde",
    "check_h_condition",
    "check_eps_condition",
    "qubit_estimate",
    "DiscreteDistribution",
    "discretize_standard_normal",
    "discretize_uniform",
    "distribution_from_csv",
    "expectation",
    "Integrand",
    "QuantizedIntegrand",
    "BlackScholesModel",
    "GevreyCalibration",
    "analytic_greek",
    "bs_price",
    "bs_value_derivatives",
    "calibrate_gevrey",
    "call_slope_bound",
    "make_greek_integrand",
    "make_sine_integrand",
    "sine_derivative",
    "AmplitudeProblem",
    "QAEResult",
    "classical_mc_estimate",
    "depth_schedule",
    "grover_call_count",
    "mlae_estimate",
    "mlae_estimate_batch",
    "shots_for_delta",
    "spawn_generators",
    "DiffEstimate",
    "DiffJob",
    "EncodingError",
    "PrecisionInfeasibleError",
    "QAEConfig",
    "amplitude_accuracy",
    "encoded_probability_nonsmooth",
    "encoded_probability_sum_in_qae",
    "encoded_probability_smooth",
    "make_job",
    "minimal_parameters",
    "run_job",
    "run_naive",
    "run_sum_in_qae",
    "run_trials",
    "select_method",
    "smooth_normalizer",
    "threshold_parameters",
    "AuditReport",
    "audit_bounds",
    "audit_lemma1",
    "audit_lemma2",
    "audit_lemma3",
    "audit_lemma5",
    "audit_lemma6",
    "ConfigError",
    "ExperimentConfig",
    "config_from_dict",
    "load_config",
    "run_experiment",
    "run_sweep",
    "table1_report",
    "__version__",
]
