"""Monte Carlo engine for RIS-aided links operating under electromagnetic
interference: spatial correlation models, channel statistics, SNR limits,
and an EMI-aware phase optimizer."""

__version__ = "0.1.0"

from .angular_density import (
    AngularDensity,
    QuadratureRule,
    gauss_legendre_rule,
    gaussian_density,
    isotropic_density,
)
from .channels import (
    ChannelDraw,
    LinkScenario,
    draw_trial,
    scenario_from_db,
)
from .correlation import (
    CorrelationMatrix,
    estimate_effective_correlation,
    quadrature_correlation,
    sinc_correlation,
)
from .experiments import (
    ScenarioSpec,
    builtin_scenarios,
    run_scenario,
    run_scenario_to_dir,
    validate,
)
from .geometry import RisGeometry, element_positions, wave_vector
from .optimizer import (
    build_problem,
    build_problem_factored,
    projected_gradient,
    relaxed_upper_bound,
    relaxed_upper_bound_factored,
)
from .snr import (
    PhaseConfig,
    SnrResult,
    noise_optimal_phases,
    prop1_limit,
    prop2_limit,
    snr_no_emi,
    snr_with_emi,
)

__all__ = [
    "AngularDensity",
    "ChannelDraw",
    "CorrelationMatrix",
    "LinkScenario",
    "PhaseConfig",
    "QuadratureRule",
    "RisGeometry",
    "ScenarioSpec",
    "SnrResult",
    "builtin_scenarios",
    "build_problem",
    "build_problem_factored",
    "draw_trial",
    "element_positions",
    "estimate_effective_correlation",
    "gauss_legendre_rule",
    "gaussian_density",
    "isotropic_density",
    "noise_optimal_phases",
    "projected_gradient",
    "prop1_limit",
    "prop2_limit",
    "quadrature_correlation",
    "relaxed_upper_bound",
    "relaxed_upper_bound_factored",
    "run_scenario",
    "run_scenario_to_dir",
    "scenario_from_db",
    "sinc_correlation",
    "snr_no_emi",
    "snr_with_emi",
    "validate",
    "wave_vector",
]
