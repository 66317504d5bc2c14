"""Two-arm trial simulation with exact potential-outcome oracles.

Simulates randomized (or observational) two-arm trials with intercurrent
events, computes the exact value of each handling strategy's estimand from
the latent potential-outcome table, and estimates the same estimands from
the observed-data view, so identification claims become testable
oracle-vs-estimator properties.
"""
__version__ = "0.1.0"

from ._kernels import BACKEND as KERNEL_BACKEND
from .analysis_sets import (
    AnalysisSetAssignment,
    BalanceReport,
    build_sets,
    randomization_balance_check,
    selection_bias_demo,
)
from .dgp import ScenarioConfig, load_config, save_config, simulate_population
from .errors import (
    BootstrapInstabilityError,
    ConfigError,
    EstimandLabError,
    EstimandUndefinedError,
    InestimableError,
    MonotonicityViolationError,
    ParseError,
    PlanError,
    SingularDesignError,
)
from .estimators import (
    EstimateResult,
    Formula,
    OlsFit,
    bootstrap_ci,
    bootstrap_plan,
    estimate_composite,
    estimate_confounder_adjusted,
    estimate_hypothetical,
    estimate_principal_stratum,
    estimate_treatment_policy,
    estimate_while_on_treatment,
    execute_plan,
    ols_fit,
)
from .oracle import EstimandValue, oracle_ate, oracle_estimand
from .potential_outcomes import (
    ObservedRecord,
    ObservedTable,
    PotentialParticipant,
    PotentialTable,
    PrincipalStratum,
    derive_observed,
    derive_observed_table,
    individual_effect,
    individual_effects,
    strata_of,
    stratum_of,
)
from .rng import make_generator, split_seed
from .speclang import (
    AnalysisPlan,
    EstimandSpec,
    Strategy,
    parse_spec,
    plan_of,
    print_spec,
    print_specs,
)
