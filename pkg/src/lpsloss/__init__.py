"""Analysis and simulation of limited processor-sharing loss systems."""

from .distributions import (
    ArrivalRates,
    Deterministic,
    Exponential,
    Hyperexponential,
    LengthDistribution,
    ZeroInflatedExponential,
)
from .formulas import (
    RhoProfile,
    ServiceRateProfile,
    StateDistribution,
    egalitarian_srl_loss,
    erlang_b,
    fcfd_constant_loss,
    fcfd_zero_inflated_probs,
    fcfd_zero_inflated_rhos,
    limited_ps_probs,
    limited_ps_rhos,
    little_sojourn,
    poisson_tail,
    rho_n_from_lst,
    slow_service_loss_limit,
    srl_nserver_probs,
    truncate_unlimited,
    unlimited_ps_probs,
)
from .config import (
    AnalyticResult,
    ConfigError,
    Scenario,
    check_admissible,
    evaluate_selector,
    load_scenario,
    parse_scenario,
)
from .randomness import DEFAULT_SEED, substream, substream_pair
from .simulate import (
    Admitted,
    ArrivingLost,
    CouplingReport,
    CouplingViolation,
    DisplacedLost,
    Discipline,
    Event,
    IdleComparison,
    Job,
    SimEstimates,
    SimState,
    SystemSpec,
    Variant,
    advance_to_next_event,
    apply_arrival,
    compare_idle_periods,
    run,
    run_coupled,
    run_reference,
)

__version__ = "0.1.0"

__all__ = [
    "ArrivalRates",
    "Deterministic",
    "Exponential",
    "Hyperexponential",
    "LengthDistribution",
    "ZeroInflatedExponential",
    "RhoProfile",
    "ServiceRateProfile",
    "StateDistribution",
    "egalitarian_srl_loss",
    "erlang_b",
    "fcfd_constant_loss",
    "fcfd_zero_inflated_probs",
    "fcfd_zero_inflated_rhos",
    "limited_ps_probs",
    "limited_ps_rhos",
    "little_sojourn",
    "poisson_tail",
    "rho_n_from_lst",
    "slow_service_loss_limit",
    "srl_nserver_probs",
    "truncate_unlimited",
    "unlimited_ps_probs",
    "AnalyticResult",
    "ConfigError",
    "Scenario",
    "check_admissible",
    "evaluate_selector",
    "load_scenario",
    "parse_scenario",
    "DEFAULT_SEED",
    "substream",
    "substream_pair",
    "Admitted",
    "ArrivingLost",
    "CouplingReport",
    "CouplingViolation",
    "DisplacedLost",
    "Discipline",
    "Event",
    "IdleComparison",
    "Job",
    "SimEstimates",
    "SimState",
    "SystemSpec",
    "Variant",
    "advance_to_next_event",
    "apply_arrival",
    "compare_idle_periods",
    "run",
    "run_coupled",
    "run_reference",
    "__version__",
]
