"""Optimal pilot-symbol ratios for uplink joint-reception CoMP with imperfect channel estimation."""

from .baselines import SearchBudget, stochastic_search_ee, stochastic_search_se, traditional_scheme
from .channel_model import (
    BsLink,
    Scenario,
    SystemConfig,
    dbm_to_watt,
    load_scenario,
    noise_power_w,
    path_loss_db,
    per_bs_snr,
    scenario_from_distances,
    table_one_scenario,
    watt_to_dbm,
)
from .ee_optimizer import EeSolution, alpha_for_rate, solve_ee_approx, solve_ee_precise
from .errors import (
    ApproximationDomainError,
    ConfigError,
    ContractError,
    InfeasibleError,
    PilotOptError,
    SolverError,
)
from .link_metrics import (
    LinkState,
    PilotAllocation,
    capacity_bps,
    combined_snr,
    energy_efficiency,
    mmse_error,
    spectral_efficiency,
)
from .se_optimizer import Method, SeSolution, alpha_from_target_snr, solve_se_approx, solve_se_precise

__version__ = "0.1.0"
