"""Optimal on/off switching of an M/M/inf queue with holding, running and switching costs."""
from .closed_forms import (a_threshold, always_on_value, best_zero_n, busy_periods,
                           full_service_value_off, n_alpha, n_star, n_tilde, passive_value,
                           t_between, zero_n_average_cost)
from .evaluate import (evaluate_full_service_exact, evaluate_mn_exact, first_passage,
                       solve_discounted)
from .lp import assemble_lp, extract_policy, solve_average, solve_lp
from .model import (MN, FullService, ModelParams, State, Table, ValidationError,
                    policy_action, validate_params)
from .sim import SimConfig, simulate_busy_period, simulate_policy
from .smdp import boundary_quantities, build_smdp

__all__ = [
    "a_threshold", "always_on_value", "best_zero_n", "busy_periods", "full_service_value_off",
    "n_alpha", "n_star", "n_tilde", "passive_value", "t_between", "zero_n_average_cost",
    "evaluate_full_service_exact", "evaluate_mn_exact", "first_passage", "solve_discounted",
    "assemble_lp", "extract_policy", "solve_average", "solve_lp",
    "MN", "FullService", "ModelParams", "State", "Table", "ValidationError", "policy_action",
    "validate_params", "SimConfig", "simulate_busy_period", "simulate_policy",
    "boundary_quantities", "build_smdp",
]
__version__ = "0.1.0"
