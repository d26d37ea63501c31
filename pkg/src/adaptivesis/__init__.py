"""SIS epidemics on dynamic random graphs with infection-adaptive updating.

Exact finite-population simulators (direct and lazy-reveal), a forest model
for the slightly-supercritical regime, reversible subtree chains with their
partition functions, the star-neighborhood quasi-stationary law, closed-form
threshold conditions, and a sweep driver with a stable CSV contract.
"""

from .cpef import (CpefOutcome, HostOutcome, HostTree, estimate_meta_offspring,
                   run_cpef, run_host_infection, sample_gw_tree)
from .explore import (ExplorationEngine, ExplorationState,
                      run_exploration_trajectory)
from .qsd import (QsdMoments, QsdResult, StarGenerator, TruncPoisson,
                  default_truncation, flow_inequality_check, qsd_moments,
                  quasi_stationary, simulate_star_hitting_time,
                  simulate_star_hitting_times, star_generator,
                  truncated_poisson)
from .randutil import binomial_variate, derive_seed, poisson_variate
from .scp import (ScpOutcome, exact_subtree_partition, gw_partition_values,
                  partition_from_levels, run_scp, sample_gw_levels,
                  simulate_scp_occupation)
from .simcore import (DEFAULT_EVENT_BUDGET, MODES, Params, SimState,
                      TrajectoryStats, resample_neighborhood, run_trajectory,
                      sample_er_graph, validate_state)
from .sweep import (CellResult, SweepConfig, classify_cell, emit_config,
                    emit_csv, parse_config, parse_grid, run_sweep)
from .theory import (MeanfieldDecay, TheoryReport, TwoTypeOutcome,
                     branching_top_eigenvalue, critical_lambda_fast_updates,
                     critical_lambda_forest, critical_lambda_nonadaptive,
                     critical_lambda_simple, critical_lambda_small_product,
                     evaluate_conditions, infection_mean_bound,
                     meanfield_decay, meta_offspring_lower_bound,
                     simulate_meanfield, simulate_two_type_branching,
                     sir_offspring_mean, slow_factor_theta,
                     subcritical_constant, subcritical_constant_closed_form,
                     supercritical_forest_condition, z_bound)

__version__ = "0.1.0"

__all__ = [
    "Params", "SimState", "TrajectoryStats", "MODES", "DEFAULT_EVENT_BUDGET",
    "run_trajectory", "sample_er_graph", "resample_neighborhood",
    "validate_state",
    "ExplorationEngine", "ExplorationState", "run_exploration_trajectory",
    "HostTree", "HostOutcome", "CpefOutcome", "sample_gw_tree",
    "run_host_infection", "run_cpef", "estimate_meta_offspring",
    "ScpOutcome", "run_scp", "simulate_scp_occupation",
    "exact_subtree_partition", "partition_from_levels", "sample_gw_levels",
    "gw_partition_values",
    "TruncPoisson", "StarGenerator", "QsdResult", "QsdMoments",
    "default_truncation", "truncated_poisson", "star_generator",
    "quasi_stationary", "qsd_moments", "flow_inequality_check",
    "simulate_star_hitting_time", "simulate_star_hitting_times",
    "TheoryReport", "MeanfieldDecay", "TwoTypeOutcome",
    "evaluate_conditions", "sir_offspring_mean", "meta_offspring_lower_bound",
    "supercritical_forest_condition", "branching_top_eigenvalue",
    "simulate_two_type_branching", "meanfield_decay", "simulate_meanfield",
    "z_bound", "slow_factor_theta", "infection_mean_bound",
    "subcritical_constant", "subcritical_constant_closed_form",
    "critical_lambda_small_product", "critical_lambda_fast_updates",
    "critical_lambda_forest", "critical_lambda_simple",
    "critical_lambda_nonadaptive",
    "SweepConfig", "CellResult", "classify_cell", "parse_grid",
    "parse_config", "emit_config", "run_sweep", "emit_csv",
    "derive_seed", "poisson_variate", "binomial_variate",
]
