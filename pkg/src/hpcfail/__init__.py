"""Hierarchical failure-rate model for supercomputers.

Compose component FIT rates into node, chassis, cabinet and system rates;
solve for failure-rate caps under a system-wide bound; compute resilience
efficiency from a time-usage breakdown; and check the analytic results
with a seeded Monte Carlo simulator.
"""

from hpcfail.budget import CapProblem, LinearConstraint, derive_constraint, solve_single_unknown, sweep_system_rate
from hpcfail.efficiency import CrScenario, TimeUsage, project_cr_efficiency, resilience_efficiency
from hpcfail.rate_algebra import (
    FailureRate,
    Mttf,
    NodeComponentRates,
    NodeRateModel,
    SignificanceIndex,
    fit_to_mttf,
    hard_rate,
    mttf_to_fit,
    node_rate,
    si_from_mask_fraction,
    soft_rate,
)
from hpcfail.refined_model import (
    CategoryGrouping,
    FailureCategoryRecord,
    RefinedRates,
    RefinedSi,
    apportion_rates,
    ingest_category_table,
    refined_constraint,
    refined_system_rate,
    solve_node_rate,
    sweep_node_rate,
)
from hpcfail.simulator import SimConfig, SimResult, simulate_cr_timeline, simulate_failure_counts
from hpcfail.tabular import Grid
from hpcfail.topology import SystemTopology, aggregate_levels, totals

__version__ = "0.1.0"
