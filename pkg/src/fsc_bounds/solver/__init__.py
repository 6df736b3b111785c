"""Average-reward dynamic program for input-driven channels."""

from fsc_bounds.solver.reward import disturbance_law, next_dp_state, reward
from fsc_bounds.solver.rvi import (
    bellman_gaps,
    bellman_residual,
    greedy_policy,
    policy_gain,
    solve_average_reward,
)
from fsc_bounds.solver.types import DpSolution, DpState, Policy, SolverOptions

__all__ = [
    "DpSolution",
    "DpState",
    "Policy",
    "SolverOptions",
    "bellman_gaps",
    "bellman_residual",
    "disturbance_law",
    "greedy_policy",
    "next_dp_state",
    "policy_gain",
    "reward",
    "solve_average_reward",
]
