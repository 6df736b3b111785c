"""Relative value iteration for the channel's average-reward DP.

With a known initial state and deterministic state updates every reachable
belief is a point mass, so the DP runs directly on the channel states. The
iteration uses the aperiodicity transform

    h <- h + tau * (Th - h - (Th - h)(ref)),

which keeps h(ref) = 0 and has the same fixed points as plain relative value
iteration while converging on periodic state graphs.
"""

from __future__ import annotations

import logging

import networkx as nx
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg

from fsc_bounds.channels.fsc import Fsc, validate
from fsc_bounds.solver.maximize import InnerMaximizer
from fsc_bounds.solver.reward import state_rewards
from fsc_bounds.solver.types import DpSolution, Policy, PolicyGain, SolverOptions
from fsc_bounds.utils.exceptions import (
    DimensionMismatchError,
    InvalidPolicyError,
    UnreachableStateError,
)
from fsc_bounds.utils.logging_decorators import log_timing

logger = logging.getLogger(__name__)

PROGRESS_EVERY = 1000


def _value_vector(fsc: Fsc, h: ArrayLike) -> NDArray[np.float64]:
    values = np.asarray(h, dtype=np.float64)
    if values.shape != (fsc.n_states,):
        raise DimensionMismatchError(
            f"h has {values.size} entries but the channel has {fsc.n_states} states"
        )
    return values


def _require_reachable(fsc: Fsc) -> None:
    missing = sorted(set(range(fsc.n_states)) - fsc.reachable_states())
    if missing:
        names = ", ".join(fsc.state_names[s] for s in missing)
        raise UnreachableStateError(
            f"states not reachable from s0={fsc.state_names[fsc.initial_state]}: "
            f"{names}"
        )


@log_timing()
def solve_average_reward(
    fsc: Fsc, opts: SolverOptions | None = None
) -> DpSolution:
    """Solve the average-reward DP by relative value iteration.

    Args:
        fsc: A valid input-driven channel whose states are all reachable
            from its initial state.
        opts: Solver options; defaults to ``SolverOptions()``.

    Returns:
        The solution. When the span criterion is not met within
        ``opts.max_iterations`` the last iterate is returned with
        ``converged=False``.

    Raises:
        InvalidChannelError: If ``fsc`` is not a valid channel.
        UnreachableStateError: If some state cannot be reached from s0.

    """
    opts = opts or SolverOptions()
    validate(fsc).raise_if_invalid()
    _require_reachable(fsc)

    ref = fsc.initial_state
    maximizer = InnerMaximizer(fsc, opts)
    h = np.zeros(fsc.n_states)
    spans: list[float] = []
    converged = False
    iterations = 0

    while True:
        th, rows = maximizer.evaluate(h)
        gain = th - h
        span = float(gain.max() - gain.min())
        spans.append(span)
        iterations += 1
        if iterations % PROGRESS_EVERY == 0:
            logger.debug(
                f"{fsc.name or 'fsc'}: iteration {iterations}, span {span:.3e}"
            )
        if span < opts.span_tolerance:
            converged = True
            break
        if iterations >= opts.max_iterations:
            break
        h = h + opts.damping * (gain - gain[ref])

    rho = 0.5 * float(gain.max() + gain.min())
    residual = float(np.max(np.abs(gain - rho)))
    if not converged:
        logger.warning(
            f"{fsc.name or 'fsc'}: no convergence after {iterations} iterations "
            f"(span {span:.3e})"
        )
    else:
        logger.debug(
            f"{fsc.name or 'fsc'}: rho={rho:.12f} after {iterations} iterations"
        )
    return DpSolution(
        rho=rho,
        h=h,
        policy=Policy(rows),
        bellman_residual=residual,
        iterations=iterations,
        converged=converged,
        reference_state=ref,
        span_history=tuple(spans),
    )


def bellman_gaps(
    fsc: Fsc, rho: float, h: ArrayLike, opts: SolverOptions | None = None
) -> NDArray[np.float64]:
    """Signed gaps (Th)(s) - rho - h(s) for every state.

    Raises:
        DimensionMismatchError: If ``h`` does not have one entry per state.

    """
    values = _value_vector(fsc, h)
    th, _ = InnerMaximizer(fsc, opts or SolverOptions()).evaluate(values)
    return np.asarray(th - rho - values, dtype=np.float64)


def bellman_residual(
    fsc: Fsc, rho: float, h: ArrayLike, opts: SolverOptions | None = None
) -> float:
    """Max over states of |(Th)(s) - rho - h(s)|; small values certify rho."""
    return float(np.max(np.abs(bellman_gaps(fsc, rho, h, opts))))


def greedy_policy(
    fsc: Fsc, h: ArrayLike, opts: SolverOptions | None = None
) -> Policy:
    """The maximizing rows of the Bellman operator applied to ``h``."""
    values = _value_vector(fsc, h)
    _, rows = InnerMaximizer(fsc, opts or SolverOptions()).evaluate(values)
    return Policy(rows)


def transition_matrix(fsc: Fsc, policy: Policy) -> NDArray[np.float64]:
    """P[s, s'] = sum_x rows[s, x] 1{f(s, x) = s'}."""
    p = np.zeros((fsc.n_states, fsc.n_states))
    for x in range(fsc.n_inputs):
        np.add.at(p, (np.arange(fsc.n_states), fsc.next_state[:, x]), policy.rows[:, x])
    return p


def closed_classes(p: NDArray[np.float64]) -> list[set[int]]:
    """Closed communicating classes of a stochastic matrix."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(p.shape[0]))
    graph.add_edges_from(zip(*np.nonzero(p > 0.0), strict=True))
    condensed = nx.condensation(graph)
    return [
        set(condensed.nodes[c]["members"])
        for c in condensed.nodes
        if condensed.out_degree(c) == 0
    ]


def policy_gain(fsc: Fsc, policy: Policy) -> PolicyGain:
    """Exact average reward and relative values of a stationary policy.

    Solves rho + h = r + P h with h(s0) = 0.

    Raises:
        InvalidPolicyError: If the policy does not fit the channel, or its
            state chain has more than one closed class (the gain is then not
            a single number).

    """
    policy.check(fsc)
    p = transition_matrix(fsc, policy)
    classes = closed_classes(p)
    if len(classes) != 1:
        raise InvalidPolicyError(
            f"policy induces {len(classes)} closed classes; gain is not unique"
        )
    n = fsc.n_states
    r = state_rewards(fsc, policy.rows)
    system = np.zeros((n + 1, n + 1))
    system[:n, :n] = np.eye(n) - p
    system[:n, n] = 1.0
    system[n, fsc.initial_state] = 1.0
    solution = linalg.solve(system, np.append(r, 0.0))
    return PolicyGain(rho=float(solution[n]), h=solution[:n], rewards=r)
