"""Exact and Monte Carlo evaluation of a stationary policy's average reward."""

from __future__ import annotations

import bisect
from dataclasses import dataclass
import logging

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.solver.reward import state_rewards
from fsc_bounds.solver.rvi import closed_classes, transition_matrix
from fsc_bounds.solver.types import Policy

DEFAULT_STEPS = 1_000_000
DEFAULT_BATCHES = 50

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PolicyChainStats:
    """Stationary law on S, exact average reward, and a Monte Carlo estimate.

    With several closed classes ``stationary`` is the limit law from s0,
    mixing the classes by their absorption probabilities.
    """

    stationary: NDArray[np.float64]
    exact_average_reward: float
    mc_estimate: float
    stderr: float
    steps: int
    n_closed_classes: int

    @property
    def multiple_classes(self) -> bool:
        return self.n_closed_classes > 1

    def within(self, n_sigma: float = 3.0) -> bool:
        gap = abs(self.exact_average_reward - self.mc_estimate)
        return gap <= n_sigma * self.stderr


def _class_stationary(
    p: NDArray[np.float64], members: list[int]
) -> NDArray[np.float64]:
    sub = p[np.ix_(members, members)]
    n = len(members)
    system = sub.T - np.eye(n)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.zeros(p.shape[0])
    pi[members] = np.clip(linalg.solve(system, rhs), 0.0, None)
    return pi / pi.sum()


def _absorption(
    p: NDArray[np.float64], classes: list[set[int]], s0: int
) -> list[float]:
    """Probability of ending in each closed class when started at s0."""
    for i, members in enumerate(classes):
        if s0 in members:
            return [1.0 if j == i else 0.0 for j in range(len(classes))]
    recurrent = set().union(*classes)
    transient = [s for s in range(p.shape[0]) if s not in recurrent]
    pos = transient.index(s0)
    lhs = np.eye(len(transient)) - p[np.ix_(transient, transient)]
    out = []
    for members in classes:
        into = p[np.ix_(transient, sorted(members))].sum(axis=1)
        out.append(float(linalg.solve(lhs, into)[pos]))
    return out


def stationary_from_start(fsc: Fsc, policy: Policy) -> tuple[NDArray[np.float64], int]:
    """Limit law of the policy chain from s0 and its number of closed classes."""
    p = transition_matrix(fsc, policy)
    classes = closed_classes(p)
    weights = _absorption(p, classes, fsc.initial_state)
    pi = np.zeros(fsc.n_states)
    for weight, members in zip(weights, classes, strict=True):
        if weight > 0.0:
            pi += weight * _class_stationary(p, sorted(members))
    return pi, len(classes)


def _batch_stderr(samples: NDArray[np.float64], batches: int) -> float:
    usable = len(samples) - len(samples) % batches
    means = samples[:usable].reshape(batches, -1).mean(axis=1)
    return float(means.std(ddof=1) / np.sqrt(batches))


def simulate_policy(
    fsc: Fsc,
    policy: Policy,
    steps: int = DEFAULT_STEPS,
    seed: int = 0,
    batches: int = DEFAULT_BATCHES,
) -> PolicyChainStats:
    """Evaluate a policy exactly and by simulating its state chain from s0.

    The Monte Carlo standard error uses batch means, which accounts for the
    autocorrelation of the reward sequence.
    """
    policy.check(fsc)
    if steps < batches or batches < 2:
        raise ValueError(f"need steps >= batches >= 2, got {steps} and {batches}")
    pi, n_classes = stationary_from_start(fsc, policy)
    if n_classes > 1:
        logger.warning(
            f"{fsc.name or 'fsc'}: policy chain has {n_classes} closed classes"
        )
    rewards = state_rewards(fsc, policy.rows)
    exact = float(pi @ rewards)

    p = transition_matrix(fsc, policy)
    cdf = [list(np.cumsum(row)) for row in p]
    uniforms = np.random.default_rng(seed).random(steps).tolist()
    visits = np.empty(steps, dtype=np.int64)
    s = fsc.initial_state
    last = fsc.n_states - 1
    for t, u in enumerate(uniforms):
        visits[t] = s
        s = min(bisect.bisect_right(cdf[s], u), last)
    samples = rewards[visits]
    estimate = float(samples.mean())
    stderr = _batch_stderr(samples, batches)
    logger.debug(
        f"simulate_policy: exact {exact:.9f}, mc {estimate:.9f} +/- {stderr:.2e}"
    )
    return PolicyChainStats(
        stationary=pi,
        exact_average_reward=exact,
        mc_estimate=estimate,
        stderr=stderr,
        steps=steps,
        n_closed_classes=n_classes,
    )
