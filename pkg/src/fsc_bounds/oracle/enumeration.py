"""Exact N-letter information quantities by full enumeration.

The joint law of (x^N, y^N) from the initial state is held as one array with
interleaved axes (x_1, y_1, x_2, y_2, ...). Every quantity is a signed sum of
entropies of its marginals.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable
from dataclasses import dataclass
import itertools
import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.solver.types import Policy
from fsc_bounds.utils.exceptions import EnumerationLimitError
from fsc_bounds.utils.info import mutual_information_bits, total_entropy_bits

JOINT_LIMIT = 10**7
HISTORY_LIMIT = 10**6
CONSERVATION_TOLERANCE = 1e-10

InputLaw = Callable[[tuple[int, ...]], ArrayLike]
"""Maps an input history x^{t-1} to the distribution of x_t."""

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SequenceStats:
    """I(X^N; Y^N), I(Y^N -> X^N), I(X^{N-1} -> Y^N) and the reward sum, in bits."""

    n: int
    mutual_info: float
    reverse_di: float
    forward_lagged_di: float
    reward_sum: float

    @property
    def conservation_gap(self) -> float:
        """|I(X^N; Y^N) - I(Y^N -> X^N) - I(X^{N-1} -> Y^N)|."""
        return abs(self.mutual_info - self.reverse_di - self.forward_lagged_di)

    def violations(self, tol: float = CONSERVATION_TOLERANCE) -> list[str]:
        """The conservation identity and the two inequalities that fail."""
        failures = []
        if self.conservation_gap > tol:
            failures.append(f"conservation gap {self.conservation_gap:.3e}")
        if self.mutual_info < self.reverse_di - tol:
            failures.append(
                f"I(X;Y)={self.mutual_info:.12f} < I(Y->X)={self.reverse_di:.12f}"
            )
        if self.reverse_di < self.reward_sum - tol:
            failures.append(
                f"I(Y->X)={self.reverse_di:.12f} < reward sum={self.reward_sum:.12f}"
            )
        return failures


def _state_after(fsc: Fsc, history: Iterable[int]) -> int:
    s = fsc.initial_state
    for x in history:
        s = fsc.step(s, x)
    return s


def markov_input_law(fsc: Fsc, policy: Policy) -> InputLaw:
    """x_t ~ policy.rows[s_{t-1}], with s_{t-1} recovered from the history."""
    policy.check(fsc)

    def law(history: tuple[int, ...]) -> ArrayLike:
        return policy.rows[_state_after(fsc, history)]

    return law


def _interleave(arr: NDArray[np.float64], t: int, n_x: int) -> NDArray[np.float64]:
    """Reshape an array led by t input axes so they line up with (x, y) pairs."""
    tail = arr.shape[t:]
    return arr.reshape((n_x, 1) * t + tail)


def _joint_table(fsc: Fsc, input_law: InputLaw, n: int) -> NDArray[np.float64]:
    n_x, n_y = fsc.n_inputs, fsc.n_outputs
    joint = np.ones(())
    states = np.full((), fsc.initial_state, dtype=np.int64)
    for t in range(n):
        q = np.empty((n_x,) * t + (n_x,))
        for history in itertools.product(range(n_x), repeat=t):
            q[history] = np.asarray(input_law(history), dtype=np.float64)
        w = fsc.emission[states]  # (X,)*t + (X, Y)
        step = _interleave(q, t, n_x)[..., None] * _interleave(w, t, n_x)
        joint = joint[..., None, None] * step
        states = fsc.next_state[states]
    return joint


def _entropy(
    joint: NDArray[np.float64], x_axes: Iterable[int], y_axes: Iterable[int]
) -> float:
    keep = {2 * i for i in x_axes} | {2 * i + 1 for i in y_axes}
    drop = tuple(a for a in range(joint.ndim) if a not in keep)
    return total_entropy_bits(joint.sum(axis=drop) if drop else joint)


def exact_sequence_stats(fsc: Fsc, input_law: InputLaw, n: int) -> SequenceStats:
    """Enumerate every (x^N, y^N) from the channel's initial state.

    Raises
    ------
        EnumerationLimitError: If |X|^N |Y|^N exceeds 1e7.

    """
    if n < 1:
        raise ValueError(f"horizon must be at least 1, got {n}")
    size = (fsc.n_inputs * fsc.n_outputs) ** n
    if size > JOINT_LIMIT:
        raise EnumerationLimitError(
            f"|X|^N |Y|^N = {size} exceeds the enumeration limit {JOINT_LIMIT}"
        )
    joint = _joint_table(fsc, input_law, n)

    def h(xs: int, ys: Iterable[int]) -> float:
        return _entropy(joint, range(xs), ys)

    mutual = h(n, []) + h(0, range(n)) - h(n, range(n))
    reverse, forward, rewards = [], [], []
    for t in range(1, n + 1):
        reverse.append(
            h(t, []) - h(t - 1, []) - h(t, range(t)) + h(t - 1, range(t))
        )
        forward.append(
            h(0, range(t))
            - h(0, range(t - 1))
            - h(t - 1, range(t))
            + h(t - 1, range(t - 1))
        )
        rewards.append(
            h(t - 1, [t - 1]) - h(t - 1, []) - h(t, [t - 1]) + h(t, [])
        )
    return SequenceStats(
        n=n,
        mutual_info=mutual,
        reverse_di=math.fsum(reverse),
        forward_lagged_di=math.fsum(forward),
        reward_sum=math.fsum(rewards),
    )


def reward_rate_oracle(fsc: Fsc, policy: Policy, n: int) -> float:
    """(1/N) sum_t I(X_t, S_{t-1}; Y_t | X^{t-1}) under a stationary policy.

    Every input history is enumerated; the per-step term of a history is the
    mutual information of the table P(x_t, y_t | x^{t-1}).

    Raises
    ------
        EnumerationLimitError: If |X|^N exceeds 1e6.

    """
    if n < 1:
        raise ValueError(f"horizon must be at least 1, got {n}")
    if fsc.n_inputs**n > HISTORY_LIMIT:
        raise EnumerationLimitError(
            f"|X|^N = {fsc.n_inputs**n} exceeds the history limit {HISTORY_LIMIT}"
        )
    policy.check(fsc)
    step_information = np.array(
        [
            mutual_information_bits(policy.rows[s][:, None] * fsc.emission[s])
            for s in range(fsc.n_states)
        ]
    )
    mass = np.ones(1)
    states = np.array([fsc.initial_state], dtype=np.int64)
    terms = []
    for _ in range(n):
        terms.append(math.fsum((mass * step_information[states]).tolist()))
        mass = (mass[:, None] * policy.rows[states]).ravel()
        states = fsc.next_state[states].ravel()
    return math.fsum(terms) / n
