"""Value types shared by the average-reward solver and its callers."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field, fields, replace
import math
from typing import TYPE_CHECKING, Any

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fsc_bounds.utils.exceptions import InvalidPolicyError

if TYPE_CHECKING:
    from fsc_bounds.channels.fsc import Fsc

ROW_SUM_TOLERANCE = 1e-12
FORBIDDEN_MASS_TOLERANCE = 1e-15


def _frozen(arr: ArrayLike) -> NDArray[np.float64]:
    out = np.array(arr, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs for the solver, the inner maximizer and the Q search.

    Attributes
    ----------
        tolerance: Bellman residual the solution must certify.
        span_tolerance: Stop once span(Th - h) drops below this.
        max_iterations: Iteration cap of relative value iteration.
        grid_points: Coarse grid size for binary inner maximization.
        restarts: Nelder-Mead starts for rows with three or more inputs.
        seed: Seed of every random start.
        golden_tolerance: Bracket width at which golden-section search stops.
        damping: Step size of the aperiodicity transform, in (0, 1].
        q_restarts: Random starts of the V-graph input-distribution search.

    """

    tolerance: float = 1e-10
    span_tolerance: float = 1e-12
    max_iterations: int = 100_000
    grid_points: int = 64
    restarts: int = 8
    seed: int = 0
    golden_tolerance: float = 1e-10
    damping: float = 0.5
    q_restarts: int = 16

    def __post_init__(self) -> None:
        for name in ("tolerance", "span_tolerance", "golden_tolerance"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0.0:
                raise ValueError(f"{name} must be positive, got {value!r}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.grid_points < 3:
            raise ValueError(f"grid_points must be >= 3, got {self.grid_points}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be >= 1, got {self.restarts}")
        if self.q_restarts < 0:
            raise ValueError(f"q_restarts must be >= 0, got {self.q_restarts}")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError(f"damping must lie in (0, 1], got {self.damping}")

    def with_overrides(self, **overrides: Any) -> SolverOptions:
        """Copy with the given fields replaced; ``None`` values are ignored."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown solver options: {sorted(unknown)}")
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class DpState:
    """A belief over channel states; a point mass for input-driven channels."""

    belief: NDArray[np.float64]

    def __post_init__(self) -> None:
        belief = np.asarray(self.belief, dtype=np.float64)
        if belief.ndim != 1 or belief.size < 1:
            raise ValueError(f"belief must be a non-empty vector, got {belief.shape}")
        if np.any(belief < 0.0) or abs(float(belief.sum()) - 1.0) > ROW_SUM_TOLERANCE:
            raise ValueError("belief must be a probability vector")
        object.__setattr__(self, "belief", _frozen(belief))

    @classmethod
    def point_mass(cls, n_states: int, s: int) -> DpState:
        belief = np.zeros(n_states)
        belief[s] = 1.0
        return cls(belief)

    @property
    def point_mass_index(self) -> int | None:
        """The state carrying all the mass, or None for a spread belief."""
        support = np.flatnonzero(self.belief)
        if support.size == 1 and self.belief[support[0]] == 1.0:
            return int(support[0])
        return None


@dataclass(frozen=True, eq=False)
class Policy:
    """A stationary policy: one input distribution per channel state."""

    rows: NDArray[np.float64]

    def __post_init__(self) -> None:
        rows = np.asarray(self.rows, dtype=np.float64)
        if rows.ndim != 2:
            raise InvalidPolicyError(f"policy rows must be 2-D, got {rows.shape}")
        object.__setattr__(self, "rows", _frozen(rows))

    @classmethod
    def deterministic(cls, fsc: Fsc, choice: Sequence[int]) -> Policy:
        """The policy that always sends ``choice[s]`` from state s."""
        rows = np.zeros((fsc.n_states, fsc.n_inputs))
        rows[np.arange(fsc.n_states), np.asarray(choice, dtype=np.int64)] = 1.0
        return cls(rows)

    @classmethod
    def from_binary_params(cls, fsc: Fsc, params: Sequence[float]) -> Policy:
        """Build a policy from the ``a`` scalars of the binary states.

        ``params`` lists, for each state with exactly two allowed inputs in
        ascending state order, the probability of the larger input. States
        with one allowed input send it deterministically.
        """
        values = iter(params)
        rows = np.zeros((fsc.n_states, fsc.n_inputs))
        for s in range(fsc.n_states):
            allowed = fsc.allowed_inputs(s)
            if len(allowed) == 1:
                rows[s, allowed[0]] = 1.0
            elif len(allowed) == 2:
                value = next(values, None)
                if value is None:
                    raise InvalidPolicyError("fewer parameters than binary states")
                a = float(value)
                rows[s, allowed[0]] = 1.0 - a
                rows[s, allowed[1]] = a
            else:
                raise InvalidPolicyError(
                    f"state {s} has {len(allowed)} allowed inputs, not 1 or 2"
                )
        if next(values, None) is not None:
            raise InvalidPolicyError("more parameters than binary states")
        return cls(rows)

    @property
    def n_states(self) -> int:
        return int(self.rows.shape[0])

    def row(self, s: int) -> NDArray[np.float64]:
        return self.rows[s]

    def check(self, fsc: Fsc) -> None:
        """Raise ``InvalidPolicyError`` unless the policy fits ``fsc``."""
        if self.rows.shape != (fsc.n_states, fsc.n_inputs):
            raise InvalidPolicyError(
                f"policy shape {self.rows.shape} does not match "
                f"({fsc.n_states}, {fsc.n_inputs})"
            )
        if not np.all(np.isfinite(self.rows)) or np.any(self.rows < 0.0):
            raise InvalidPolicyError("policy has negative or non-finite entries")
        sums = self.rows.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE)
        if bad.size:
            s = int(bad[0])
            raise InvalidPolicyError(f"policy row {s} sums to {sums[s]:.12g}, not 1")
        forbidden = np.where(fsc.allowed_mask, 0.0, self.rows)
        if np.any(forbidden > FORBIDDEN_MASS_TOLERANCE):
            first = np.argwhere(forbidden > FORBIDDEN_MASS_TOLERANCE)[0]
            s, x = int(first[0]), int(first[1])
            raise InvalidPolicyError(
                f"policy puts mass {self.rows[s, x]:.3g} on forbidden input {x} "
                f"at state {s}"
            )

    def binary_params(self, fsc: Fsc) -> tuple[float, ...]:
        """The ``a`` scalars: P(larger allowed input) at each binary state."""
        out: list[float] = []
        for s in range(fsc.n_states):
            allowed = fsc.allowed_inputs(s)
            if len(allowed) == 2:
                out.append(float(self.rows[s, allowed[1]]))
        return tuple(out)


@dataclass(frozen=True, eq=False)
class DpSolution:
    """Result of relative value iteration.

    ``h`` is pinned to zero at ``reference_state`` (the DP state of s0).
    """

    rho: float
    h: NDArray[np.float64]
    policy: Policy
    bellman_residual: float
    iterations: int
    converged: bool
    reference_state: int = 0
    span_history: tuple[float, ...] = field(default=(), repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", _frozen(self.h))


@dataclass(frozen=True, eq=False)
class PolicyGain:
    """Average reward and relative values of a fixed stationary policy."""

    rho: float
    h: NDArray[np.float64]
    rewards: NDArray[np.float64]

    def __post_init__(self) -> None:
        object.__setattr__(self, "h", _frozen(self.h))
        object.__setattr__(self, "rewards", _frozen(self.rewards))
