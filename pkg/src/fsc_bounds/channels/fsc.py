"""Input-driven finite-state channels and their validation.

An input-driven FSC has a deterministic state update ``s_t = f(s_{t-1}, x_t)``
and an emission law ``W[s][x][y] = P(y | x, s)``. Input constraints are kept
out of the emission law: each state carries a mask of allowed inputs, and
policies must put zero mass on the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
import logging

import networkx as nx
import numpy as np
from numpy.typing import ArrayLike, NDArray

from fsc_bounds.utils.exceptions import InvalidChannelError

ROW_SUM_TOLERANCE = 1e-12
MISSING = -1

logger = logging.getLogger(__name__)


def _frozen(arr: NDArray[np.generic]) -> NDArray[np.generic]:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def _default_names(n: int) -> tuple[str, ...]:
    return tuple(str(i) for i in range(n))


def _label(names: tuple[str, ...], i: int) -> str:
    return names[i] if 0 <= i < len(names) else str(i)


@dataclass(frozen=True, eq=False)
class Fsc:
    """An input-driven finite-state channel.

    Attributes
    ----------
        next_state: Integer table of shape (|S|, |X|); ``MISSING`` marks an
            undefined transition (only ever produced by loaders, and always
            reported by ``validate``).
        emission: Table of shape (|S|, |X|, |Y|) with ``P(y | x, s)``.
        initial_state: Index of s0, known to encoder and decoder.
        allowed: Boolean mask of shape (|S|, |X|); defaults to all True.

    """

    next_state: NDArray[np.int64]
    emission: NDArray[np.float64]
    initial_state: int = 0
    allowed: NDArray[np.bool_] | None = None
    state_names: tuple[str, ...] = ()
    input_names: tuple[str, ...] = ()
    output_names: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        next_state = np.asarray(self.next_state, dtype=np.int64)
        emission = np.asarray(self.emission, dtype=np.float64)
        if next_state.ndim != 2:
            raise ValueError(f"next_state must be 2-D, got shape {next_state.shape}")
        if emission.ndim != 3:
            raise ValueError(f"emission must be 3-D, got shape {emission.shape}")
        allowed = (
            np.ones(next_state.shape, dtype=bool)
            if self.allowed is None
            else np.asarray(self.allowed, dtype=bool)
        )
        object.__setattr__(self, "next_state", _frozen(next_state))
        object.__setattr__(self, "emission", _frozen(emission))
        object.__setattr__(self, "allowed", _frozen(allowed))
        object.__setattr__(self, "initial_state", int(self.initial_state))
        if not self.state_names:
            object.__setattr__(self, "state_names", _default_names(next_state.shape[0]))
        if not self.input_names:
            object.__setattr__(self, "input_names", _default_names(next_state.shape[1]))
        if not self.output_names:
            object.__setattr__(self, "output_names", _default_names(emission.shape[2]))

    @classmethod
    def from_tables(
        cls,
        next_state: ArrayLike,
        emission: ArrayLike,
        initial_state: int = 0,
        allowed: ArrayLike | None = None,
        name: str = "",
    ) -> Fsc:
        """Build a channel from nested lists (or arrays)."""
        return cls(
            next_state=np.asarray(next_state, dtype=np.int64),
            emission=np.asarray(emission, dtype=np.float64),
            initial_state=initial_state,
            allowed=None if allowed is None else np.asarray(allowed, dtype=bool),
            name=name,
        )

    @property
    def n_states(self) -> int:
        return int(self.next_state.shape[0])

    @property
    def n_inputs(self) -> int:
        return int(self.next_state.shape[1])

    @property
    def n_outputs(self) -> int:
        return int(self.emission.shape[2])

    @property
    def allowed_mask(self) -> NDArray[np.bool_]:
        """The allowed-input mask (never None after construction)."""
        assert self.allowed is not None, "allowed is filled in __post_init__"
        return self.allowed

    def allowed_inputs(self, s: int) -> tuple[int, ...]:
        """Indices of the inputs allowed at state ``s``, ascending."""
        return tuple(int(x) for x in np.flatnonzero(self.allowed_mask[s]))

    def is_allowed(self, s: int, x: int) -> bool:
        return bool(self.allowed_mask[s, x])

    def step(self, s: int, x: int) -> int:
        """f(s, x)."""
        return int(self.next_state[s, x])

    def state_graph(self) -> nx.MultiDiGraph:
        """Directed multigraph with edges ``s --x--> f(s, x)`` over allowed x."""
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(range(self.n_states))
        for s in range(self.n_states):
            for x in self.allowed_inputs(s):
                t = self.step(s, x)
                if 0 <= t < self.n_states:
                    graph.add_edge(s, t, key=x, x=x)
        return graph

    def reachable_states(self) -> set[int]:
        """States reachable from s0 under some allowed-input sequence."""
        graph = self.state_graph()
        return {self.initial_state} | set(nx.descendants(graph, self.initial_state))

    def describe(self) -> str:
        label = self.name or "fsc"
        return (
            f"{label}: |S|={self.n_states} |X|={self.n_inputs} "
            f"|Y|={self.n_outputs} s0={self.state_names[self.initial_state]}"
        )


class ViolationKind(Enum):
    """Invariant families checked by ``validate``."""

    CARDINALITY = "cardinality"
    SHAPE = "shape"
    TOTALITY = "totality"
    PROBABILITY_RANGE = "probability-range"
    STOCHASTICITY = "stochasticity"
    INITIAL_STATE = "initial-state"
    NO_ALLOWED_INPUT = "no-allowed-input"
    NAMES = "names"


@dataclass(frozen=True)
class Violation:
    kind: ViolationKind
    message: str

    def __str__(self) -> str:
        return f"[{self.kind.value}] {self.message}"


@dataclass
class ValidationReport:
    """Every violated invariant of a channel; empty iff the channel is valid."""

    violations: list[Violation] = field(default_factory=list)

    def add(self, kind: ViolationKind, message: str) -> None:
        self.violations.append(Violation(kind, message))

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[ViolationKind]:
        return {v.kind for v in self.violations}

    def messages(self) -> list[str]:
        return [str(v) for v in self.violations]

    def __len__(self) -> int:
        return len(self.violations)

    def raise_if_invalid(self) -> None:
        if not self.ok:
            raise InvalidChannelError(self)


def _check_shapes(fsc: Fsc, report: ValidationReport) -> bool:
    n_s, n_x = fsc.next_state.shape
    if n_s < 1 or n_x < 1 or fsc.emission.shape[2] < 1:
        report.add(
            ViolationKind.CARDINALITY,
            f"alphabets must be non-empty, got |S|={n_s} |X|={n_x} "
            f"|Y|={fsc.emission.shape[2]}",
        )
        return False
    if fsc.emission.shape[:2] != (n_s, n_x):
        report.add(
            ViolationKind.SHAPE,
            f"emission shape {fsc.emission.shape} does not match next_state "
            f"shape {fsc.next_state.shape}",
        )
        return False
    if fsc.allowed_mask.shape != (n_s, n_x):
        report.add(
            ViolationKind.SHAPE,
            f"allowed mask shape {fsc.allowed_mask.shape} does not match "
            f"({n_s}, {n_x})",
        )
        return False
    return True


def _check_transitions(fsc: Fsc, report: ValidationReport) -> None:
    for s in range(fsc.n_states):
        for x in range(fsc.n_inputs):
            t = int(fsc.next_state[s, x])
            if t == MISSING:
                report.add(
                    ViolationKind.TOTALITY,
                    f"next_state missing for ({_label(fsc.state_names, s)},"
                    f"{_label(fsc.input_names, x)})",
                )
            elif not 0 <= t < fsc.n_states:
                report.add(
                    ViolationKind.TOTALITY,
                    f"next_state({_label(fsc.state_names, s)},"
                    f"{_label(fsc.input_names, x)})={t} is not a state",
                )


def _check_emission(fsc: Fsc, report: ValidationReport) -> None:
    w = fsc.emission
    for s in range(fsc.n_states):
        for x in range(fsc.n_inputs):
            row = w[s, x]
            where = f"({_label(fsc.state_names, s)},{_label(fsc.input_names, x)})"
            if not np.all(np.isfinite(row)) or np.any(row < 0.0) or np.any(row > 1.0):
                report.add(
                    ViolationKind.PROBABILITY_RANGE,
                    f"emission row {where} has entries outside [0,1]",
                )
                continue
            total = float(row.sum())
            if abs(total - 1.0) > ROW_SUM_TOLERANCE:
                report.add(
                    ViolationKind.STOCHASTICITY,
                    f"emission row {where} sums to {total:.12g}, not 1",
                )


def validate(fsc: Fsc) -> ValidationReport:
    """Report every violated input-driven FSC invariant of ``fsc``."""
    report = ValidationReport()
    if not _check_shapes(fsc, report):
        return report
    if not 0 <= fsc.initial_state < fsc.n_states:
        report.add(
            ViolationKind.INITIAL_STATE,
            f"initial_state {fsc.initial_state} is not a state index",
        )
    names_ok = (
        len(fsc.state_names) == fsc.n_states
        and len(fsc.input_names) == fsc.n_inputs
        and len(fsc.output_names) == fsc.n_outputs
    )
    if not names_ok:
        report.add(ViolationKind.NAMES, "symbol name lists do not match alphabets")
    _check_transitions(fsc, report)
    _check_emission(fsc, report)
    for s in range(fsc.n_states):
        if not fsc.allowed_mask[s].any():
            report.add(
                ViolationKind.NO_ALLOWED_INPUT,
                f"state {_label(fsc.state_names, s)} allows no input",
            )
    if not report.ok:
        logger.debug(f"validate({fsc.name or 'fsc'}): {len(report)} violation(s)")
    return report
