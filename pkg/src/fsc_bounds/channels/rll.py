"""(d,k)-runlength-limited input constraints and the built-in constrained DMCs.

State semantics: the state counts the current run of 0s since the last 1.
For k = inf the count is capped at d (only "fewer than d zeros yet" matters);
for finite k it runs up to k, where a 1 is forced. The initial state 0 reads
as "a 1 was just emitted".
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum
import math
from typing import Final

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from fsc_bounds.channels.fsc import Fsc

INFINITY: Final[float] = math.inf
INFINITY_LABEL: Final[str] = "inf"


@dataclass(frozen=True)
class RllSpec:
    """A (d,k)-RLL constraint with 0 <= d < k <= inf."""

    d: int
    k: int | float = INFINITY

    def __post_init__(self) -> None:
        if isinstance(self.d, bool) or not isinstance(self.d, int) or self.d < 0:
            raise ValueError(f"d must be a nonnegative integer, got {self.d!r}")
        if self.k != INFINITY:
            if isinstance(self.k, bool) or float(self.k) != int(self.k):
                raise ValueError(f"k must be an integer or inf, got {self.k!r}")
            object.__setattr__(self, "k", int(self.k))
        if not self.d < self.k:
            raise ValueError(f"need d < k, got d={self.d} k={self.k_label}")

    @classmethod
    def parse(cls, d: int | str, k: int | float | str) -> RllSpec:
        """Build a spec from CLI-style values; ``k`` may be the string ``inf``."""
        if isinstance(k, str):
            k_value: int | float = (
                INFINITY if k.strip().lower() in {"inf", "infinity"} else int(k)
            )
        else:
            k_value = k
        return cls(int(d), k_value)

    @property
    def is_infinite(self) -> bool:
        return self.k == INFINITY

    @property
    def k_label(self) -> str:
        return INFINITY_LABEL if self.k == INFINITY else str(int(self.k))

    @property
    def k_int(self) -> int:
        """k as an integer; only valid for finite constraints."""
        assert not self.is_infinite, "k_int requested for an unbounded constraint"
        return int(self.k)

    @property
    def n_states(self) -> int:
        return self.d + 1 if self.is_infinite else self.k_int + 1

    def __str__(self) -> str:
        return f"({self.d},{self.k_label})"


@dataclass(frozen=True, eq=False)
class ConstraintGraph:
    """Edge-labelled presentation of a (d,k)-RLL constraint.

    ``edges`` holds ``(s, x, s')`` triples; the graph is deterministic on
    labels, so ``successor`` is a partial function.
    """

    spec: RllSpec
    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    @property
    def adjacency(self) -> NDArray[np.int64]:
        """A[u, v] = number of edges u -> v."""
        a = np.zeros((self.n_vertices, self.n_vertices), dtype=np.int64)
        for s, _, t in self.edges:
            a[s, t] += 1
        return a

    def successor(self, s: int, x: int) -> int | None:
        for u, label, t in self.edges:
            if u == s and label == x:
                return t
        return None

    def labels_from(self, s: int) -> tuple[int, ...]:
        return tuple(sorted(label for u, label, _ in self.edges if u == s))

    def digraph(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(range(self.n_vertices))
        for s, x, t in self.edges:
            graph.add_edge(s, t, key=x, x=x)
        return graph

    def is_irreducible(self) -> bool:
        return bool(nx.is_strongly_connected(self.digraph()))


def _rll_edges(spec: RllSpec) -> list[tuple[int, int, int]]:
    d = spec.d
    edges: list[tuple[int, int, int]] = []
    if spec.is_infinite:
        edges.extend((s, 0, s + 1) for s in range(d))
        edges.extend([(d, 0, d), (d, 1, 0)])
        return edges
    k = spec.k_int
    for s in range(k):
        edges.append((s, 0, s + 1))
        if s >= d:
            edges.append((s, 1, 0))
    edges.append((k, 1, 0))
    return sorted(edges)


def constraint_graph(spec: RllSpec) -> ConstraintGraph:
    """The constraint graph on states {0..d} (k = inf) or {0..k} (k < inf)."""
    return ConstraintGraph(spec, spec.n_states, tuple(sorted(_rll_edges(spec))))


class DmcFamily(Enum):
    BSC = "bsc"
    BEC = "bec"


@dataclass(frozen=True)
class DmcKind:
    """A binary-input memoryless channel: BSC(p) or BEC(eps)."""

    family: DmcFamily
    param: float

    def __post_init__(self) -> None:
        value = float(self.param)
        if not math.isfinite(value) or not 0.0 <= value <= 1.0:
            raise ValueError(
                f"{self.family.value} parameter must lie in [0,1], got {self.param!r}"
            )
        object.__setattr__(self, "param", value)

    @classmethod
    def bsc(cls, p: float) -> DmcKind:
        return cls(DmcFamily.BSC, p)

    @classmethod
    def bec(cls, eps: float) -> DmcKind:
        return cls(DmcFamily.BEC, eps)

    @classmethod
    def parse(cls, text: str) -> DmcKind:
        """Parse ``bsc:0.1`` or ``bec:0.25``."""
        family, sep, value = text.partition(":")
        if not sep:
            raise ValueError(f"expected FAMILY:VALUE, got {text!r}")
        try:
            return cls(DmcFamily(family.strip().lower()), float(value))
        except ValueError as e:
            raise ValueError(f"bad channel kind {text!r}: {e}") from e

    @property
    def output_names(self) -> tuple[str, ...]:
        return ("0", "1") if self.family is DmcFamily.BSC else ("0", "1", "e")

    def law(self) -> NDArray[np.float64]:
        """The |X| x |Y| transition matrix."""
        q = self.param
        if self.family is DmcFamily.BSC:
            return np.array([[1.0 - q, q], [q, 1.0 - q]])
        return np.array([[1.0 - q, 0.0, q], [0.0, 1.0 - q, q]])

    def __str__(self) -> str:
        return f"{self.family.value.upper()}({self.param:g})"


def make_dmc(kind: DmcKind) -> Fsc:
    """The unconstrained memoryless channel as a one-state FSC."""
    law = kind.law()
    return Fsc(
        next_state=np.zeros((1, 2), dtype=np.int64),
        emission=law[np.newaxis, :, :],
        initial_state=0,
        input_names=("0", "1"),
        output_names=kind.output_names,
        name=str(kind),
    )


def make_rll_dmc(spec: RllSpec, dmc: DmcKind) -> Fsc:
    """The (d,k)-RLL input-constrained DMC as an input-driven FSC.

    Forbidden inputs stay in the transition table (x=1 below d resets to 0,
    x=0 at k stays at k) but are masked out of ``allowed``.
    """
    graph = constraint_graph(spec)
    n = graph.n_vertices
    next_state = np.zeros((n, 2), dtype=np.int64)
    allowed = np.zeros((n, 2), dtype=bool)
    for s in range(n):
        next_state[s, 0] = min(s + 1, n - 1)
        next_state[s, 1] = 0
    for s, x, t in graph.edges:
        next_state[s, x] = t
        allowed[s, x] = True
    law = dmc.law()
    emission = np.broadcast_to(law, (n, *law.shape))
    return Fsc(
        next_state=next_state,
        emission=emission,
        initial_state=0,
        allowed=allowed,
        input_names=("0", "1"),
        output_names=dmc.output_names,
        name=f"{spec}-RLL {dmc}",
    )


def make_identity_channel(spec: RllSpec) -> Fsc:
    """The noiseless (d,k)-constrained channel, Y = X."""
    return make_rll_dmc(spec, DmcKind.bsc(0.0))


def rll_admissible(
    sequence: Sequence[int], spec: RllSpec, preceded_by_one: bool = True
) -> bool:
    """Whether a binary sequence obeys the (d,k)-RLL constraint.

    Every run of 0s (including an unterminated trailing run) has length at
    most k, and successive 1s are separated by at least d 0s. With
    ``preceded_by_one`` a virtual 1 precedes the sequence, matching the
    initial state 0 of the constrained channels.
    """
    run = 0
    seen_one = preceded_by_one
    for symbol in sequence:
        if symbol not in (0, 1):
            raise ValueError(f"not a binary symbol: {symbol!r}")
        if symbol == 0:
            run += 1
            if run > spec.k:
                return False
            continue
        if seen_one and run < spec.d:
            return False
        seen_one = True
        run = 0
    return True
