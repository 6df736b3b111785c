"""Single-letter lower bound I_Q(X; Y | S, V) over a V-graph.

The product (S,V)-graph has an edge (s, v) --(x, y)--> (f(s, x), phi(v, x))
for every input x allowed at s with phi(v, x) defined and P(y | x, s) > 0.
An input distribution Q(x | s, v) induces a Markov chain on the product
vertices whose transition law does not depend on y. The bound needs that
chain to have a single closed communicating class which is aperiodic; the
value is then the stationary average of I(X; Y | s, v).

Product vertices with no feasible input leading to another such vertex are
dead and carry no Q mass.
"""

from __future__ import annotations

from dataclasses import dataclass
import logging

import networkx as nx
import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from scipy.optimize import minimize
from scipy.special import softmax

from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.channels.vgraph import NO_EDGE, VGraph
from fsc_bounds.solver.reward import conditional_entropies
from fsc_bounds.solver.types import Policy, SolverOptions
from fsc_bounds.utils.exceptions import (
    InvalidPolicyError,
    NoFeasibleQError,
    NotConnectedError,
    NotSingleClassError,
    PeriodicChainError,
    VGraphConditionError,
)
from fsc_bounds.utils.info import entropy_bits

ROW_SUM_TOLERANCE = 1e-12
BALANCE_TOLERANCE = 1e-10

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ProductGraph:
    """The (S,V)-graph of a channel and a V-graph.

    Product vertex (s, v) has flat index ``s * |V| + v``.

    Attributes
    ----------
        graph: ``networkx.MultiDiGraph`` on (s, v) pairs; each edge carries
            its ``x`` and ``y`` labels.
        feasible: Mask of shape (|S|, |V|, |X|) of inputs Q may use.
        live: Mask of shape (|S|, |V|) of vertices with a feasible input.

    """

    fsc: Fsc
    vgraph: VGraph
    graph: nx.MultiDiGraph
    feasible: NDArray[np.bool_]
    live: NDArray[np.bool_]

    @property
    def shape(self) -> tuple[int, int]:
        return self.fsc.n_states, self.vgraph.n_vertices

    @property
    def n_vertices(self) -> int:
        return self.fsc.n_states * self.vgraph.n_vertices

    def index(self, s: int, v: int) -> int:
        return s * self.vgraph.n_vertices + v

    def pair(self, i: int) -> tuple[int, int]:
        return divmod(i, self.vgraph.n_vertices)

    def successor(self, s: int, v: int, x: int) -> tuple[int, int] | None:
        t = self.vgraph.successor(v, x)
        if t is None or not self.fsc.is_allowed(s, x):
            return None
        return self.fsc.step(s, x), t


@dataclass(frozen=True, eq=False)
class QDist:
    """Input distribution Q(x | s, v) on a product graph.

    ``in_class_q`` and ``aperiodic`` are filled in once the distribution has
    been classified.
    """

    q: NDArray[np.float64]
    in_class_q: bool | None = None
    aperiodic: bool | None = None

    def __post_init__(self) -> None:
        q = np.array(self.q, dtype=np.float64, copy=True)
        if q.ndim != 3:
            raise InvalidPolicyError(f"Q must have shape (S, V, X), got {q.shape}")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)


@dataclass(frozen=True)
class Classification:
    """Closed-class structure of the chain a Q induces on live vertices."""

    single_class: bool
    aperiodic: bool
    class_members: frozenset[tuple[int, int]]
    closed_classes: tuple[frozenset[tuple[int, int]], ...]

    def start_vertex(self, s0: int) -> int | None:
        """Smallest v with (s0, v) in the closed class, if any."""
        vs = sorted(v for s, v in self.class_members if s == s0)
        return vs[0] if vs else None


@dataclass(frozen=True, eq=False)
class StationaryDist:
    """pi(s, v), the joint law pi Q W of shape (S, V, X, Y), and ||pi M - pi||."""

    pi: NDArray[np.float64]
    joint: NDArray[np.float64]
    balance_residual: float


@dataclass(frozen=True, eq=False)
class VGraphBundle:
    """A V-graph with its product graph, a Q, the stationary law and the bound."""

    vgraph: VGraph
    product: ProductGraph
    q: QDist
    stationary: StationaryDist
    value: float
    start_vertex: int | None


def _live_vertices(
    fsc: Fsc, vg: VGraph
) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
    n_s, n_v, n_x = fsc.n_states, vg.n_vertices, fsc.n_inputs
    has_edge = fsc.allowed_mask[:, None, :] & (vg.phi[None, :, :] != NO_EDGE)
    next_s = np.broadcast_to(fsc.next_state[:, None, :], (n_s, n_v, n_x))
    phi = np.where(vg.phi == NO_EDGE, 0, vg.phi)
    next_v = np.broadcast_to(phi[None], (n_s, n_v, n_x))
    live = np.ones((n_s, n_v), dtype=bool)
    while True:
        feasible = has_edge & live[next_s, next_v] & live[:, :, None]
        updated = feasible.any(axis=2)
        if np.array_equal(updated, live):
            return live, feasible
        live = updated


def build_product(fsc: Fsc, vg: VGraph) -> ProductGraph:
    """Construct the (S,V)-graph with its live-vertex pruning."""
    if vg.n_inputs != fsc.n_inputs:
        raise ValueError(
            f"V-graph has {vg.n_inputs} input labels, channel has {fsc.n_inputs}"
        )
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(
        (s, v) for s in range(fsc.n_states) for v in range(vg.n_vertices)
    )
    for s in range(fsc.n_states):
        for v in range(vg.n_vertices):
            for x in fsc.allowed_inputs(s):
                t = vg.successor(v, x)
                if t is None:
                    continue
                target = (fsc.step(s, x), t)
                for y in np.flatnonzero(fsc.emission[s, x] > 0.0):
                    graph.add_edge((s, v), target, key=(x, int(y)), x=x, y=int(y))
    live, feasible = _live_vertices(fsc, vg)
    return ProductGraph(fsc, vg, graph, feasible, live)


def check_connected(fsc: Fsc) -> bool:
    """Whether every state reaches every state under allowed inputs."""
    return bool(nx.is_strongly_connected(fsc.state_graph()))


def _uniform(pg: ProductGraph) -> QDist:
    counts = pg.feasible.sum(axis=2, keepdims=True)
    q = np.where(pg.feasible, 1.0 / np.maximum(counts, 1), 0.0)
    return QDist(q)


def uniform_q(fsc: Fsc, vg: VGraph) -> QDist:
    """Uniform Q over the feasible inputs of every live product vertex."""
    return _uniform(build_product(fsc, vg))


def q_from_policy(fsc: Fsc, vg: VGraph, policy: Policy) -> QDist:
    """Lift a channel policy to Q(x | s, v) = P(x | s) on the feasible inputs.

    Rows are renormalized over the feasible inputs of each live vertex; a
    vertex where the policy puts no mass on a feasible input gets the
    uniform row.
    """
    policy.check(fsc)
    pg = build_product(fsc, vg)
    q = np.where(pg.feasible, policy.rows[:, None, :], 0.0)
    mass = q.sum(axis=2, keepdims=True)
    fallback = _uniform(pg).q
    q = np.where(mass > 0.0, q / np.where(mass > 0.0, mass, 1.0), fallback)
    return QDist(q)


def _check_q(pg: ProductGraph, q: QDist) -> None:
    n_s, n_v = pg.shape
    if q.q.shape != (n_s, n_v, pg.fsc.n_inputs):
        raise InvalidPolicyError(
            f"Q has shape {q.q.shape}, expected ({n_s}, {n_v}, {pg.fsc.n_inputs})"
        )
    if np.any(q.q < 0.0) or not np.all(np.isfinite(q.q)):
        raise InvalidPolicyError("Q has negative or non-finite entries")
    if np.any(np.where(pg.feasible, 0.0, q.q) > 0.0):
        raise InvalidPolicyError("Q puts mass on an infeasible input")
    sums = q.q.sum(axis=2)
    if np.any(np.abs(sums[pg.live] - 1.0) > ROW_SUM_TOLERANCE):
        raise InvalidPolicyError("Q rows of live vertices must sum to 1")


def transition_matrix(pg: ProductGraph, q: QDist) -> NDArray[np.float64]:
    """M[(s,v), (s',v')] = sum_x Q(x | s, v) over edges into (s', v')."""
    n_s, n_v = pg.shape
    m = np.zeros((pg.n_vertices, pg.n_vertices))
    for s, v, x in np.argwhere(pg.feasible):
        successor = pg.successor(int(s), int(v), int(x))
        assert successor is not None, "feasible inputs always have a successor"
        m[pg.index(int(s), int(v)), pg.index(*successor)] += q.q[s, v, x]
    return m


def classify(pg: ProductGraph, q: QDist) -> Classification:
    """Closed classes and periodicity of the Q-induced chain on live vertices."""
    _check_q(pg, q)
    m = transition_matrix(pg, q)
    graph = nx.DiGraph()
    graph.add_nodes_from(pg.pair(int(i)) for i in np.flatnonzero(pg.live.ravel()))
    graph.add_edges_from(
        (pg.pair(int(i)), pg.pair(int(j)))
        for i, j in zip(*np.nonzero(m > 0.0), strict=True)
    )
    condensed = nx.condensation(graph)
    closed = tuple(
        frozenset(condensed.nodes[c]["members"])
        for c in sorted(condensed.nodes)
        if condensed.out_degree(c) == 0
    )
    aperiodic = bool(closed) and all(
        nx.is_aperiodic(graph.subgraph(members)) for members in closed
    )
    return Classification(
        single_class=len(closed) == 1,
        aperiodic=aperiodic,
        class_members=closed[0] if len(closed) == 1 else frozenset(),
        closed_classes=closed,
    )


def _stationary_on(
    m: NDArray[np.float64], members: NDArray[np.int64]
) -> NDArray[np.float64]:
    sub = m[np.ix_(members, members)]
    n = members.size
    system = sub.T - np.eye(n)
    system[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.zeros(m.shape[0])
    pi[members] = np.clip(linalg.solve(system, rhs), 0.0, None)
    return pi / pi.sum()


def stationary(pg: ProductGraph, q: QDist) -> StationaryDist:
    """The unique stationary law of the Q-induced chain.

    Raises
    ------
        NotSingleClassError: If the chain has more than one closed class.
        PeriodicChainError: If the closed class is periodic.

    """
    cls = classify(pg, q)
    if not cls.single_class:
        raise NotSingleClassError(
            f"Q induces {len(cls.closed_classes)} closed classes on the product graph"
        )
    if not cls.aperiodic:
        raise PeriodicChainError("the closed class of the Q-induced chain is periodic")
    m = transition_matrix(pg, q)
    members = np.array(sorted(pg.index(s, v) for s, v in cls.class_members))
    pi = _stationary_on(m, members)
    residual = float(np.max(np.abs(pi @ m - pi)))
    if residual > BALANCE_TOLERANCE:
        logger.warning(f"stationary balance residual {residual:.3e}")
    n_s, n_v = pg.shape
    pi_sv = pi.reshape(n_s, n_v)
    joint = (
        pi_sv[:, :, None, None]
        * q.q[:, :, :, None]
        * pg.fsc.emission[:, None, :, :]
    )
    return StationaryDist(pi=pi_sv, joint=joint, balance_residual=residual)


def joint_law(fsc: Fsc, vg: VGraph, q: QDist) -> NDArray[np.float64]:
    """P(s, v, x, y) = pi(s, v) Q(x | s, v) P(y | x, s)."""
    return stationary(build_product(fsc, vg), q).joint


def _vertex_information(
    pg: ProductGraph, q: NDArray[np.float64]
) -> NDArray[np.float64]:
    """I(X; Y | s, v) for every product vertex."""
    outputs = np.einsum("svx,sxy->svy", q, pg.fsc.emission)
    noise = np.einsum("svx,sx->sv", q, conditional_entropies(pg.fsc))
    return np.asarray(entropy_bits(outputs, axis=-1) - noise, dtype=np.float64)


def _require_preconditions(fsc: Fsc, vg: VGraph) -> None:
    if not check_connected(fsc):
        raise NotConnectedError(
            f"{fsc.name or 'channel'}: state graph is not strongly connected"
        )
    if not vg.is_irreducible():
        raise VGraphConditionError(f"V-graph {vg.name or ''} is not irreducible")


def evaluate_bundle(fsc: Fsc, vg: VGraph, q: QDist | ArrayLike) -> VGraphBundle:
    """Check every precondition and evaluate the bound for a fixed Q."""
    _require_preconditions(fsc, vg)
    qd = q if isinstance(q, QDist) else QDist(np.asarray(q))
    pg = build_product(fsc, vg)
    cls = classify(pg, qd)
    st = stationary(pg, qd)
    value = float(np.sum(st.pi * _vertex_information(pg, qd.q)))
    start = cls.start_vertex(fsc.initial_state)
    if start is None:
        logger.warning(
            f"no vertex pairs with s0={fsc.initial_state} in the closed class"
        )
    flagged = QDist(qd.q, in_class_q=cls.single_class, aperiodic=cls.aperiodic)
    return VGraphBundle(vg, pg, flagged, st, value, start)


def single_letter_bound(fsc: Fsc, vg: VGraph, q: QDist | ArrayLike) -> float:
    """I_Q(X; Y | S, V) in bits per symbol.

    Raises
    ------
        NotConnectedError: If the channel state graph is not strongly connected.
        NotSingleClassError: If Q induces several closed classes.
        PeriodicChainError: If the closed class is periodic.

    """
    return evaluate_bundle(fsc, vg, q).value


class _QSearch:
    """Softmax parameterization of Q over the free rows of a product graph."""

    def __init__(self, pg: ProductGraph, members: NDArray[np.int64]) -> None:
        self.pg = pg
        self.members = members
        self.base = _uniform(pg).q.copy()
        self.free = [
            (int(s), int(v), np.flatnonzero(pg.feasible[s, v]))
            for s, v in np.argwhere(pg.live)
            if pg.feasible[s, v].sum() >= 2
        ]
        self.n_params = sum(len(xs) - 1 for _, _, xs in self.free)

    def assemble(self, z: NDArray[np.float64]) -> NDArray[np.float64]:
        q = self.base.copy()
        offset = 0
        for s, v, xs in self.free:
            width = len(xs) - 1
            q[s, v, :] = 0.0
            q[s, v, xs] = softmax(np.append(z[offset : offset + width], 0.0))
            offset += width
        return q

    def value(self, z: NDArray[np.float64]) -> float:
        q = self.assemble(z)
        m = transition_matrix(self.pg, QDist(q))
        pi = _stationary_on(m, self.members)
        info = _vertex_information(self.pg, q).ravel()
        return float(pi @ info)


def optimize_q(
    fsc: Fsc, vg: VGraph, opts: SolverOptions | None = None
) -> tuple[QDist, float]:
    """Search for the Q maximizing the single-letter bound.

    Strictly positive Q on the feasible inputs all induce the same closed
    class, so the search runs over softmax logits from the uniform start and
    ``opts.q_restarts`` seeded random starts.

    Raises
    ------
        NotConnectedError: If the channel state graph is not strongly connected.
        NoFeasibleQError: If no Q induces a single aperiodic closed class.

    """
    opts = opts or SolverOptions()
    _require_preconditions(fsc, vg)
    pg = build_product(fsc, vg)
    if not pg.live.any():
        raise NoFeasibleQError("no product vertex has a feasible input")
    uniform = _uniform(pg)
    cls = classify(pg, uniform)
    if not (cls.single_class and cls.aperiodic):
        raise NoFeasibleQError(
            f"V-graph {vg.name or ''}: no Q induces a single aperiodic closed class "
            f"({len(cls.closed_classes)} closed classes under full support)"
        )
    members = np.array(sorted(pg.index(s, v) for s, v in cls.class_members))
    search = _QSearch(pg, members)

    best_z = np.zeros(search.n_params)
    best_v = search.value(best_z)
    if search.n_params:
        rng = np.random.default_rng(opts.seed)
        starts = [best_z] + [
            rng.normal(size=search.n_params) for _ in range(opts.q_restarts)
        ]
        for z0 in starts:
            result = minimize(
                lambda z: -search.value(z),
                z0,
                method="Nelder-Mead",
                options={
                    "xatol": 1e-10,
                    "fatol": 1e-15,
                    "maxiter": 2000 * search.n_params,
                },
            )
            if -float(result.fun) > best_v:
                best_z, best_v = np.asarray(result.x), -float(result.fun)
    logger.debug(f"optimize_q {vg.name or 'vgraph'}: {best_v:.12f}")
    q = QDist(search.assemble(best_z), in_class_q=True, aperiodic=True)
    return q, best_v
