"""V-graphs: labelled directed graphs on auxiliary vertices tracking input history."""

from __future__ import annotations

from dataclasses import dataclass
import itertools

import networkx as nx
import numpy as np
from numpy.typing import NDArray

from fsc_bounds.channels.rll import RllSpec, constraint_graph

NO_EDGE = -1


def _frozen(arr: NDArray[np.int64]) -> NDArray[np.int64]:
    out = np.array(arr, dtype=np.int64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class VGraph:
    """A V-graph: vertex set with a partial transition table Φ(v, x).

    ``phi[v, x]`` is the successor vertex, or ``NO_EDGE`` when v has no
    outgoing edge labelled x. At most one edge per (v, x) holds by
    construction of the table.
    """

    phi: NDArray[np.int64]
    v0: int = 0
    vertex_names: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self) -> None:
        phi = np.asarray(self.phi, dtype=np.int64)
        if phi.ndim != 2 or phi.shape[0] < 1 or phi.shape[1] < 1:
            raise ValueError(f"phi must be a non-empty 2-D table, got {phi.shape}")
        bad = (phi != NO_EDGE) & ((phi < 0) | (phi >= phi.shape[0]))
        if bad.any():
            raise ValueError("phi contains successors that are not vertices")
        if not 0 <= self.v0 < phi.shape[0]:
            raise ValueError(f"v0={self.v0} is not a vertex")
        object.__setattr__(self, "phi", _frozen(phi))
        if not self.vertex_names:
            names = tuple(str(v) for v in range(phi.shape[0]))
            object.__setattr__(self, "vertex_names", names)

    @property
    def n_vertices(self) -> int:
        return int(self.phi.shape[0])

    @property
    def n_inputs(self) -> int:
        return int(self.phi.shape[1])

    def successor(self, v: int, x: int) -> int | None:
        t = int(self.phi[v, x])
        return None if t == NO_EDGE else t

    def digraph(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(range(self.n_vertices))
        for v in range(self.n_vertices):
            for x in range(self.n_inputs):
                t = self.successor(v, x)
                if t is not None:
                    graph.add_edge(v, t, key=x, x=x)
        return graph

    def is_irreducible(self) -> bool:
        return bool(nx.is_strongly_connected(self.digraph()))


def trivial_vgraph(n_inputs: int) -> VGraph:
    """One vertex with a self-loop for every input."""
    return VGraph(phi=np.zeros((1, n_inputs), dtype=np.int64), name="trivial")


def input_memory_vgraph(n_inputs: int, memory: int) -> VGraph:
    """De Bruijn graph whose vertex is the last ``memory`` channel inputs.

    Vertices are ordered lexicographically by their input tuples, oldest
    input first; v0 is the all-zeros history.
    """
    if memory < 1:
        raise ValueError(f"memory must be at least 1, got {memory}")
    histories = list(itertools.product(range(n_inputs), repeat=memory))
    index = {h: i for i, h in enumerate(histories)}
    phi = np.empty((len(histories), n_inputs), dtype=np.int64)
    for h, i in index.items():
        for x in range(n_inputs):
            phi[i, x] = index[(*h[1:], x)]
    names = tuple("".join(str(x) for x in h) for h in histories)
    return VGraph(phi=phi, v0=0, vertex_names=names, name=f"memory-{memory}")


def constraint_vgraph(spec: RllSpec) -> VGraph:
    """A copy of the (d,k)-RLL constraint graph used as a V-graph."""
    graph = constraint_graph(spec)
    phi = np.full((graph.n_vertices, 2), NO_EDGE, dtype=np.int64)
    for s, x, t in graph.edges:
        phi[s, x] = t
    return VGraph(phi=phi, v0=0, name=f"constraint{spec}")
