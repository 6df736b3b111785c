"""Noiseless constraint capacity from the Perron eigenvalue, and the Parry chain."""

from __future__ import annotations

import logging
import math

import numpy as np
from numpy.typing import NDArray

from fsc_bounds.channels.rll import ConstraintGraph
from fsc_bounds.solver.types import Policy
from fsc_bounds.utils.exceptions import ReducibleGraphError

RELATIVE_TOLERANCE = 1e-12
MAX_POWER_STEPS = 100_000

logger = logging.getLogger(__name__)


def perron_pair(
    adjacency: NDArray[np.int64] | NDArray[np.float64],
    rtol: float = RELATIVE_TOLERANCE,
) -> tuple[float, NDArray[np.float64]]:
    """Perron eigenvalue and right eigenvector of an irreducible matrix.

    Power iteration runs on A + I, which is primitive whenever A is
    irreducible; the Collatz-Wielandt bounds min(Bv/v) and max(Bv/v) bracket
    the eigenvalue and stop the iteration once they agree to ``rtol``.
    """
    b = np.asarray(adjacency, dtype=np.float64) + np.eye(len(adjacency))
    v = np.ones(len(b))
    lo, hi = 0.0, math.inf
    for _ in range(MAX_POWER_STEPS):
        w = b @ v
        ratios = w / v
        lo, hi = float(ratios.min()), float(ratios.max())
        v = w / np.linalg.norm(w)
        if hi - lo <= rtol * hi:
            break
    else:
        logger.warning(f"power iteration stopped with bracket [{lo}, {hi}]")
    return 0.5 * (lo + hi) - 1.0, v / v.sum()


def spectral_noiseless_capacity(graph: ConstraintGraph) -> float:
    """log2 of the Perron eigenvalue of the constraint graph's adjacency matrix.

    Raises
    ------
        ReducibleGraphError: If the graph is not irreducible.

    """
    if not graph.is_irreducible():
        raise ReducibleGraphError(f"constraint graph {graph.spec} is not irreducible")
    eigenvalue, _ = perron_pair(graph.adjacency)
    return math.log2(eigenvalue)


def maxentropic_chain(graph: ConstraintGraph) -> Policy:
    """The maxentropic (Parry) Markov chain on a constraint graph.

    P(u -> v) = A[u, v] r_v / (lambda r_u) with r the right Perron vector.
    The result is a policy on the constrained channel built from the same
    spec: row u gives the probability of each edge label leaving u.
    """
    if not graph.is_irreducible():
        raise ReducibleGraphError(f"constraint graph {graph.spec} is not irreducible")
    eigenvalue, r = perron_pair(graph.adjacency)
    n_labels = 1 + max(x for _, x, _ in graph.edges)
    rows = np.zeros((graph.n_vertices, max(n_labels, 2)))
    for u, x, v in graph.edges:
        rows[u, x] = r[v] / (eigenvalue * r[u])
    rows /= rows.sum(axis=1, keepdims=True)
    return Policy(rows)
