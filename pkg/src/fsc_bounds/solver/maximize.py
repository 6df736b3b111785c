"""Inner maximization of the Bellman operator.

For every state s the maximizer solves

    max over rows q on the allowed inputs of  H(q W[s]) + sum_x q(x) b_s(x),
    b_s(x) = h(f(s, x)) - H(W[s, x]),

which is the per-step reward plus the expected relative value of the next
state. States with a single allowed input have a fixed row. States with two
allowed inputs are one scalar ``a`` (mass on the larger input): a coarse grid
followed by golden-section search on the bracket around the best grid point,
vectorized across states. Larger rows use a simplex lattice and Nelder-Mead
on softmax logits.
"""

from __future__ import annotations

from collections.abc import Callable
from functools import cache
import itertools
import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize
from scipy.special import softmax

from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.solver.reward import conditional_entropies
from fsc_bounds.solver.types import SolverOptions
from fsc_bounds.utils.info import entropy_bits

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
LATTICE_CAP = 4096
LATTICE_MAX_RESOLUTION = 32
LOGIT_FLOOR = 1e-12


def golden_section_max(
    f: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    lo: ArrayLike,
    hi: ArrayLike,
    tol: float,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Vectorized golden-section search for the maxima of unimodal functions.

    ``f`` maps an array of points to an array of values elementwise, one
    independent problem per element. Returns (argmax, max).
    """
    lo = np.array(lo, dtype=np.float64, copy=True)
    hi = np.array(hi, dtype=np.float64, copy=True)
    width = float(np.max(hi - lo)) if lo.size else 0.0
    if width > tol:
        c = hi - INV_PHI * (hi - lo)
        d = lo + INV_PHI * (hi - lo)
        fc, fd = f(c), f(d)
        steps = math.ceil(math.log(tol / width) / math.log(INV_PHI))
        for _ in range(steps):
            left = fc > fd
            hi = np.where(left, d, hi)
            lo = np.where(left, lo, c)
            probe = np.where(left, hi - INV_PHI * (hi - lo), lo + INV_PHI * (hi - lo))
            fp = f(probe)
            c, fc, d, fd = (
                np.where(left, probe, d),
                np.where(left, fp, fd),
                np.where(left, c, probe),
                np.where(left, fc, fp),
            )
    x = 0.5 * (lo + hi)
    return x, f(x)


@cache
def simplex_lattice(m: int) -> NDArray[np.float64]:
    """Points of {q >= 0, sum q = 1} with coordinates in multiples of 1/n.

    n is the finest resolution (at most 32) keeping the lattice within 4096
    points. Rows come in ascending lexicographic order.
    """
    n = 1
    while (
        n < LATTICE_MAX_RESOLUTION and math.comb(n + m, m - 1) <= LATTICE_CAP
    ):
        n += 1
    points = []
    for bars in itertools.combinations(range(n + m - 1), m - 1):
        edges = (-1, *bars, n + m - 1)
        points.append([edges[i + 1] - edges[i] - 1 for i in range(m)])
    lattice = np.asarray(points, dtype=np.float64) / n
    lattice.setflags(write=False)
    return lattice


def _logits(q: NDArray[np.float64]) -> NDArray[np.float64]:
    """Logits (last one pinned at 0) whose softmax approximates ``q``."""
    clipped = np.maximum(q, LOGIT_FLOOR)
    return np.asarray(np.log(clipped[:-1] / clipped[-1]), dtype=np.float64)


def _from_logits(z: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.asarray(softmax(np.append(z, 0.0)), dtype=np.float64)


class InnerMaximizer:
    """Evaluates the Bellman operator (Th)(s) and its maximizing rows."""

    def __init__(self, fsc: Fsc, opts: SolverOptions) -> None:
        self.logger = logging.getLogger("fsc_bounds.InnerMaximizer")
        self.fsc = fsc
        self.opts = opts
        self._cond = conditional_entropies(fsc)
        self._grid = np.linspace(0.0, 1.0, opts.grid_points)

        single: list[tuple[int, int]] = []
        binary: list[tuple[int, int, int]] = []
        self._multi: list[tuple[int, tuple[int, ...]]] = []
        for s in range(fsc.n_states):
            allowed = fsc.allowed_inputs(s)
            if len(allowed) == 1:
                single.append((s, allowed[0]))
            elif len(allowed) == 2:
                binary.append((s, allowed[0], allowed[1]))
            elif allowed:
                self._multi.append((s, allowed))
        self._single = np.asarray(single, dtype=np.int64).reshape(-1, 2)
        self._binary = np.asarray(binary, dtype=np.int64).reshape(-1, 3)

        sb, x0, x1 = self._binary.T
        self._w0 = fsc.emission[sb, x0]
        self._dw = fsc.emission[sb, x1] - self._w0
        self.logger.debug(
            f"{fsc.name or 'fsc'}: {len(single)} fixed, {len(binary)} binary, "
            f"{len(self._multi)} simplex rows"
        )

    def evaluate(
        self, h: NDArray[np.float64]
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Return ((Th)(s) for all s, maximizing rows of shape (|S|, |X|))."""
        fsc = self.fsc
        values = np.full(fsc.n_states, -np.inf)
        rows = np.zeros((fsc.n_states, fsc.n_inputs))

        if self._single.size:
            s, x = self._single.T
            rows[s, x] = 1.0
            values[s] = h[fsc.next_state[s, x]]

        if self._binary.size:
            self._evaluate_binary(h, values, rows)

        for s, allowed in self._multi:
            values[s], rows[s, list(allowed)] = self._maximize_simplex(h, s, allowed)
        return values, rows

    def _evaluate_binary(
        self,
        h: NDArray[np.float64],
        values: NDArray[np.float64],
        rows: NDArray[np.float64],
    ) -> None:
        sb, x0, x1 = self._binary.T
        b0 = h[self.fsc.next_state[sb, x0]] - self._cond[sb, x0]
        slope = h[self.fsc.next_state[sb, x1]] - self._cond[sb, x1] - b0
        w0, dw = self._w0, self._dw

        def objective(a: NDArray[np.float64]) -> NDArray[np.float64]:
            # a has shape (n,) or (n, G); one row of a per binary state
            shape = a.shape
            flat = a.reshape(len(sb), -1)
            dist = w0[:, None, :] + flat[:, :, None] * dw[:, None, :]
            out = entropy_bits(dist, axis=-1) + b0[:, None] + flat * slope[:, None]
            return out.reshape(shape)

        grid = np.broadcast_to(self._grid, (len(sb), self._grid.size))
        scan = objective(np.array(grid))
        best = np.argmax(scan, axis=1)
        a_grid = self._grid[best]
        v_grid = scan[np.arange(len(sb)), best]
        last = self._grid.size - 1
        lo = self._grid[np.maximum(best - 1, 0)]
        hi = self._grid[np.minimum(best + 1, last)]
        a_gold, v_gold = golden_section_max(
            objective, lo, hi, self.opts.golden_tolerance
        )

        better = v_gold > v_grid
        a = np.where(better, a_gold, a_grid)
        values[sb] = np.where(better, v_gold, v_grid)
        rows[sb, x0] = 1.0 - a
        rows[sb, x1] = a

    def _maximize_simplex(
        self, h: NDArray[np.float64], s: int, allowed: tuple[int, ...]
    ) -> tuple[float, NDArray[np.float64]]:
        idx = list(allowed)
        ws = self.fsc.emission[s, idx]
        b = h[self.fsc.next_state[s, idx]] - self._cond[s, idx]

        def value(q: NDArray[np.float64]) -> NDArray[np.float64]:
            return np.asarray(entropy_bits(q @ ws, axis=-1) + q @ b)

        lattice = simplex_lattice(len(idx))
        scan = value(lattice)
        i = int(np.argmax(scan))
        best_q, best_v = lattice[i], float(scan[i])

        rng = np.random.default_rng([self.opts.seed, s])
        starts = [_logits(best_q)] + [
            rng.normal(scale=2.0, size=len(idx) - 1)
            for _ in range(self.opts.restarts - 1)
        ]
        for z0 in starts:
            result = minimize(
                lambda z: -float(value(_from_logits(z))),
                z0,
                method="Nelder-Mead",
                options={"xatol": 1e-10, "fatol": 1e-15, "maxiter": 400 * len(idx)},
            )
            v = -float(result.fun)
            if v > best_v:
                best_q, best_v = _from_logits(result.x), v
        return best_v, best_q
