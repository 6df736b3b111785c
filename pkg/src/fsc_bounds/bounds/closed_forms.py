"""Closed-form capacity lower bounds for (d,k)-RLL constrained BSC and BEC.

(d, inf), BSC(p):   max_a (h_b(a p + (1-a)(1-p)) - h_b(p)) / (a d + 1)
(d, k),   BSC(p):   max over a_d..a_{k-1} of a renewal-reward ratio, where
                    a_i = P(send 1 | run of i zeros)
BEC(eps):           C_{d,k} (1 - eps)
noiseless:          C_{d,inf} = max_a h_b(a) / (a d + 1); C_{d,k} via the DP
                    on the identity channel.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass
from enum import Enum
import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import minimize

from fsc_bounds.channels.rll import (
    DmcKind,
    RllSpec,
    make_identity_channel,
    make_rll_dmc,
)
from fsc_bounds.solver.maximize import golden_section_max
from fsc_bounds.solver.rvi import solve_average_reward
from fsc_bounds.solver.types import SolverOptions
from fsc_bounds.utils.info import binary_entropy, hb

SCAN_POINTS = 256
PARAM_SLACK = 1e-12

logger = logging.getLogger(__name__)


class BoundFamily(Enum):
    BSC_DINF = "bsc_dinf"
    BSC_DK = "bsc_dk"
    BEC_DINF = "bec_dinf"
    BEC_DK = "bec_dk"
    NOISELESS = "noiseless"


@dataclass(frozen=True)
class ClosedFormParams:
    """Maximizing parameters: ``a`` for (d, inf), ``a_vec`` for finite k."""

    a: float | None = None
    a_vec: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        for value in self.values():
            if not -PARAM_SLACK <= value <= 1.0 + PARAM_SLACK:
                raise ValueError(f"parameter {value!r} is outside [0, 1]")

    def values(self) -> tuple[float, ...]:
        return (self.a,) if self.a is not None else self.a_vec


@dataclass(frozen=True)
class BoundResult:
    """A lower bound in bits per symbol and where it was attained."""

    family: BoundFamily
    value: float
    argmax: ClosedFormParams
    method: str
    residual: float = 0.0


def _check_probability(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0,1], got {value!r}")
    return value


def _clip_bits(value: float) -> float:
    return float(np.clip(value, 0.0, 1.0))


def maximize_on_unit_interval(
    f: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    tol: float = 1e-10,
    points: int = SCAN_POINTS,
) -> tuple[float, float]:
    """Global max of a 1-D function on [0, 1]: scan, then golden section.

    Ties resolve to the smallest argument.
    """
    grid = np.linspace(0.0, 1.0, points)
    scan = f(grid)
    i = int(np.argmax(scan))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, points - 1)]
    a, v = golden_section_max(f, np.array([lo]), np.array([hi]), tol)
    if float(v[0]) > float(scan[i]):
        return float(a[0]), float(v[0])
    return float(grid[i]), float(scan[i])


def bsc_dinf_objective(a: ArrayLike, d: int, p: float) -> NDArray[np.float64]:
    """(h_b(a p + (1-a)(1-p)) - h_b(p)) / (a d + 1), vectorized in ``a``."""
    arr = np.asarray(a, dtype=np.float64)
    crossover = arr * p + (1.0 - arr) * (1.0 - p)
    return np.asarray((binary_entropy(crossover) - hb(p)) / (arr * d + 1.0))


def bsc_dk_objective(a_vec: Sequence[float], d: int, k: int, p: float) -> float:
    """The (d, k) renewal-reward ratio at ``a_vec = (a_d, ..., a_{k-1})``.

    Numerator: sum_i (h_b(a_i p + (1-a_i)(1-p)) - h_b(p)) prod_{j<i} (1-a_j).
    Denominator: d + 1 + sum_i prod_{j<=i} (1-a_j). Empty products are 1.
    """
    a = np.asarray(a_vec, dtype=np.float64)
    if a.shape != (k - d,):
        raise ValueError(f"a_vec must have {k - d} entries, got {a.shape}")
    survive = np.cumprod(1.0 - a)
    reach = np.concatenate(([1.0], survive[:-1]))
    gains = binary_entropy(a * p + (1.0 - a) * (1.0 - p)) - hb(p)
    return float(np.dot(gains, reach) / (d + 1.0 + survive.sum()))


def bsc_dinf_bound(d: int, p: float, opts: SolverOptions | None = None) -> BoundResult:
    """Maximize the (d, inf) BSC objective over a in [0, 1]."""
    if d < 0:
        raise ValueError(f"d must be nonnegative, got {d}")
    p = _check_probability("p", p)
    tol = (opts or SolverOptions()).golden_tolerance
    a, value = maximize_on_unit_interval(lambda x: bsc_dinf_objective(x, d, p), tol)
    return BoundResult(
        BoundFamily.BSC_DINF,
        _clip_bits(value),
        ClosedFormParams(a=a),
        method="golden",
    )


def bsc_dk_bound(
    d: int, k: int, p: float, opts: SolverOptions | None = None
) -> BoundResult:
    """The (d, k) BSC bound, evaluated by the DP on the constrained channel.

    The maximizing ``a_vec`` is read off the optimal policy at states
    d..k-1.
    """
    spec = RllSpec(d, k)
    if spec.is_infinite:
        raise ValueError("bsc_dk_bound needs a finite k; use bsc_dinf_bound")
    p = _check_probability("p", p)
    fsc = make_rll_dmc(spec, DmcKind.bsc(p))
    solution = solve_average_reward(fsc, opts)
    a_vec = solution.policy.binary_params(fsc)
    return BoundResult(
        BoundFamily.BSC_DK,
        _clip_bits(solution.rho),
        ClosedFormParams(a_vec=tuple(float(np.clip(a, 0.0, 1.0)) for a in a_vec)),
        method="dp",
        residual=solution.bellman_residual,
    )


def bsc_dk_ratio_search(
    d: int, k: int, p: float, opts: SolverOptions | None = None
) -> BoundResult:
    """Maximize the (d, k) ratio directly with bounded multi-start Nelder-Mead.

    The starts are the constant vector 1/2 and ``opts.restarts - 1`` seeded
    uniform points of [0, 1]^(k-d).
    """
    spec = RllSpec(d, k)
    if spec.is_infinite:
        raise ValueError("bsc_dk_ratio_search needs a finite k")
    p = _check_probability("p", p)
    opts = opts or SolverOptions()
    n = k - d
    rng = np.random.default_rng(opts.seed)
    starts = [np.full(n, 0.5)] + [rng.uniform(size=n) for _ in range(opts.restarts - 1)]

    best_a, best_v = starts[0], bsc_dk_objective(starts[0], d, k, p)
    for x0 in starts:
        result = minimize(
            lambda a: -bsc_dk_objective(a, d, k, p),
            x0,
            method="Nelder-Mead",
            bounds=[(0.0, 1.0)] * n,
            options={"xatol": 1e-11, "fatol": 1e-15, "maxiter": 4000 * n},
        )
        if -float(result.fun) > best_v:
            best_a, best_v = np.clip(result.x, 0.0, 1.0), -float(result.fun)
    logger.debug(f"ratio search ({d},{k}) p={p}: {best_v:.12f}")
    return BoundResult(
        BoundFamily.BSC_DK,
        _clip_bits(best_v),
        ClosedFormParams(a_vec=tuple(float(a) for a in best_a)),
        method="ratio",
    )


def noiseless_capacity(
    spec: RllSpec, opts: SolverOptions | None = None
) -> BoundResult:
    """C_{d,k} in bits per symbol."""
    if spec.is_infinite:
        tol = (opts or SolverOptions()).golden_tolerance
        d = spec.d
        a, value = maximize_on_unit_interval(
            lambda x: binary_entropy(x) / (x * d + 1.0), tol
        )
        return BoundResult(
            BoundFamily.NOISELESS, _clip_bits(value), ClosedFormParams(a=a), "golden"
        )
    fsc = make_identity_channel(spec)
    solution = solve_average_reward(fsc, opts)
    return BoundResult(
        BoundFamily.NOISELESS,
        _clip_bits(solution.rho),
        ClosedFormParams(a_vec=solution.policy.binary_params(fsc)),
        method="dp",
        residual=solution.bellman_residual,
    )


def bec_bound(
    spec: RllSpec, eps: float, opts: SolverOptions | None = None
) -> BoundResult:
    """C_{d,k} (1 - eps) for the (d,k)-RLL constrained BEC(eps)."""
    eps = _check_probability("eps", eps)
    base = noiseless_capacity(spec, opts)
    family = BoundFamily.BEC_DINF if spec.is_infinite else BoundFamily.BEC_DK
    return BoundResult(
        family,
        _clip_bits(base.value * (1.0 - eps)),
        base.argmax,
        method=base.method,
        residual=base.residual,
    )


def analytic_dinf_solution(d: int, p: float) -> tuple[float, NDArray[np.float64]]:
    """The (rho, h) pair solving the (d, inf) BSC Bellman equation.

    rho is the closed-form bound and h(i) = i rho on states 0..d.
    """
    rho = bsc_dinf_bound(d, p).value
    return rho, np.arange(d + 1, dtype=np.float64) * rho
