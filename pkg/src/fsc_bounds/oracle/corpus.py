"""Seeded corpus of small random channels for the conservation checks."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import itertools
import logging

import numpy as np
from numpy.typing import NDArray

from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.oracle.enumeration import (
    CONSERVATION_TOLERANCE,
    SequenceStats,
    exact_sequence_stats,
)

CORPUS_SEEDS: tuple[int, ...] = (
    3, 7, 11, 19, 23, 42, 57, 64, 99, 101,
    128, 256, 314, 512, 777, 1009, 2024, 4096, 8191, 65537,
)  # fmt: skip
MAX_CORPUS_STATES = 3
MAX_CORPUS_HORIZON = 5

logger = logging.getLogger(__name__)


def random_channel(
    rng: np.random.Generator, n_states: int, n_inputs: int = 2, n_outputs: int = 2
) -> Fsc:
    """Dirichlet(1, ..., 1) emission rows and a uniform random state update."""
    emission = rng.dirichlet(np.ones(n_outputs), size=(n_states, n_inputs))
    next_state = rng.integers(0, n_states, size=(n_states, n_inputs))
    return Fsc(next_state=next_state, emission=emission, name="random")


class TabularInputLaw:
    """A history-dependent input law with one Dirichlet row per history."""

    def __init__(self, rows: dict[tuple[int, ...], NDArray[np.float64]]) -> None:
        self.rows = rows

    def __call__(self, history: tuple[int, ...]) -> NDArray[np.float64]:
        return self.rows[tuple(history)]


def random_input_law(
    rng: np.random.Generator, n_inputs: int, horizon: int
) -> TabularInputLaw:
    """Independent uniform-Dirichlet rows for each history shorter than ``horizon``."""
    rows = {
        history: rng.dirichlet(np.ones(n_inputs))
        for t in range(horizon)
        for history in itertools.product(range(n_inputs), repeat=t)
    }
    return TabularInputLaw(rows)


@dataclass(frozen=True)
class ConservationCheck:
    """One corpus case: its stats and which of the three relations hold."""

    seed: int
    n_states: int
    horizon: int
    stats: SequenceStats
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def run_case(
    seed: int, horizon: int | None = None, tol: float = CONSERVATION_TOLERANCE
) -> ConservationCheck:
    rng = np.random.default_rng(seed)
    n_states = int(rng.integers(1, MAX_CORPUS_STATES + 1))
    n = horizon or int(rng.integers(1, MAX_CORPUS_HORIZON + 1))
    fsc = random_channel(rng, n_states)
    law = random_input_law(rng, fsc.n_inputs, n)
    stats = exact_sequence_stats(fsc, law, n)
    failures = tuple(stats.violations(tol))
    if failures:
        logger.error(f"corpus seed {seed}: {'; '.join(failures)}")
    return ConservationCheck(seed, n_states, n, stats, failures)


def conservation_suite(
    seeds: tuple[int, ...] = CORPUS_SEEDS,
    horizon: int | None = None,
    workers: int = 1,
) -> list[ConservationCheck]:
    """Check the conservation law and both inequalities on every corpus case.

    Results come back in seed order whatever ``workers`` is.
    """
    if workers <= 1:
        return [run_case(seed, horizon) for seed in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda seed: run_case(seed, horizon), seeds))
