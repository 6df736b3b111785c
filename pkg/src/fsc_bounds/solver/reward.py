"""Per-step reward, belief update and disturbance law of the channel DP.

Under a point-mass belief at state s and input row q, the per-step reward is
I(X_t, S_{t-1}; Y_t | x^{t-1}) = H(q W[s]) - sum_x q(x) H(W[s, x]).
"""

from __future__ import annotations

import numpy as np
from numpy.typing import ArrayLike, NDArray

from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.solver.types import FORBIDDEN_MASS_TOLERANCE, DpState
from fsc_bounds.utils.exceptions import InvalidPolicyError
from fsc_bounds.utils.info import entropy_bits


def conditional_entropies(fsc: Fsc) -> NDArray[np.float64]:
    """H(Y | X=x, S=s) for every (s, x), shape (|S|, |X|)."""
    return entropy_bits(fsc.emission, axis=-1)


def output_law(fsc: Fsc, s: int, row: ArrayLike) -> NDArray[np.float64]:
    """P(y | s, row) = sum_x row(x) W[s, x, y]."""
    return np.asarray(row, dtype=np.float64) @ fsc.emission[s]


def _check_row(fsc: Fsc, s: int, row: NDArray[np.float64]) -> None:
    if row.shape != (fsc.n_inputs,):
        raise InvalidPolicyError(
            f"row has shape {row.shape}, expected ({fsc.n_inputs},)"
        )
    forbidden = np.where(fsc.allowed_mask[s], 0.0, row)
    if np.any(forbidden > FORBIDDEN_MASS_TOLERANCE):
        x = int(np.argmax(forbidden))
        raise InvalidPolicyError(
            f"row puts mass {row[x]:.3g} on input {x}, forbidden at state {s}"
        )


def reward(fsc: Fsc, s: int, row: ArrayLike) -> float:
    """g(s, row) in bits.

    Raises
    ------
        InvalidPolicyError: If ``row`` places mass on an input forbidden at s.

    """
    q = np.asarray(row, dtype=np.float64)
    _check_row(fsc, s, q)
    mixed = float(entropy_bits(q @ fsc.emission[s]))
    noise = float(q @ conditional_entropies(fsc)[s])
    return mixed - noise


def next_dp_state(fsc: Fsc, z: DpState, x: int) -> DpState:
    """Push the belief through f: z'(s') = sum_s z(s) 1{f(s, x) = s'}."""
    if not 0 <= x < fsc.n_inputs:
        raise ValueError(f"input {x} is not in 0..{fsc.n_inputs - 1}")
    belief = np.zeros(fsc.n_states)
    np.add.at(belief, fsc.next_state[:, x], z.belief)
    return DpState(belief)


def disturbance_law(
    fsc: Fsc, z: DpState, policy_rows: ArrayLike
) -> NDArray[np.float64]:
    """P(x | z, rows) = sum_s z(s) rows[s, x]."""
    rows = np.asarray(policy_rows, dtype=np.float64)
    if rows.shape != (fsc.n_states, fsc.n_inputs):
        raise InvalidPolicyError(
            f"policy rows have shape {rows.shape}, expected "
            f"({fsc.n_states}, {fsc.n_inputs})"
        )
    return np.asarray(z.belief @ rows, dtype=np.float64)


def state_rewards(fsc: Fsc, rows: ArrayLike) -> NDArray[np.float64]:
    """g(s, rows[s]) for every state at once."""
    q = np.asarray(rows, dtype=np.float64)
    outputs = np.einsum("sx,sxy->sy", q, fsc.emission)
    return entropy_bits(outputs, axis=-1) - np.einsum(
        "sx,sx->s", q, conditional_entropies(fsc)
    )
