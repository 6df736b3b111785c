"""Entropy and mutual-information helpers, all in bits with 0·log 0 = 0."""

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.special import entr, xlogy

LN2 = math.log(2.0)
PROB_SLACK = 1e-15


def clamp_probabilities(p: ArrayLike) -> NDArray[np.float64]:
    """Clamp arithmetic drift back into [0, 1].

    Values outside [-1e-15, 1 + 1e-15] are left alone so that genuine errors
    still surface in validation.
    """
    arr = np.asarray(p, dtype=np.float64)
    low = (arr < 0.0) & (arr >= -PROB_SLACK)
    high = (arr > 1.0) & (arr <= 1.0 + PROB_SLACK)
    return np.where(low, 0.0, np.where(high, 1.0, arr))


def entropy_bits(p: ArrayLike, axis: int = -1) -> NDArray[np.float64]:
    """Shannon entropy in bits along ``axis``."""
    arr = clamp_probabilities(p)
    return np.asarray(entr(arr).sum(axis=axis) / LN2, dtype=np.float64)


def total_entropy_bits(p: ArrayLike) -> float:
    """Entropy in bits of a whole (possibly multi-dimensional) joint table.

    Accumulates with ``math.fsum`` so large enumerations do not lose the
    small terms.
    """
    arr = clamp_probabilities(p).ravel()
    return math.fsum(entr(arr).tolist()) / LN2


def binary_entropy(p: ArrayLike) -> NDArray[np.float64]:
    """h_b(p) in bits, vectorized."""
    arr = clamp_probabilities(p)
    return np.asarray((entr(arr) + entr(1.0 - arr)) / LN2, dtype=np.float64)


def hb(p: float) -> float:
    """Scalar h_b(p) in bits."""
    return float(binary_entropy(p))


def mutual_information_bits(joint: ArrayLike) -> float:
    """I(A;B) in bits for a two-dimensional joint table P[a, b]."""
    table = clamp_probabilities(joint)
    pa = table.sum(axis=1, keepdims=True)
    pb = table.sum(axis=0, keepdims=True)
    outer = pa * pb
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(table > 0.0, table / np.where(outer > 0.0, outer, 1.0), 1.0)
    return math.fsum(xlogy(table, ratio).ravel().tolist()) / LN2
