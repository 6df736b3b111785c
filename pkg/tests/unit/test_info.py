import math

from hypothesis import given, strategies as st
import numpy as np
import pytest

from fsc_bounds.utils.info import (
    binary_entropy,
    clamp_probabilities,
    entropy_bits,
    hb,
    mutual_information_bits,
    total_entropy_bits,
)


def test_entropy_of_uniform_and_degenerate_laws():
    assert float(entropy_bits([0.5, 0.5])) == pytest.approx(1.0)
    assert float(entropy_bits([0.25] * 4)) == pytest.approx(2.0)
    assert float(entropy_bits([1.0, 0.0])) == 0.0
    rows = entropy_bits([[0.5, 0.5], [1.0, 0.0]], axis=-1)
    assert rows.tolist() == pytest.approx([1.0, 0.0])


def test_binary_entropy():
    assert hb(0.0) == 0.0
    assert hb(1.0) == 0.0
    assert hb(0.5) == pytest.approx(1.0)
    assert hb(0.11) == pytest.approx(
        -0.11 * math.log2(0.11) - 0.89 * math.log2(0.89), abs=1e-14
    )
    assert binary_entropy([0.1, 0.9]).tolist() == pytest.approx([hb(0.1)] * 2)


def test_clamping_only_absorbs_tiny_drift():
    out = clamp_probabilities([-1e-16, 1.0 + 1e-16, -0.5, 0.3])
    assert out.tolist() == [0.0, 1.0, -0.5, 0.3]


def test_mutual_information_of_simple_tables():
    assert mutual_information_bits([[0.5, 0.0], [0.0, 0.5]]) == pytest.approx(1.0)
    assert mutual_information_bits([[0.25, 0.25], [0.25, 0.25]]) == pytest.approx(0.0)
    p = 0.1
    bsc = 0.5 * np.array([[1 - p, p], [p, 1 - p]])
    assert mutual_information_bits(bsc) == pytest.approx(1.0 - hb(p), abs=1e-14)


def test_total_entropy_matches_flattened_entropy():
    table = np.array([[[0.1, 0.2], [0.05, 0.15]], [[0.3, 0.0], [0.1, 0.1]]])
    flat = float(entropy_bits(table.ravel()))
    assert total_entropy_bits(table) == pytest.approx(flat)


@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=8).filter(
        lambda xs: sum(xs) > 1e-3
    )
)
def test_entropy_is_bounded_by_log_of_support(weights):
    p = np.array(weights) / sum(weights)
    h = float(entropy_bits(p))
    assert -1e-12 <= h <= math.log2(len(p)) + 1e-12
