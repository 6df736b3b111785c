import numpy as np
import pytest

from fsc_bounds.solver.types import Policy, SolverOptions
from fsc_bounds.utils.exceptions import InvalidPolicyError


def test_default_options():
    opts = SolverOptions()
    assert opts.tolerance == 1e-10
    assert opts.span_tolerance == 1e-12
    assert opts.max_iterations == 100_000
    assert opts.grid_points == 64
    assert opts.restarts == 8
    assert opts.seed == 0
    assert opts.damping == 0.5


def test_overrides_skip_none_and_reject_unknown_names():
    opts = SolverOptions().with_overrides(tolerance=None, grid_points=32, seed=7)
    assert opts.tolerance == 1e-10
    assert opts.grid_points == 32
    assert opts.seed == 7
    with pytest.raises(ValueError, match="unknown solver options"):
        SolverOptions().with_overrides(tolerence=1e-9)


@pytest.mark.parametrize(
    "overrides",
    [
        {"tolerance": 0.0},
        {"max_iterations": 0},
        {"grid_points": 2},
        {"restarts": 0},
        {"damping": 1.5},
        {"q_restarts": -1},
    ],
)
def test_out_of_range_options_are_rejected(overrides):
    with pytest.raises(ValueError):
        SolverOptions().with_overrides(**overrides)


def test_binary_params_round_trip_through_policy(rll_bsc):
    fsc = rll_bsc(1, 3, 0.1)
    policy = Policy.from_binary_params(fsc, [0.2, 0.7])
    assert np.allclose(policy.rows, [[1.0, 0.0], [0.8, 0.2], [0.3, 0.7], [0.0, 1.0]])
    assert policy.binary_params(fsc) == (0.2, 0.7)
    policy.check(fsc)


def test_binary_param_count_must_match(rll_bsc):
    fsc = rll_bsc(1, 3, 0.1)
    with pytest.raises(InvalidPolicyError):
        Policy.from_binary_params(fsc, [0.5, 0.5, 0.5])
    with pytest.raises(InvalidPolicyError, match="fewer"):
        Policy.from_binary_params(fsc, [0.5])


def test_deterministic_policy(toggle_channel):
    policy = Policy.deterministic(toggle_channel, [1, 0])
    assert policy.rows.tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert policy.row(0).tolist() == [0.0, 1.0]
    assert policy.n_states == 2


@pytest.mark.parametrize(
    ("rows", "message"),
    [
        ([[1.0, 0.0]], "shape"),
        ([[0.5, 0.6], [0.5, 0.5]], "sums to"),
        ([[1.5, -0.5], [0.5, 0.5]], "negative"),
        ([[0.5, 0.5], [0.5, 0.5]], "forbidden input 1 at state 0"),
    ],
)
def test_policy_check_failures(rll_bsc, rows, message):
    with pytest.raises(InvalidPolicyError, match=message):
        Policy(np.array(rows)).check(rll_bsc(1, "inf", 0.1))


def test_policy_rows_must_be_a_matrix():
    with pytest.raises(InvalidPolicyError):
        Policy(np.array([0.5, 0.5]))
