import dataclasses

import numpy as np
import pytest

from fsc_bounds.channels.fsc import MISSING, Fsc, ViolationKind, validate
from fsc_bounds.utils.exceptions import InvalidChannelError


def test_constructor_output_is_valid(rll_bsc):
    report = validate(rll_bsc(1, "inf", 0.1))
    assert report.ok
    assert len(report) == 0


def test_default_names_and_cardinalities(toggle_channel):
    assert toggle_channel.n_states == 2
    assert toggle_channel.n_inputs == 2
    assert toggle_channel.n_outputs == 2
    assert toggle_channel.state_names == ("0", "1")
    assert toggle_channel.allowed_mask.all()


def test_tables_are_read_only(toggle_channel):
    with pytest.raises(ValueError):
        toggle_channel.emission[0, 0, 0] = 0.5
    with pytest.raises(ValueError):
        toggle_channel.next_state[0, 0] = 1


def test_row_summing_to_point_nine_is_a_stochasticity_violation(toggle_channel):
    emission = np.array(toggle_channel.emission)
    emission[1, 0] = [0.6, 0.3]
    bad = dataclasses.replace(toggle_channel, emission=emission)
    report = validate(bad)
    assert report.kinds() == {ViolationKind.STOCHASTICITY}
    assert "(1,0)" in report.messages()[0]


def test_missing_transition_is_a_totality_violation(toggle_channel):
    next_state = np.array(toggle_channel.next_state)
    next_state[0, 1] = MISSING
    report = validate(dataclasses.replace(toggle_channel, next_state=next_state))
    assert ViolationKind.TOTALITY in report.kinds()


def test_out_of_range_transition_is_reported(toggle_channel):
    next_state = np.array(toggle_channel.next_state)
    next_state[1, 1] = 7
    report = validate(dataclasses.replace(toggle_channel, next_state=next_state))
    assert report.kinds() == {ViolationKind.TOTALITY}


def test_every_violation_is_reported_at_once(toggle_channel):
    next_state = np.array(toggle_channel.next_state)
    next_state[0, 0] = MISSING
    emission = np.array(toggle_channel.emission)
    emission[0, 1] = [-0.1, 1.1]
    bad = dataclasses.replace(
        toggle_channel, next_state=next_state, emission=emission, initial_state=5
    )
    report = validate(bad)
    assert report.kinds() == {
        ViolationKind.TOTALITY,
        ViolationKind.PROBABILITY_RANGE,
        ViolationKind.INITIAL_STATE,
    }
    with pytest.raises(InvalidChannelError) as excinfo:
        report.raise_if_invalid()
    assert excinfo.value.report is report


def test_state_without_allowed_inputs_is_reported(toggle_channel):
    allowed = np.array([[True, True], [False, False]])
    report = validate(dataclasses.replace(toggle_channel, allowed=allowed))
    assert report.kinds() == {ViolationKind.NO_ALLOWED_INPUT}


def test_shape_mismatch_stops_further_checks():
    fsc = Fsc.from_tables(next_state=[[0, 0]], emission=[[[1.0, 0.0]]])
    report = validate(fsc)
    assert report.kinds() == {ViolationKind.SHAPE}


def test_wrong_rank_tables_are_rejected_at_construction():
    with pytest.raises(ValueError):
        Fsc.from_tables(next_state=[0, 0], emission=[[[1.0]]])


def test_state_graph_and_reachability(toggle_channel, rll_bsc):
    graph = toggle_channel.state_graph()
    assert set(graph.edges(keys=True)) == {(0, 0, 0), (0, 1, 1), (1, 1, 0), (1, 0, 1)}
    assert toggle_channel.reachable_states() == {0, 1}

    stuck = Fsc.from_tables(
        next_state=[[0, 0], [1, 0]],
        emission=np.full((2, 2, 2), 0.5),
    )
    assert stuck.reachable_states() == {0}

    rll = rll_bsc(2, "inf", 0.1)
    assert not rll.state_graph().has_edge(0, 0)
    assert rll.reachable_states() == {0, 1, 2}


def test_describe_uses_state_names():
    fsc = Fsc.from_tables(next_state=[[0]], emission=[[[1.0]]], name="id")
    assert fsc.describe() == "id: |S|=1 |X|=1 |Y|=1 s0=0"
