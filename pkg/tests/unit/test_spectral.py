import math

import numpy as np
import pytest

from fsc_bounds.bounds.closed_forms import noiseless_capacity
from fsc_bounds.channels.rll import (
    ConstraintGraph,
    RllSpec,
    constraint_graph,
    make_identity_channel,
)
from fsc_bounds.oracle.spectral import (
    maxentropic_chain,
    perron_pair,
    spectral_noiseless_capacity,
)
from fsc_bounds.solver.rvi import policy_gain
from fsc_bounds.utils.exceptions import ReducibleGraphError

PHI = (1.0 + math.sqrt(5.0)) / 2.0


def test_perron_pair_of_the_golden_mean_shift():
    eigenvalue, vector = perron_pair(np.array([[0, 1], [1, 1]]))
    assert eigenvalue == pytest.approx(PHI, rel=1e-11)
    assert vector.sum() == pytest.approx(1.0)
    assert vector[1] / vector[0] == pytest.approx(PHI, rel=1e-9)


@pytest.mark.parametrize(
    "spec", [RllSpec(1), RllSpec(2), RllSpec(0, 2), RllSpec(1, 3), RllSpec(2, 7)]
)
def test_spectral_rate_matches_the_dp(spec):
    spectral = spectral_noiseless_capacity(constraint_graph(spec))
    assert spectral == pytest.approx(noiseless_capacity(spec).value, abs=1e-8)


def test_parry_chain_achieves_the_noiseless_capacity():
    spec = RllSpec(1)
    chain = maxentropic_chain(constraint_graph(spec))
    assert chain.rows[0].tolist() == [1.0, 0.0]
    assert chain.rows[1].tolist() == pytest.approx([1.0 / PHI, 1.0 / PHI**2])
    gain = policy_gain(make_identity_channel(spec), chain)
    assert gain.rho == pytest.approx(math.log2(PHI), abs=1e-9)


def test_reducible_graph_is_rejected():
    graph = ConstraintGraph(RllSpec(1), 2, ((0, 0, 1), (1, 0, 1)))
    with pytest.raises(ReducibleGraphError):
        spectral_noiseless_capacity(graph)
    with pytest.raises(ReducibleGraphError):
        maxentropic_chain(graph)
