import json
import logging

import numpy as np
import pytest

from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.channels.rll import DmcKind, RllSpec, make_rll_dmc
from fsc_bounds.solver.types import SolverOptions


@pytest.fixture(autouse=True)
def quiet_logging():
    """Keep library loggers from leaking handlers between tests."""
    root = logging.getLogger()
    handlers = list(root.handlers)
    level = root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def opts():
    return SolverOptions()


@pytest.fixture
def rll_bsc():
    """Factory for (d,k)-RLL constrained BSC(p) channels."""

    def make(d=1, k="inf", p=0.1):
        return make_rll_dmc(RllSpec.parse(d, k), DmcKind.bsc(p))

    return make


@pytest.fixture
def rll_bec():
    def make(d=1, k="inf", eps=0.3):
        return make_rll_dmc(RllSpec.parse(d, k), DmcKind.bec(eps))

    return make


@pytest.fixture
def toggle_channel():
    """Two states; input 1 flips the state, state 1 is a noisier BSC."""
    return Fsc.from_tables(
        next_state=[[0, 1], [1, 0]],
        emission=[
            [[0.9, 0.1], [0.1, 0.9]],
            [[0.7, 0.3], [0.3, 0.7]],
        ],
        name="toggle",
    )


@pytest.fixture
def ternary_channel():
    """One state, three inputs: a noisy ternary symmetric channel."""
    w = np.full((3, 3), 0.05) + np.eye(3) * 0.85
    return Fsc(
        next_state=np.zeros((1, 3), dtype=np.int64),
        emission=w[np.newaxis],
        name="ternary",
    )


CHANNEL_DOCUMENT = {
    "name": "toggle",
    "states": ["good", "bad"],
    "inputs": ["0", "1"],
    "outputs": ["0", "1"],
    "initial_state": "good",
    "next_state": {
        "good,0": "good",
        "good,1": "bad",
        "bad,0": "bad",
        "bad,1": "good",
    },
    "emission": {
        "good,0": ["0.9", "0.1"],
        "good,1": ["0.1", "0.9"],
        "bad,0": ["0.7", "0.3"],
        "bad,1": ["0.3", "0.7"],
    },
}


@pytest.fixture
def channel_document():
    return json.loads(json.dumps(CHANNEL_DOCUMENT))


@pytest.fixture
def channel_file(tmp_path, channel_document):
    path = tmp_path / "toggle.json"
    path.write_text(json.dumps(channel_document, indent=2), encoding="utf-8")
    return path
