import logging

import numpy as np
import pytest

from fsc_bounds.channels.rll import DmcKind, make_dmc
from fsc_bounds.utils.logging_config import (
    LOGLEVEL_ENV,
    resolve_log_level,
    setup_logging,
)
from fsc_bounds.utils.logging_decorators import (
    log_entry_exit,
    log_exceptions,
    log_timing,
)


@pytest.mark.parametrize(
    ("raw", "expected"),
    [("DEBUG", logging.DEBUG), ("info", logging.INFO), ("15", 15), ("bogus", 30)],
)
def test_resolve_log_level_reads_the_environment(monkeypatch, raw, expected):
    monkeypatch.setenv(LOGLEVEL_ENV, raw)
    assert resolve_log_level(logging.WARNING) == expected


def test_resolve_log_level_defaults_when_unset(monkeypatch):
    monkeypatch.delenv(LOGLEVEL_ENV, raising=False)
    assert resolve_log_level(logging.ERROR) == logging.ERROR
    monkeypatch.setenv(LOGLEVEL_ENV, "  ")
    assert resolve_log_level(logging.ERROR) == logging.ERROR


def test_setup_logging_writes_to_the_log_file(monkeypatch, tmp_path):
    monkeypatch.setenv(LOGLEVEL_ENV, "INFO")
    path = tmp_path / "run.log"
    setup_logging(logging.WARNING, str(path))
    logging.getLogger("fsc_bounds.check").info("solver started")
    logging.getLogger("fsc_bounds.check").debug("not shown")
    for handler in logging.getLogger().handlers:
        handler.flush()
    text = path.read_text(encoding="utf-8")
    assert "INFO fsc_bounds.check: solver started" in text
    assert "not shown" not in text


class Worker:
    def __init__(self):
        self.logger = logging.getLogger("fsc_bounds.Worker")

    @log_entry_exit()
    @log_timing()
    def double(self, x):
        return 2 * x

    @log_exceptions()
    def fail(self):
        raise ValueError("bad input")


def test_decorators_log_through_the_instance_logger(caplog):
    worker = Worker()
    with caplog.at_level(logging.DEBUG, logger="fsc_bounds"):
        assert worker.double(21) == 42
    messages = [r.getMessage() for r in caplog.records]
    assert all(r.name == "fsc_bounds.Worker" for r in caplog.records)
    assert any(m.startswith("Entering Worker.double") for m in messages)
    assert any(m.startswith("Exiting Worker.double with result=42") for m in messages)
    assert any("Worker.double took" in m for m in messages)


def test_log_exceptions_reraises(caplog):
    with caplog.at_level(logging.ERROR, logger="fsc_bounds"):
        with pytest.raises(ValueError, match="bad input"):
            Worker().fail()
    assert "ValueError in Worker.fail: bad input" in caplog.text


def test_plain_functions_use_their_module_logger(caplog):
    @log_entry_exit()
    def square(x):
        return x * x

    with caplog.at_level(logging.DEBUG):
        assert square(3) == 9
    assert caplog.records[0].name == __name__


def test_entry_log_summarizes_arrays_and_channels(caplog):
    @log_entry_exit()
    def total(fsc, weights, label=""):
        return weights.sum()

    fsc = make_dmc(DmcKind.bsc(0.1))
    with caplog.at_level(logging.DEBUG):
        total(fsc, np.zeros((2, 3)), label="x" * 500)
    entry = caplog.records[0].getMessage()
    assert f"<{fsc.describe()}>" in entry
    assert "<array float64 shape=(2, 3)>" in entry
    assert len(entry) < 300
