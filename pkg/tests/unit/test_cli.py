import csv
import io
import json

import pytest

from fsc_bounds.__version__ import __version__
from fsc_bounds.app import (
    CSV_HEADER,
    EXIT_ERROR,
    EXIT_FAILED,
    EXIT_OK,
    THREADS_ENV,
    Method,
    RuntimeConfig,
    SweepRow,
    fmt,
    parse_grid,
    parse_specs,
    write_csv,
)
from fsc_bounds.bounds.closed_forms import bsc_dinf_bound, noiseless_capacity
from fsc_bounds.channels.rll import RllSpec
from fsc_bounds.main import main

BSC_ONE_INF = ["--family", "bsc", "--d", "1", "--k", "inf", "--p", "0.1"]


def _report(path):
    """Parse ``key: value`` report lines into a dict."""
    lines = path.read_text(encoding="utf-8").splitlines()
    return dict(line.split(": ", 1) for line in lines)


@pytest.fixture
def out(tmp_path):
    return tmp_path / "report.txt"


def test_dp_bound_agrees_with_the_closed_form(out):
    assert main(["bound", *BSC_ONE_INF, "--out", str(out)]) == EXIT_OK
    report = _report(out)
    assert report["method"] == "dp"
    assert report["status"] == "PASS"
    assert float(report["value"]) == pytest.approx(
        bsc_dinf_bound(1, 0.1).value, abs=1e-6
    )
    assert float(report["discrepancy"]) <= 1e-6
    assert float(report["residual"]) <= 1e-10
    assert report["policy[0]"] == "1, 0"
    assert int(report["iterations"]) >= 1


def test_closed_form_and_vgraph_methods(out):
    argv = ["bound", *BSC_ONE_INF, "--out", str(out), "--method"]
    assert main([*argv, "closed_form"]) == EXIT_OK
    closed = _report(out)
    assert closed["family"] == "bsc_dinf (golden)"
    assert main([*argv, "vgraph"]) == EXIT_OK
    vgraph = _report(out)
    assert vgraph["vgraph"].endswith("|V|=2")
    assert float(vgraph["value"]) == pytest.approx(float(closed["value"]), abs=1e-6)


def test_channel_file_report_names_its_states(channel_file, out):
    assert main(["bound", "--channel", str(channel_file), "--out", str(out)]) == 0
    report = _report(out)
    assert report["channel"].startswith("toggle: |S|=2 |X|=2 |Y|=2 s0=good")
    assert "policy[good]" in report and "policy[bad]" in report
    assert "closed_form" not in report


def test_report_goes_to_stdout_by_default(capsys):
    assert main(["bound", *BSC_ONE_INF, "--method", "closed_form"]) == EXIT_OK
    captured = capsys.readouterr()
    assert captured.out.startswith("channel: ")
    assert captured.out.rstrip().endswith("status: PASS")


def test_verify_certifies_and_rejects(out):
    assert main(["verify", *BSC_ONE_INF, "--out", str(out)]) == EXIT_OK
    report = _report(out)
    assert report["bellman"] == "PASS"
    assert set(report) >= {"rho", "gap[0]", "gap[1]", "residual"}

    offset = ["verify", *BSC_ONE_INF, "--rho-offset", "0.01", "--out", str(out)]
    assert main(offset) == EXIT_FAILED
    report = _report(out)
    assert report["bellman"] == "FAIL"
    assert float(report["residual"]) >= 0.009


def test_verify_with_an_explicit_pair(out):
    rho = bsc_dinf_bound(1, 0.1).value
    pair = ["--rho", repr(rho), "--h", f"0,{rho!r}"]
    argv = ["verify", *BSC_ONE_INF, *pair, "--tol", "1e-8", "--out", str(out)]
    assert main(argv) == EXIT_OK
    short = ["verify", *BSC_ONE_INF, "--rho", "0.5", "--h", "0", "--out", str(out)]
    assert main(short) == EXIT_ERROR


def test_verify_oracle_runs_the_conservation_suite(monkeypatch, out):
    monkeypatch.setenv(THREADS_ENV, "2")
    assert main(["verify", *BSC_ONE_INF, "--oracle", "--out", str(out)]) == 0
    assert _report(out)["conservation"] == "20/20 PASS"


def test_single_point_sweep_writes_one_row_per_method(tmp_path):
    path = tmp_path / "sweep.csv"
    argv = [
        "sweep", "--family", "bsc", "--d", "1", "--k", "inf", "--param", "p",
        "--from", "0.1", "--to", "0.1", "--points", "1",
        "--method", "dp,closed_form", "--out", str(path),
    ]  # fmt: skip
    assert main(argv) == EXIT_OK
    raw = path.read_bytes()
    assert b"\r" not in raw
    rows = list(csv.reader(io.StringIO(raw.decode("utf-8"))))
    assert tuple(rows[0]) == CSV_HEADER
    assert [r[5] for r in rows[1:]] == ["dp", "closed_form"]
    assert rows[1][:4] == ["bsc", "1", "inf", "0.1"]
    assert float(rows[1][4]) == pytest.approx(float(rows[2][4]), abs=1e-6)


def test_sweep_with_an_unconverged_dp_fails(tmp_path):
    argv = [
        "sweep", "--family", "bec", "--d", "1", "--param", "eps",
        "--from", "0.2", "--to", "0.4", "--points", "2",
        "--max-iters", "1", "--out", str(tmp_path / "sweep.csv"),
    ]  # fmt: skip
    assert main(argv) == EXIT_FAILED


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--family", "bsc", "--param", "p", "--from", "0.3", "--to", "0.1"],
        ["sweep", "--family", "bsc", "--param", "eps"],
        ["bound", "--family", "bsc", "--d", "1"],
        ["bound", *BSC_ONE_INF, "--method", "vgraph", "--vgraph", "missing.json"],
    ],
)
def test_invalid_input_exits_with_2(argv, capsys):
    assert main(argv) == EXIT_ERROR
    assert "error: " in capsys.readouterr().err


def test_invalid_channel_file_exits_with_2(tmp_path, channel_document, capsys):
    channel_document["emission"]["good,0"] = ["0.9", "0.2"]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(channel_document), encoding="utf-8")
    assert main(["bound", "--channel", str(path)]) == EXIT_ERROR
    assert "stochasticity" in capsys.readouterr().err


def test_closed_form_needs_a_builtin_channel(channel_file):
    argv = ["bound", "--channel", str(channel_file), "--method", "closed_form"]
    assert main(argv) == EXIT_ERROR


def test_usage_errors_exit_through_argparse(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["bound", "--d", "1"])
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit) as excinfo:
        main(["--version"])
    assert excinfo.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_grid_and_spec_parsing():
    assert parse_grid(0.1, 0.1, 1) == [0.1]
    assert parse_grid(0.0, 0.5, 3) == [0.0, 0.25, 0.5]
    with pytest.raises(ValueError, match="empty range"):
        parse_grid(0.5, 0.0, 3)
    specs = parse_specs("0,1", "2,inf")
    assert specs == [RllSpec(0, 2), RllSpec(0), RllSpec(1, 2), RllSpec(1)]
    assert Method.parse_list("dp, vgraph") == [Method.DP, Method.VGRAPH]
    with pytest.raises(ValueError, match="unknown method"):
        Method.parse_list("dp,exact")


def test_csv_rows_use_nine_significant_digits():
    row = SweepRow("bsc", 1, "inf", 0.1, 0.123456789123, "dp", 1e-12, (0.25, 0.5))
    stream = io.StringIO()
    write_csv([row], stream)
    assert stream.getvalue().splitlines() == [
        ",".join(CSV_HEADER),
        "bsc,1,inf,0.1,0.123456789,dp,1e-12,0.25;0.5",
    ]
    assert fmt(2.0 / 3.0) == "0.666666667"


def test_runtime_config_threads(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert RuntimeConfig.from_env().threads == 3
    monkeypatch.setenv(THREADS_ENV, "many")
    assert RuntimeConfig.from_env().threads >= 1
    monkeypatch.setenv(THREADS_ENV, "0")
    assert RuntimeConfig.from_env(out="x.csv").threads == 1


def _sweep(path, *flags):
    argv = ["sweep", *flags, "--out", str(path)]
    assert main(argv) == EXIT_OK
    with path.open(encoding="utf-8", newline="") as stream:
        return list(csv.DictReader(stream))


BSC_GRID = ["--param", "p", "--from", "0.05", "--to", "0.35", "--points", "4"]


def test_sweep_output_does_not_depend_on_the_thread_count(monkeypatch, tmp_path):
    argv = ["--family", "bsc", "--d", "0,1", "--k", "3,inf", *BSC_GRID]
    argv += ["--method", "dp,closed_form"]
    outputs = []
    for threads in ("1", "4", "4"):
        monkeypatch.setenv(THREADS_ENV, threads)
        path = tmp_path / f"sweep-{len(outputs)}.csv"
        _sweep(path, *argv)
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1] == outputs[2]


def test_bsc_sweep_decreases_with_the_minimum_run(tmp_path):
    rows = _sweep(tmp_path / "sweep.csv", "--family", "bsc", "--d", "1,2,3", *BSC_GRID)
    values = {(int(r["d"]), r["param"]): float(r["value"]) for r in rows}
    params = sorted({r["param"] for r in rows})
    assert len(params) == 4
    for param in params:
        assert values[(1, param)] > values[(2, param)] > values[(3, param)], param


@pytest.mark.parametrize(("d", "k"), [("1", "inf"), ("1", "3")])
def test_bec_sweep_lies_on_the_erasure_line(tmp_path, d, k):
    grid = ["--param", "eps", "--from", "0", "--to", "1", "--points", "5"]
    argv = ["--family", "bec", "--d", d, "--k", k, *grid]
    rows = _sweep(tmp_path / "sweep.csv", *argv)
    capacity = noiseless_capacity(RllSpec.parse(int(d), k)).value
    assert len(rows) == 5
    for row in rows:
        eps = float(row["param"])
        assert float(row["value"]) == pytest.approx(capacity * (1.0 - eps), abs=1e-6)
    values = [float(r["value"]) for r in rows]
    assert values[0] == pytest.approx(capacity, abs=1e-6)
    assert values[-1] == pytest.approx(0.0, abs=1e-9)
    assert abs(values[2] - 0.5 * (values[1] + values[3])) <= 1e-8


@pytest.mark.parametrize("given", [["--h", "0,0.5"], ["--rho", "0.5"]])
def test_verify_needs_both_h_and_rho(given, capsys):
    assert main(["verify", *BSC_ONE_INF, *given]) == EXIT_ERROR
    assert "--h and --rho go together" in capsys.readouterr().err


def test_unreadable_channel_path_exits_with_2(tmp_path, capsys):
    assert main(["bound", "--channel", str(tmp_path)]) == EXIT_ERROR
    assert "cannot read channel file" in capsys.readouterr().err
