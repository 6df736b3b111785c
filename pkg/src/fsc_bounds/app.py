"""Command implementations for the fsc-bounds CLI: bound, sweep and verify."""

from __future__ import annotations

import argparse
from collections.abc import Iterator, Sequence
from concurrent.futures import ThreadPoolExecutor
import contextlib
import csv
from dataclasses import dataclass
from enum import Enum
import logging
import os
from pathlib import Path
import sys
from typing import TextIO

import numpy as np

from fsc_bounds.bounds.closed_forms import (
    BoundResult,
    bec_bound,
    bsc_dinf_bound,
    bsc_dk_bound,
)
from fsc_bounds.bounds.vgraph_bound import optimize_q
from fsc_bounds.channels.fsc import Fsc
from fsc_bounds.channels.loader import load_channel, load_vgraph
from fsc_bounds.channels.rll import DmcFamily, DmcKind, RllSpec, make_rll_dmc
from fsc_bounds.channels.vgraph import (
    VGraph,
    constraint_vgraph,
    input_memory_vgraph,
    trivial_vgraph,
)
from fsc_bounds.oracle.corpus import CORPUS_SEEDS, conservation_suite
from fsc_bounds.solver.rvi import bellman_gaps, solve_average_reward
from fsc_bounds.solver.types import SolverOptions
from fsc_bounds.utils.exceptions import DimensionMismatchError
from fsc_bounds.utils.logging_decorators import log_entry_exit, log_exceptions

THREADS_ENV = "FSC_BOUNDS_THREADS"
AGREEMENT_TOLERANCE = 1e-6
CSV_HEADER = ("family", "d", "k", "param", "value", "method", "residual", "argmax")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2


def fmt(value: float) -> str:
    """Nine significant digits, the CSV and report number format."""
    return f"{value:.9g}"


def _threads_from_env() -> int:
    raw = os.getenv(THREADS_ENV)
    default = os.cpu_count() or 1
    if raw is None or not raw.strip():
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        logging.getLogger(__name__).warning(
            f"ignoring {THREADS_ENV}={raw!r}; using {default} threads"
        )
        return default


@dataclass(frozen=True)
class RuntimeConfig:
    """Process-level settings: parallelism and where output and logs go."""

    threads: int = 1
    out: Path | None = None
    log_file: Path | None = None

    @classmethod
    def from_env(
        cls, out: str | Path | None = None, log_file: str | Path | None = None
    ) -> RuntimeConfig:
        return cls(
            threads=_threads_from_env(),
            out=Path(out) if out else None,
            log_file=Path(log_file) if log_file else None,
        )

    @contextlib.contextmanager
    def output(self) -> Iterator[TextIO]:
        """The report stream: ``out`` when set (LF endings), else stdout."""
        if self.out is None:
            yield sys.stdout
            return
        with self.out.open("w", encoding="utf-8", newline="\n") as stream:
            yield stream


class Method(Enum):
    DP = "dp"
    CLOSED_FORM = "closed_form"
    VGRAPH = "vgraph"

    @classmethod
    def parse_list(cls, text: str) -> list[Method]:
        try:
            return [cls(part.strip()) for part in text.split(",") if part.strip()]
        except ValueError as e:
            raise ValueError(f"unknown method in {text!r}: {e}") from e


@dataclass(frozen=True)
class SweepRow:
    """One evaluated grid point: a bound for one (family, d, k, param, method)."""

    family: str
    d: int
    k: str
    param: float
    value: float
    method: str
    residual: float
    argmax: tuple[float, ...]

    def csv_fields(self) -> list[str]:
        return [
            self.family,
            str(self.d),
            self.k,
            fmt(self.param),
            fmt(self.value),
            self.method,
            fmt(self.residual),
            ";".join(fmt(a) for a in self.argmax),
        ]


def write_csv(rows: Sequence[SweepRow], stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())


class BoundService:
    """Evaluates bounds on the built-in constrained channels and on files."""

    def __init__(self, options: SolverOptions) -> None:
        self.options = options
        self.logger = logging.getLogger(f"fsc_bounds.{self.__class__.__name__}")

    def closed_form(
        self, family: DmcFamily, spec: RllSpec, param: float
    ) -> BoundResult:
        if family is DmcFamily.BEC:
            return bec_bound(spec, param, self.options)
        if spec.is_infinite:
            return bsc_dinf_bound(spec.d, param, self.options)
        return bsc_dk_bound(spec.d, spec.k_int, param, self.options)

    def resolve_vgraph(
        self, source: str, fsc: Fsc, spec: RllSpec | None = None
    ) -> VGraph:
        """``trivial``, ``memory:M``, ``constraint`` or a V-graph file path."""
        if source == "trivial":
            return trivial_vgraph(fsc.n_inputs)
        if source.startswith("memory:"):
            return input_memory_vgraph(fsc.n_inputs, int(source.partition(":")[2]))
        if source == "constraint":
            if spec is None:
                raise ValueError(
                    "the constraint V-graph needs a built-in --family channel"
                )
            return constraint_vgraph(spec)
        return load_vgraph(source, fsc)

    @log_entry_exit()
    def evaluate(
        self,
        family: DmcFamily,
        spec: RllSpec,
        param: float,
        method: Method,
        vgraph: str = "constraint",
    ) -> SweepRow:
        """Evaluate one bound on the (d,k)-RLL constrained BSC or BEC."""
        if method is Method.CLOSED_FORM:
            result = self.closed_form(family, spec, param)
            value, residual = result.value, result.residual
            argmax = result.argmax.values()
        else:
            fsc = make_rll_dmc(spec, DmcKind(family, param))
            if method is Method.DP:
                solution = solve_average_reward(fsc, self.options)
                value = solution.rho
                residual = solution.bellman_residual
                argmax = solution.policy.binary_params(fsc)
            else:
                vg = self.resolve_vgraph(vgraph, fsc, spec)
                _, value = optimize_q(fsc, vg, self.options)
                residual, argmax = 0.0, ()
        return SweepRow(
            family=family.value,
            d=spec.d,
            k=spec.k_label,
            param=param,
            value=value,
            method=method.value,
            residual=residual,
            argmax=tuple(argmax),
        )


class SweepRunner:
    """Evaluates a parameter grid concurrently and keeps rows in grid order."""

    def __init__(self, service: BoundService, config: RuntimeConfig) -> None:
        self.service = service
        self.config = config
        self.logger = logging.getLogger(f"fsc_bounds.{self.__class__.__name__}")

    def run(
        self,
        family: DmcFamily,
        specs: Sequence[RllSpec],
        params: Sequence[float],
        methods: Sequence[Method],
        vgraph: str = "constraint",
    ) -> list[SweepRow]:
        tasks = [
            (spec, float(param), method)
            for spec in specs
            for param in params
            for method in methods
        ]
        self.logger.info(f"sweep: {len(tasks)} points on {self.config.threads} threads")

        def evaluate(task: tuple[RllSpec, float, Method]) -> SweepRow:
            spec, param, method = task
            return self.service.evaluate(family, spec, param, method, vgraph)

        if self.config.threads <= 1:
            return [evaluate(task) for task in tasks]
        with ThreadPoolExecutor(max_workers=self.config.threads) as pool:
            return list(pool.map(evaluate, tasks))


def parse_grid(start: float, stop: float, points: int) -> list[float]:
    """Equally spaced parameter values; a single point yields ``[start]``."""
    if points < 1 or stop < start:
        raise ValueError(f"empty range: from {start} to {stop} with {points} points")
    if points == 1:
        return [float(start)]
    return [float(v) for v in np.linspace(start, stop, points)]


def parse_specs(d_list: str, k_list: str) -> list[RllSpec]:
    ds = [int(d) for d in d_list.split(",") if d.strip()]
    ks = [k for k in k_list.split(",") if k.strip()]
    return [RllSpec.parse(d, k) for d in ds for k in ks]


def parse_vector(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


class FscBoundsApp:
    """Runs the CLI commands against injector-provided services."""

    def __init__(
        self,
        options: SolverOptions,
        config: RuntimeConfig,
        service: BoundService,
        runner: SweepRunner,
    ) -> None:
        self.options = options
        self.config = config
        self.service = service
        self.runner = runner
        self.logger = logging.getLogger(f"fsc_bounds.{self.__class__.__name__}")

    def _builtin(self, args: argparse.Namespace) -> tuple[DmcFamily, RllSpec, float]:
        family = DmcFamily(args.family)
        value = args.p if family is DmcFamily.BSC else args.eps
        if value is None:
            flag = "--p" if family is DmcFamily.BSC else "--eps"
            raise ValueError(f"{flag} is required for --family {family.value}")
        return family, RllSpec.parse(args.d, args.k), float(value)

    def _channel(self, args: argparse.Namespace) -> tuple[Fsc, RllSpec | None]:
        if args.channel:
            return load_channel(args.channel), None
        family, spec, value = self._builtin(args)
        return make_rll_dmc(spec, DmcKind(family, value)), spec

    def _closed_form(self, args: argparse.Namespace) -> BoundResult:
        family, spec, value = self._builtin(args)
        return self.service.closed_form(family, spec, value)

    @log_exceptions()
    def cmd_bound(self, args: argparse.Namespace) -> int:
        """Print one bound; for built-in channels also the closed form."""
        method = Method(args.method)
        fsc, spec = self._channel(args)
        lines = [f"channel: {fsc.describe()}", f"method: {method.value}"]
        ok = True
        if method is Method.CLOSED_FORM:
            if spec is None:
                raise ValueError(
                    "--method closed_form needs a built-in --family channel"
                )
            result = self._closed_form(args)
            value = result.value
            lines.append(f"value: {fmt(value)}")
            lines.append(f"argmax: {';'.join(fmt(a) for a in result.argmax.values())}")
            lines.append(f"family: {result.family.value} ({result.method})")
        elif method is Method.DP:
            solution = solve_average_reward(fsc, self.options)
            value = solution.rho
            lines.append(f"value: {fmt(value)}")
            for s in range(fsc.n_states):
                row = ", ".join(fmt(p) for p in solution.policy.rows[s])
                lines.append(f"policy[{fsc.state_names[s]}]: {row}")
            lines.append(f"residual: {fmt(solution.bellman_residual)}")
            lines.append(f"iterations: {solution.iterations}")
            ok = (
                solution.converged
                and solution.bellman_residual <= self.options.tolerance
            )
        else:
            vg = self.service.resolve_vgraph(args.vgraph, fsc, spec)
            q, value = optimize_q(fsc, vg, self.options)
            lines.append(f"vgraph: {vg.name or args.vgraph} |V|={vg.n_vertices}")
            lines.append(f"value: {fmt(value)}")
        if spec is not None and method is not Method.CLOSED_FORM:
            closed = self._closed_form(args)
            gap = abs(value - closed.value)
            lines.append(f"closed_form: {fmt(closed.value)}")
            lines.append(f"discrepancy: {fmt(gap)}")
            if method is Method.DP:
                ok = ok and gap <= AGREEMENT_TOLERANCE
        lines.append(f"status: {'PASS' if ok else 'FAIL'}")
        with self.config.output() as out:
            out.write("\n".join(lines) + "\n")
        return EXIT_OK if ok else EXIT_FAILED

    @log_exceptions()
    def cmd_sweep(self, args: argparse.Namespace) -> int:
        """Write one CSV row per grid point and method."""
        family = DmcFamily(args.family)
        expected = "p" if family is DmcFamily.BSC else "eps"
        if args.param != expected:
            raise ValueError(f"--param for {family.value} must be {expected}")
        rows = self.runner.run(
            family,
            parse_specs(args.d, args.k),
            parse_grid(args.start, args.stop, args.points),
            Method.parse_list(args.method),
            args.vgraph,
        )
        with self.config.output() as out:
            write_csv(rows, out)
        failed = [
            r
            for r in rows
            if r.method == Method.DP.value and r.residual > self.options.tolerance
        ]
        for r in failed:
            self.logger.warning(
                f"residual {fmt(r.residual)} at {r.family} d={r.d} k={r.k} "
                f"param={fmt(r.param)}"
            )
        return EXIT_FAILED if failed else EXIT_OK

    @log_exceptions()
    def cmd_verify(self, args: argparse.Namespace) -> int:
        """Check a (rho, h) pair against the Bellman equation."""
        fsc, _ = self._channel(args)
        if (args.h is None) != (args.rho is None):
            raise ValueError("--h and --rho go together")
        if args.h is not None:
            h = np.asarray(parse_vector(args.h))
            rho = float(args.rho)
            if h.shape != (fsc.n_states,):
                raise DimensionMismatchError(
                    f"--h has {h.size} values but the channel has {fsc.n_states} states"
                )
        else:
            solution = solve_average_reward(fsc, self.options)
            h, rho = solution.h, solution.rho
        rho += args.rho_offset
        gaps = bellman_gaps(fsc, rho, h, self.options)
        residual = float(np.max(np.abs(gaps)))
        ok = residual <= self.options.tolerance
        lines = [f"channel: {fsc.describe()}", f"rho: {fmt(rho)}"]
        lines += [
            f"gap[{fsc.state_names[s]}]: {fmt(float(gaps[s]))}"
            for s in range(fsc.n_states)
        ]
        lines.append(f"residual: {fmt(residual)}")
        lines.append(f"bellman: {'PASS' if ok else 'FAIL'}")
        if args.oracle:
            seeds = tuple(seed + args.seed for seed in CORPUS_SEEDS)
            checks = conservation_suite(seeds, workers=self.config.threads)
            passed = sum(c.passed for c in checks)
            lines.append(f"conservation: {passed}/{len(checks)} PASS")
            ok = ok and passed == len(checks)
        with self.config.output() as out:
            out.write("\n".join(lines) + "\n")
        return EXIT_OK if ok else EXIT_FAILED
