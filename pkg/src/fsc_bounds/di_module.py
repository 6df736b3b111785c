"""Dependency injection registry for fsc-bounds.

Provides the canonical solver options, runtime configuration and the
services built from them. All providers return the instances created in
__init__, so every consumer of an injector sees the same objects.
"""

import logging

from injector import Module, provider, singleton

from fsc_bounds.app import BoundService, FscBoundsApp, RuntimeConfig, SweepRunner
from fsc_bounds.solver.types import SolverOptions


class FscBoundsModule(Module):
    """Dependency injection registry for fsc-bounds."""

    def __init__(
        self,
        options: SolverOptions | None = None,
        config: RuntimeConfig | None = None,
    ) -> None:
        """Initialize the registry.

        Args:
            options: Solver options (default: ``SolverOptions()``).
            config: Runtime configuration (default: single-threaded, stdout).

        """
        self._options = options or SolverOptions()
        self._config = config or RuntimeConfig()
        self._service = BoundService(self._options)
        self._runner = SweepRunner(self._service, self._config)
        self.logger = logging.getLogger(f"fsc_bounds.{self.__class__.__name__}")
        self.logger.debug(f"options={self._options} config={self._config}")

    @provider
    def provide_solver_options(self) -> SolverOptions:
        return self._options

    @provider
    def provide_runtime_config(self) -> RuntimeConfig:
        return self._config

    @provider
    def provide_bound_service(self) -> BoundService:
        return self._service

    @provider
    def provide_sweep_runner(self) -> SweepRunner:
        return self._runner

    @singleton
    @provider
    def provide_app(
        self,
        options: SolverOptions,
        config: RuntimeConfig,
        service: BoundService,
        runner: SweepRunner,
    ) -> FscBoundsApp:
        return FscBoundsApp(options, config, service, runner)
