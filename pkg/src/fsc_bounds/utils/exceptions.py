"""Exception hierarchy for fsc-bounds.

Every error a caller can act on derives from ``FscBoundsError``. Errors caused
by bad external input additionally derive from ``ValueError`` so that generic
callers can treat them as invalid arguments.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from fsc_bounds.channels.fsc import ValidationReport


class FscBoundsError(Exception):
    """Base class for all fsc-bounds errors."""


class ChannelSpecError(FscBoundsError, ValueError):
    """A channel or V-graph document could not be parsed."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")


class InvalidChannelError(FscBoundsError, ValueError):
    """A channel violates one or more input-driven FSC invariants."""

    def __init__(self, report: ValidationReport) -> None:
        self.report = report
        super().__init__("; ".join(report.messages()))


class InvalidPolicyError(FscBoundsError, ValueError):
    """A policy row is not a probability vector on the allowed inputs."""


class UnreachableStateError(FscBoundsError, ValueError):
    """Some channel state cannot be reached from the initial state."""


class EnumerationLimitError(FscBoundsError, ValueError):
    """An exact enumeration would exceed its size guard."""


class ReducibleGraphError(FscBoundsError, ValueError):
    """A constraint graph is not irreducible."""


class DimensionMismatchError(FscBoundsError, ValueError):
    """A value function does not match the channel's state set."""


class VGraphConditionError(FscBoundsError, ValueError):
    """A precondition of the single-letter V-graph bound fails."""


class NotConnectedError(VGraphConditionError):
    """The channel state graph is not strongly connected."""


class NotSingleClassError(VGraphConditionError):
    """The Q-induced product chain has more than one closed class."""


class PeriodicChainError(VGraphConditionError):
    """The closed class of the Q-induced product chain is periodic."""


class NoFeasibleQError(VGraphConditionError):
    """No aperiodic single-class input distribution exists on the V-graph."""
