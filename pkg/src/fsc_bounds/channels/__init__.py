"""Input-driven finite-state channels, RLL constraints and V-graphs."""

from fsc_bounds.channels.fsc import Fsc, ValidationReport, ViolationKind, validate
from fsc_bounds.channels.loader import dump_channel, load_channel, load_vgraph
from fsc_bounds.channels.rll import (
    INFINITY,
    ConstraintGraph,
    DmcKind,
    RllSpec,
    constraint_graph,
    make_dmc,
    make_identity_channel,
    make_rll_dmc,
    rll_admissible,
)
from fsc_bounds.channels.vgraph import (
    VGraph,
    constraint_vgraph,
    input_memory_vgraph,
    trivial_vgraph,
)

__all__ = [
    "INFINITY",
    "ConstraintGraph",
    "DmcKind",
    "Fsc",
    "RllSpec",
    "VGraph",
    "ValidationReport",
    "ViolationKind",
    "constraint_graph",
    "constraint_vgraph",
    "dump_channel",
    "input_memory_vgraph",
    "load_channel",
    "load_vgraph",
    "make_dmc",
    "make_identity_channel",
    "make_rll_dmc",
    "rll_admissible",
    "trivial_vgraph",
    "validate",
]
