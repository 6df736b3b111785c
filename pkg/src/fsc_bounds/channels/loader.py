"""Loaders for channel-spec and V-graph documents (JSON).

Channel document keys::

    states, inputs, outputs          lists of symbol names
    initial_state                    a state name
    next_state                       {"state,input": state}
    emission                         {"state,input": [p_y for y in outputs]}
    allowed (optional)               {state: [inputs]}

Probabilities may be decimal strings or numbers. A row whose sum is off by
more than 1e-9 is rejected; smaller drift is renormalized.

V-graph document keys: ``vertices``, ``phi`` ({"vertex,input": vertex}) and
optional ``v0``.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, TypedDict, cast

import numpy as np

from fsc_bounds.channels.fsc import MISSING, Fsc, validate
from fsc_bounds.channels.vgraph import NO_EDGE, VGraph
from fsc_bounds.utils.exceptions import ChannelSpecError

ROW_REJECT_TOLERANCE = 1e-9

logger = logging.getLogger("fsc_bounds.ChannelLoader")


class ChannelDocument(TypedDict, total=False):
    """TypedDict for a channel-spec document."""

    states: list[str]
    inputs: list[str]
    outputs: list[str]
    initial_state: str
    next_state: dict[str, str]
    emission: dict[str, list[str | float]]
    allowed: dict[str, list[str]]
    name: str


class VGraphDocument(TypedDict, total=False):
    """TypedDict for a V-graph document."""

    vertices: list[str]
    phi: dict[str, str]
    v0: str
    name: str


def _line_of(text: str, token: str, section: str | None = None) -> int | None:
    """1-based line of the first ``"token"`` in ``text``.

    With ``section`` the search starts at the line of ``"section"``, so keys
    repeated across sections resolve to the right one.
    """
    start = (_line_of(text, section) or 1) if section else 1
    needle = json.dumps(token)
    for number, line in enumerate(text.splitlines(), start=1):
        if number >= start and needle in line:
            return number
    return None


def _decode(text: str) -> dict[str, Any]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ChannelSpecError(f"invalid JSON: {e.msg}", line=e.lineno) from e
    if not isinstance(data, dict):
        raise ChannelSpecError("document must be a JSON object", line=1)
    return cast("dict[str, Any]", data)


def _names(text: str, data: dict[str, Any], key: str) -> list[str]:
    value = data.get(key)
    if not isinstance(value, list) or not value:
        raise ChannelSpecError(
            f"'{key}' must be a non-empty list of names", line=_line_of(text, key)
        )
    names = [str(v) for v in value]
    if len(set(names)) != len(names):
        raise ChannelSpecError(f"'{key}' has duplicate names", line=_line_of(text, key))
    return names


def _index(
    text: str,
    names: list[str],
    name: str,
    what: str,
    context: str,
    section: str | None = None,
) -> int:
    try:
        return names.index(str(name))
    except ValueError:
        raise ChannelSpecError(
            f"unknown {what} {name!r} in {context}",
            line=_line_of(text, context, section),
        ) from None


def _pair(
    text: str,
    key: str,
    left: list[str],
    right: list[str],
    what: tuple[str, str],
    section: str,
) -> tuple[int, int]:
    parts = [p.strip() for p in key.split(",")]
    if len(parts) != 2:
        raise ChannelSpecError(
            f"key {key!r} must look like '{what[0]},{what[1]}'",
            line=_line_of(text, key, section),
        )
    return (
        _index(text, left, parts[0], what[0], key, section),
        _index(text, right, parts[1], what[1], key, section),
    )


def _probability_row(text: str, key: str, raw: Any, n_outputs: int) -> list[float]:
    if not isinstance(raw, list) or len(raw) != n_outputs:
        raise ChannelSpecError(
            f"emission {key!r} must list {n_outputs} probabilities",
            line=_line_of(text, key, "emission"),
        )
    try:
        row = [float(str(p)) for p in raw]
    except ValueError as e:
        raise ChannelSpecError(
            f"emission {key!r}: {e}", line=_line_of(text, key, "emission")
        ) from e
    if any(not 0.0 <= p <= 1.0 for p in row):
        raise ChannelSpecError(
            f"emission {key!r} has probabilities outside [0,1]",
            line=_line_of(text, key, "emission"),
        )
    total = sum(row)
    if abs(total - 1.0) > ROW_REJECT_TOLERANCE:
        raise ChannelSpecError(
            f"emission {key!r} sums to {total:.12g}, off by more than "
            f"{ROW_REJECT_TOLERANCE:g}",
            line=_line_of(text, key, "emission"),
        )
    if total != 1.0:
        logger.debug(f"renormalizing emission {key!r} (sum {total!r})")
        row = [p / total for p in row]
    return row


def parse_channel(text: str, name: str = "") -> Fsc:
    """Parse a channel document; the result may still fail ``validate``."""
    data = cast("ChannelDocument", _decode(text))
    raw = cast("dict[str, Any]", data)
    states = _names(text, raw, "states")
    inputs = _names(text, raw, "inputs")
    outputs = _names(text, raw, "outputs")
    n_s, n_x, n_y = len(states), len(inputs), len(outputs)

    if "initial_state" not in raw:
        raise ChannelSpecError("missing 'initial_state'", line=1)
    s0 = _index(text, states, raw["initial_state"], "state", "initial_state")

    next_state = np.full((n_s, n_x), MISSING, dtype=np.int64)
    transitions = raw.get("next_state")
    if not isinstance(transitions, dict):
        raise ChannelSpecError(
            "'next_state' must be an object", line=_line_of(text, "next_state")
        )
    for key, target in transitions.items():
        s, x = _pair(text, key, states, inputs, ("state", "input"), "next_state")
        next_state[s, x] = _index(text, states, target, "state", key, "next_state")

    emission = np.zeros((n_s, n_x, n_y), dtype=np.float64)
    rows = raw.get("emission")
    if not isinstance(rows, dict):
        raise ChannelSpecError(
            "'emission' must be an object", line=_line_of(text, "emission")
        )
    seen: set[tuple[int, int]] = set()
    for key, row in rows.items():
        s, x = _pair(text, key, states, inputs, ("state", "input"), "emission")
        emission[s, x] = _probability_row(text, key, row, n_y)
        seen.add((s, x))
    for s in range(n_s):
        for x in range(n_x):
            if (s, x) not in seen:
                raise ChannelSpecError(
                    f"emission missing for '{states[s]},{inputs[x]}'",
                    line=_line_of(text, "emission"),
                )

    allowed = np.ones((n_s, n_x), dtype=bool)
    masks = raw.get("allowed")
    if masks is not None:
        if not isinstance(masks, dict):
            raise ChannelSpecError(
                "'allowed' must be an object", line=_line_of(text, "allowed")
            )
        for state_name, symbols in masks.items():
            s = _index(text, states, state_name, "state", "allowed")
            allowed[s] = False
            for symbol in symbols:
                allowed[s, _index(text, inputs, symbol, "input", "allowed")] = True

    return Fsc(
        next_state=next_state,
        emission=emission,
        initial_state=s0,
        allowed=allowed,
        state_names=tuple(states),
        input_names=tuple(inputs),
        output_names=tuple(outputs),
        name=str(raw.get("name", name)),
    )


def load_channel(path: str | Path, check: bool = True) -> Fsc:
    """Load a channel document from ``path``.

    Raises
    ------
        ChannelSpecError: If the document cannot be parsed.
        InvalidChannelError: If ``check`` is set and the channel is invalid.

    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        logger.error(f"Channel file not found: {path}")
        raise ChannelSpecError(f"channel file not found: {path}") from None
    except OSError as e:
        logger.error(f"Cannot read channel file {path}: {e}")
        raise ChannelSpecError(f"cannot read channel file {path}: {e.strerror}") from e
    fsc = parse_channel(text, name=path.stem)
    if check:
        validate(fsc).raise_if_invalid()
    logger.info(f"Loaded channel {fsc.describe()} from {path}")
    return fsc


def channel_document(fsc: Fsc) -> ChannelDocument:
    """The document form of a channel (inverse of ``parse_channel``)."""
    states, inputs = fsc.state_names, fsc.input_names
    doc: ChannelDocument = {
        "name": fsc.name,
        "states": list(states),
        "inputs": list(inputs),
        "outputs": list(fsc.output_names),
        "initial_state": states[fsc.initial_state],
        "next_state": {
            f"{states[s]},{inputs[x]}": states[fsc.step(s, x)]
            for s in range(fsc.n_states)
            for x in range(fsc.n_inputs)
        },
        "emission": {
            f"{states[s]},{inputs[x]}": [repr(float(p)) for p in fsc.emission[s, x]]
            for s in range(fsc.n_states)
            for x in range(fsc.n_inputs)
        },
    }
    if not fsc.allowed_mask.all():
        doc["allowed"] = {
            states[s]: [inputs[x] for x in fsc.allowed_inputs(s)]
            for s in range(fsc.n_states)
        }
    return doc


def dump_channel(fsc: Fsc, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(channel_document(fsc), indent=2) + "\n", encoding="utf-8"
    )


def parse_vgraph(text: str, n_inputs: int, input_names: tuple[str, ...]) -> VGraph:
    """Parse a V-graph document against a channel's input alphabet."""
    data = cast("VGraphDocument", _decode(text))
    raw = cast("dict[str, Any]", data)
    vertices = _names(text, raw, "vertices")
    inputs = list(input_names) if input_names else [str(x) for x in range(n_inputs)]
    phi = np.full((len(vertices), n_inputs), NO_EDGE, dtype=np.int64)
    edges = raw.get("phi")
    if not isinstance(edges, dict):
        raise ChannelSpecError("'phi' must be an object", line=_line_of(text, "phi"))
    for key, target in edges.items():
        v, x = _pair(text, key, vertices, inputs, ("vertex", "input"), "phi")
        phi[v, x] = _index(text, vertices, target, "vertex", key, "phi")
    v0 = 0
    if "v0" in raw:
        v0 = _index(text, vertices, raw["v0"], "vertex", "v0")
    try:
        return VGraph(
            phi=phi,
            v0=v0,
            vertex_names=tuple(vertices),
            name=str(raw.get("name", "")),
        )
    except ValueError as e:
        raise ChannelSpecError(str(e)) from e


def load_vgraph(path: str | Path, fsc: Fsc) -> VGraph:
    """Load a V-graph document for use with ``fsc``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        logger.error(f"V-graph file not found: {path}")
        raise ChannelSpecError(f"V-graph file not found: {path}") from None
    except OSError as e:
        logger.error(f"Cannot read V-graph file {path}: {e}")
        raise ChannelSpecError(f"cannot read V-graph file {path}: {e.strerror}") from e
    return parse_vgraph(text, fsc.n_inputs, fsc.input_names)
