"""
JSON input and output for the command line.
Finite instances arrive as {"size", "map", "topology", "S" or "target"}; every report leaves with sorted
keys so identical runs give identical bytes.
"""

import json
import logging
import sys
from typing import Any, Optional, Tuple

import networkx as nx

from core.errors import ParseError
from core.finite_space import FiniteSemiFlow, FiniteTopology, PointSet

logger = logging.getLogger(__name__)


def _require_int_list(value, what: str):
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ParseError(f"{what} must be a list of integers")
    return value


def _specialization_topology(pairs, size: int) -> FiniteTopology:
    """Preorder generated by pairs [x, y] meaning x lies in the closure of {y}."""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(size))
    for pair in pairs:
        pair = _require_int_list(pair, "'specialization' pairs")
        if len(pair) != 2 or not all(0 <= p < size for p in pair):
            raise ParseError(f"specialization pair {pair} must name two points in 0..{size - 1}")
        graph.add_edge(*pair)
    closure = nx.transitive_closure(graph, reflexive=True)
    below = nx.to_numpy_array(closure, nodelist=list(range(size)), dtype=bool)
    return FiniteTopology.from_preorder(below)


def _parse_topology(topology, size: int) -> FiniteTopology:
    """discrete, indiscrete, min_open or specialization pairs"""
    if topology == "discrete":
        return FiniteTopology.discrete(size)
    if topology == "indiscrete":
        return FiniteTopology(size, tuple(frozenset(range(size)) for _ in range(size)))
    if isinstance(topology, dict) and isinstance(topology.get("min_open"), list):
        neighbourhoods = [frozenset(_require_int_list(u, "'min_open' entries")) for u in topology["min_open"]]
        return FiniteTopology(len(neighbourhoods), tuple(neighbourhoods))
    if isinstance(topology, dict) and isinstance(topology.get("specialization"), list):
        return _specialization_topology(topology["specialization"], size)
    raise ParseError("'topology' must be \"discrete\", \"indiscrete\", {\"min_open\": [...]} or {\"specialization\": [...]}")


def parse_finite_instance(data: Any) -> Tuple[FiniteSemiFlow, FiniteTopology, Optional[PointSet]]:
    """Flow, topology and optional S from the decoded input document."""
    if not isinstance(data, dict):
        raise ParseError("input must be a JSON object")
    if "map" not in data:
        raise ParseError("input is missing 'map'")
    values = _require_int_list(data["map"], "'map'")
    size = data.get("size", len(values))
    if not isinstance(size, int):
        raise ParseError("'size' must be an integer")
    flow = FiniteSemiFlow(size, tuple(values))

    topo = _parse_topology(data.get("topology", "discrete"), size)

    if "S" in data and "target" in data and data["S"] != data["target"]:
        raise ParseError("'S' and 'target' disagree")
    target = data.get("S", data.get("target"))
    if target is not None:
        target = frozenset(_require_int_list(target, "'S'"))
    return flow, topo, target


def read_json(path) -> Any:
    """Decode a JSON file; '-' reads stdin."""
    if str(path) == "-":
        text = sys.stdin.read()
    else:
        with open(path, "r") as handle:
            text = handle.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}")


def dumps(document: Any) -> str:
    return json.dumps(document, sort_keys=True, indent=2) + "\n"


def write_json(document: Any, path=None) -> None:
    """Write to `path`, or to stdout when no path is given."""
    text = dumps(document)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    with open(path, "w") as handle:
        handle.write(text)
    logger.info("wrote %s", path)
