"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Model File Module

Reads and writes graph and model JSON. Rationals travel as "p/q" strings;
every parse error names where in the file it happened.
"""

import os
import json
import logging
from dataclasses import dataclass
from math import prod

import numpy as np

try:
    from .catalog import get_graph_entry, get_model_entry, list_graphs, list_models
    from .discrete import DiscreteBn
    from .errors import InputError, ModelInvariantError
    from .gaussian import GaussianBn
    from .graph import Admg, Dag
    from .utils import format_rational, parse_rational
except ImportError:
    from catalog import get_graph_entry, get_model_entry, list_graphs, list_models
    from discrete import DiscreteBn
    from errors import InputError, ModelInvariantError
    from gaussian import GaussianBn
    from graph import Admg, Dag
    from utils import format_rational, parse_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GraphFile:
    """A parsed Graph JSON object."""

    graph: object
    latent: frozenset = frozenset()
    cardinalities: dict = None


def load_json(source, kind="graph"):
    """
    Loads JSON from a file path or, when no such file exists, from the
    catalog entry of that name.

    Returns:
        tuple: (data, where) with `where` naming the source for messages.
    """
    if os.path.exists(source):
        try:
            with open(source, "rt") as file:
                return json.load(file), source
        except json.JSONDecodeError as e:
            raise InputError(f"{source}:{e.lineno}:{e.colno}: {e.msg}") from e
        except OSError as e:
            raise InputError(f"{source}: {e.strerror}") from e
    entry = get_model_entry(source) if kind == "model" else get_graph_entry(source)
    if entry is None:
        names = list_models() if kind == "model" else list_graphs()
        raise InputError(f"{source}: no such file or catalog {kind}, known names: {', '.join(names)}")
    logger.debug(f"Using catalog {kind} {entry['name']}")
    return entry, f"catalog:{entry['name']}"


def _expect(value, kind, where):
    if not isinstance(value, kind):
        expected = {list: "an array", dict: "an object", str: "a string"}.get(kind, kind.__name__)
        raise InputError(f"{where}: expected {expected}, got {json.dumps(value)}")
    return value


def _names(value, where):
    _expect(value, list, where)
    for i, name in enumerate(value):
        _expect(name, str, f"{where}[{i}]")
    return list(value)


def _pairs(value, where):
    pairs = []
    for i, pair in enumerate(_expect(value, list, where)):
        pair = _names(pair, f"{where}[{i}]")
        if len(pair) != 2:
            raise InputError(f"{where}[{i}]: expected a pair, got {len(pair)} names")
        pairs.append(tuple(pair))
    return pairs


def _cardinalities(data, where):
    if "cardinalities" not in data:
        return None
    cards = {}
    for v, k in _expect(data["cardinalities"], dict, f"{where}: cardinalities").items():
        if isinstance(k, bool) or not isinstance(k, int):
            raise InputError(f"{where}: cardinalities.{v}: expected an integer, got {json.dumps(k)}")
        if k < 2:
            raise ModelInvariantError(f"{where}: cardinalities.{v}: a variable needs at least 2 states, got {k}")
        cards[v] = k
    return cards


def parse_graph(data, where="graph"):
    """
    Parses a Graph JSON object into a Dag, or an Admg when "bidirected" is
    present.
    """
    _expect(data, dict, where)
    if "vertices" not in data:
        raise InputError(f"{where}: missing key 'vertices'")
    vertices = _names(data["vertices"], f"{where}: vertices")
    edges = _pairs(data.get("edges", []), f"{where}: edges")
    latent = frozenset(_names(data.get("latent", []), f"{where}: latent"))
    if "bidirected" in data:
        bidirected = _pairs(data["bidirected"], f"{where}: bidirected")
        graph = Admg(vertices, edges, bidirected)
    else:
        graph = Dag(vertices, edges)
    unknown = latent - set(vertices)
    if unknown:
        raise ModelInvariantError(f"{where}: latent vertices {sorted(unknown)} are not declared")
    cards = _cardinalities(data, where)
    if cards and set(cards) - set(vertices):
        raise ModelInvariantError(
            f"{where}: cardinalities for undeclared vertices {sorted(set(cards) - set(vertices))}"
        )
    return GraphFile(graph, latent, cards)


def _table(v, entry, where, vertices):
    parents = _names(entry.get("parents", []), f"{where}.parents")
    if len(set(parents)) != len(parents):
        raise InputError(f"{where}.parents: repeated parent")
    unknown = set(parents) - set(vertices)
    if unknown:
        raise ModelInvariantError(f"{where}.parents: undeclared vertices {sorted(unknown)}")
    if "table" not in entry:
        raise InputError(f"{where}: missing key 'table'")
    rows = []
    for i, row in enumerate(_expect(entry["table"], list, f"{where}.table")):
        _expect(row, list, f"{where}.table[{i}]")
        rows.append([parse_rational(x, f"{where}.table[{i}][{j}]") for j, x in enumerate(row)])
    return parents, rows


def _relayout(v, parents, rows, cards, declared):
    """Reorders rows from the listed parent order into declared vertex order."""
    ordered = [p for p in declared if p in parents]
    if ordered == parents:
        return rows
    expected = prod(cards[p] for p in parents)
    if len(rows) != expected:
        raise ModelInvariantError(
            f"CPT of {v} has {len(rows)} rows, expected {expected} (one per configuration of {parents})"
        )
    k = cards[v]
    if any(len(row) != k for row in rows):
        raise ModelInvariantError(f"CPT rows of {v} must all have {k} entries")
    array = np.empty(expected * k, dtype=object)
    array[:] = [x for row in rows for x in row]
    array = array.reshape([cards[p] for p in parents] + [k])
    array = array.transpose([parents.index(p) for p in ordered] + [len(parents)])
    return [list(row) for row in array.reshape(-1, k)]


def _parse_discrete(data, vertices, where):
    cpts_data = _expect(data["cpts"], dict, f"{where}: cpts")
    missing = [v for v in vertices if v not in cpts_data]
    if missing:
        raise ModelInvariantError(f"{where}: cpts missing for vertices {missing}")
    extra = set(cpts_data) - set(vertices)
    if extra:
        raise ModelInvariantError(f"{where}: cpts given for undeclared vertices {sorted(extra)}")
    listed = {}
    for v in vertices:
        entry = _expect(cpts_data[v], dict, f"{where}: cpts.{v}")
        listed[v] = _table(v, entry, f"{where}: cpts.{v}", vertices)
    cards = _cardinalities(data, where) or {}
    for v in vertices:
        if v not in cards:
            rows = listed[v][1]
            cards[v] = len(rows[0]) if rows else 0
    edges = {(p, v) for v in vertices for p in listed[v][0]}
    cpts = {v: _relayout(v, parents, rows, cards, vertices) for v, (parents, rows) in listed.items()}
    return edges, lambda graph: DiscreteBn(graph, cards, cpts)


def _parse_gaussian(data, vertices, where):
    params = _expect(data["gaussian"], dict, f"{where}: gaussian")
    missing = [v for v in vertices if v not in params]
    if missing:
        raise ModelInvariantError(f"{where}: gaussian parameters missing for vertices {missing}")
    extra = set(params) - set(vertices)
    if extra:
        raise ModelInvariantError(f"{where}: parameters given for undeclared vertices {sorted(extra)}")
    coefficients, variances = {}, {}
    for v in vertices:
        entry = _expect(params[v], dict, f"{where}: gaussian.{v}")
        parents = _expect(entry.get("parents", {}), dict, f"{where}: gaussian.{v}.parents")
        coefficients[v] = {
            p: parse_rational(beta, f"{where}: gaussian.{v}.parents.{p}") for p, beta in parents.items()
        }
        if "variance" not in entry:
            raise InputError(f"{where}: gaussian.{v}: missing key 'variance'")
        variances[v] = parse_rational(entry["variance"], f"{where}: gaussian.{v}.variance")
    edges = {(p, v) for v in vertices for p in coefficients[v]}
    return edges, lambda graph: GaussianBn(graph, coefficients, variances)


def parse_model(data, where="model"):
    """
    Parses a model file: a Graph JSON object plus either "cpts" (discrete) or
    "gaussian" parameters. The graph comes from the declared parents; an
    "edges" key, if present, must agree with them.

    Returns:
        DiscreteBn | GaussianBn: The parsed network.
    """
    _expect(data, dict, where)
    if "vertices" not in data:
        raise InputError(f"{where}: missing key 'vertices'")
    vertices = _names(data["vertices"], f"{where}: vertices")
    if ("cpts" in data) == ("gaussian" in data):
        raise InputError(f"{where}: a model needs exactly one of 'cpts' or 'gaussian'")
    if "cpts" in data:
        edges, build = _parse_discrete(data, vertices, where)
    else:
        edges, build = _parse_gaussian(data, vertices, where)
    if "edges" in data:
        declared = set(_pairs(data["edges"], f"{where}: edges"))
        if declared != edges:
            raise ModelInvariantError(
                f"{where}: edges {sorted(declared)} disagree with the parents {sorted(edges)}"
            )
    return build(Dag(vertices, edges))


def load_graph(source):
    data, where = load_json(source, "graph")
    return parse_graph(data, where)


def load_model(source):
    data, where = load_json(source, "model")
    return parse_model(data, where)


def dump_graph(graph, latent=(), cardinalities=None):
    data = {
        "vertices": list(graph.vertices),
        "edges": [list(e) for e in graph.sorted_edges()],
    }
    if isinstance(graph, Admg):
        data["bidirected"] = [list(p) for p in graph.bidirected_pairs()]
    if latent:
        data["latent"] = [v for v in graph.vertices if v in set(latent)]
    if cardinalities:
        data["cardinalities"] = {v: cardinalities[v] for v in graph.vertices}
    return data


def dump_model(model):
    """Model JSON with parents listed in declared order."""
    data = dump_graph(model.graph)
    if isinstance(model, DiscreteBn):
        data["cardinalities"] = {v: model.cardinalities[v] for v in model.graph.vertices}
        data["cpts"] = {
            v: {
                "parents": list(model.graph.parents(v)),
                "table": [[format_rational(x) for x in row] for row in model.cpts[v]],
            }
            for v in model.graph.vertices
        }
    else:
        data["gaussian"] = {
            v: {
                "parents": {p: format_rational(b) for p, b in model.coefficients[v].items()},
                "variance": format_rational(model.variances[v]),
            }
            for v in model.graph.vertices
        }
    return data
