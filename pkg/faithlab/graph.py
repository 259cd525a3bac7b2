"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Graph Module

Directed acyclic graphs, acyclic directed mixed graphs, d-/m-separation
oracles and latent projection. All iteration orders follow the declared
vertex order.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import networkx as nx

try:
    from .config import max_vertices
    from .errors import (
        ModelInvariantError,
        SizeLimitError,
        StatementError,
        UnknownVertexError,
    )
except ImportError:
    from config import max_vertices
    from errors import (
        ModelInvariantError,
        SizeLimitError,
        StatementError,
        UnknownVertexError,
    )

logger = logging.getLogger(__name__)

TAIL = "tail"
HEAD = "head"


def _check_labels(vertices):
    for v in vertices:
        if not isinstance(v, str) or not v:
            raise ModelInvariantError(f"Vertex labels must be non-empty strings, got {v!r}")
    if len(set(vertices)) != len(vertices):
        duplicates = sorted({v for v in vertices if vertices.count(v) > 1})
        raise ModelInvariantError(f"Duplicate vertex labels: {duplicates}")


def _check_endpoints(vertices, pairs, kind):
    declared = set(vertices)
    for pair in pairs:
        x, y = tuple(pair) if len(pair) == 2 else (None, None)
        if x is None or x == y:
            raise ModelInvariantError(f"Self-loop or malformed {kind} edge: {sorted(pair)}")
        for endpoint in (x, y):
            if endpoint not in declared:
                raise ModelInvariantError(
                    f"{kind.capitalize()} edge {x}-{y} uses undeclared vertex {endpoint!r}"
                )


class _Graph:
    """Shared lookups for Dag and Admg."""

    @cached_property
    def index(self):
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def digraph(self):
        g = nx.DiGraph()
        g.add_nodes_from(self.vertices)
        g.add_edges_from(sorted(self.directed, key=self._edge_key))
        return g

    def _edge_key(self, edge):
        return (self.index[edge[0]], self.index[edge[1]])

    def _sorted(self, vertices):
        return tuple(sorted(vertices, key=self.index.__getitem__))

    def parents(self, v):
        return self._sorted(self.digraph.predecessors(v))

    def children(self, v):
        return self._sorted(self.digraph.successors(v))

    def spouses(self, v):
        return ()

    def sorted_edges(self):
        return sorted(self.directed, key=self._edge_key)


@dataclass(frozen=True)
class Dag(_Graph):
    vertices: tuple
    edges: frozenset

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", frozenset(tuple(e) for e in self.edges))
        _check_labels(self.vertices)
        _check_endpoints(self.vertices, self.edges, "directed")
        topological_order(self)

    @property
    def directed(self):
        return self.edges


@dataclass(frozen=True)
class Admg(_Graph):
    vertices: tuple
    directed: frozenset
    bidirected: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "directed", frozenset(tuple(e) for e in self.directed))
        object.__setattr__(
            self, "bidirected", frozenset(frozenset(p) for p in self.bidirected)
        )
        _check_labels(self.vertices)
        _check_endpoints(self.vertices, self.directed, "directed")
        _check_endpoints(self.vertices, self.bidirected, "bidirected")
        topological_order(self)

    @cached_property
    def _spouse_map(self):
        spouses = {v: set() for v in self.vertices}
        for pair in self.bidirected:
            x, y = tuple(pair)
            spouses[x].add(y)
            spouses[y].add(x)
        return {v: self._sorted(s) for v, s in spouses.items()}

    def spouses(self, v):
        return self._spouse_map[v]

    def bidirected_pairs(self):
        pairs = [self._sorted(p) for p in self.bidirected]
        return sorted(pairs, key=lambda p: (self.index[p[0]], self.index[p[1]]))


@dataclass(frozen=True)
class SeparationStatement:
    a: str
    b: str
    c: tuple
    separated: bool

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(self.c))
        if self.a == self.b:
            raise StatementError(f"Statement needs two distinct vertices, got {self.a!r} twice")
        if self.a in self.c or self.b in self.c:
            raise StatementError(f"Conditioning set {list(self.c)} overlaps {self.a!r}/{self.b!r}")

    def __str__(self):
        return f"({self.a}, {self.b} | {{{', '.join(self.c)}}})"

    def key(self):
        return (self.a, self.b, self.c)

    def to_dict(self):
        return {"a": self.a, "b": self.b, "c": list(self.c), "separated": self.separated}


def check_vertices(g, vertices):
    for v in vertices:
        if v not in g.index:
            raise UnknownVertexError(f"Unknown vertex {v!r}")


def _check_statement(g, a, b, c):
    c = frozenset(c)
    check_vertices(g, [a, b, *c])
    if a == b:
        raise StatementError(f"Query needs two distinct vertices, got {a!r} twice")
    if a in c or b in c:
        raise StatementError(f"Conditioning set {sorted(c)} overlaps {a!r}/{b!r}")
    return c


def topological_order(g):
    """
    Kahn ordering with ties broken by declared vertex order.

    Raises:
        ModelInvariantError: The directed part has a cycle.
    """
    try:
        return list(nx.lexicographical_topological_sort(g.digraph, key=g.index.get))
    except nx.NetworkXUnfeasible:
        cycle = nx.find_cycle(g.digraph)
        path = " -> ".join([edge[0] for edge in cycle] + [cycle[0][0]])
        raise ModelInvariantError(f"Graph has a directed cycle: {path}") from None


def ancestors(g, s):
    s = frozenset(s)
    check_vertices(g, s)
    result = set(s)
    for v in s:
        result |= nx.ancestors(g.digraph, v)
    return frozenset(result)


def descendants(g, s):
    s = frozenset(s)
    check_vertices(g, s)
    result = set(s)
    for v in s:
        result |= nx.descendants(g.digraph, v)
    return frozenset(result)


def _connected(g, a, b, c):
    # Reachability over (vertex, arrived-with-arrowhead) states. A vertex is a
    # collider when both the arriving and the leaving edge carry an arrowhead
    # at it; colliders pass iff they are ancestors of c, others iff not in c.
    anc_c = ancestors(g, c)
    stack = [(w, True) for w in g.children(a)]
    stack += [(w, False) for w in g.parents(a)]
    stack += [(w, True) for w in g.spouses(a)]
    visited = set()
    while stack:
        state = stack.pop()
        if state in visited:
            continue
        visited.add(state)
        v, head = state
        if v == b:
            return True
        if v not in c:
            stack.extend((w, True) for w in g.children(v))
            if not head:
                stack.extend((w, False) for w in g.parents(v))
                stack.extend((w, True) for w in g.spouses(v))
        if head and v in anc_c:
            stack.extend((w, False) for w in g.parents(v))
            stack.extend((w, True) for w in g.spouses(v))
    return False


def d_separated(g, a, b, c):
    """
    Decides whether `a` and `b` are d-separated given `c`.

    Args:
        g (Dag): The graph.
        a (str): First vertex.
        b (str): Second vertex.
        c (iterable): Conditioning vertices, disjoint from {a, b}.

    Returns:
        bool: True iff every path between a and b is blocked by c.
    """
    c = _check_statement(g, a, b, c)
    return not _connected(g, a, b, c)


def m_separated(g, a, b, c):
    """
    m-separation in an ADMG: colliders are vertices with arrowheads from both
    sides, whether the edges are directed or bidirected.
    """
    c = _check_statement(g, a, b, c)
    return not _connected(g, a, b, c)


def _marked_adjacency(g):
    adjacency = {v: [] for v in g.vertices}
    for tail, head in g.sorted_edges():
        adjacency[tail].append((head, TAIL, HEAD))
        adjacency[head].append((tail, HEAD, TAIL))
    if isinstance(g, Admg):
        for x, y in g.bidirected_pairs():
            adjacency[x].append((y, HEAD, HEAD))
            adjacency[y].append((x, HEAD, HEAD))
    return adjacency


def _simple_paths(adjacency, a, b):
    """Yields every simple path from a to b as a list of (vertex, mark_out, mark_in)."""
    stack = [(a, [], {a})]
    while stack:
        v, steps, on_path = stack.pop()
        for w, mark_at_v, mark_at_w in adjacency[v]:
            if w in on_path:
                continue
            path = steps + [(v, mark_at_v, mark_at_w)]
            if w == b:
                yield path
            else:
                stack.append((w, path, on_path | {w}))


def _path_blocked(path, c, opened):
    for (_, _, arriving), (v, leaving, _) in zip(path, path[1:]):
        collider = arriving == HEAD and leaving == HEAD
        if collider and not opened[v]:
            return True
        if not collider and v in c:
            return True
    return False


def _separated_bruteforce(g, a, b, c):
    c = _check_statement(g, a, b, c)
    # a collider opens when it or one of its descendants is conditioned on
    opened = {v: bool(descendants(g, {v}) & c) for v in g.vertices}
    adjacency = _marked_adjacency(g)
    return all(_path_blocked(path, c, opened) for path in _simple_paths(adjacency, a, b))


def d_separated_bruteforce(g, a, b, c):
    """
    Exhaustive oracle: enumerates every simple path between a and b and applies
    the blocking rule literally. Meant for graphs of at most eight vertices.
    """
    return _separated_bruteforce(g, a, b, c)


def m_separated_bruteforce(g, a, b, c):
    return _separated_bruteforce(g, a, b, c)


def _check_sets(g, A, B, C):
    A, B, C = frozenset(A), frozenset(B), frozenset(C)
    check_vertices(g, A | B | C)
    if not A or not B:
        raise StatementError("Set-level queries need non-empty A and B")
    if A & B or A & C or B & C:
        raise StatementError(f"Query sets {sorted(A)}, {sorted(B)}, {sorted(C)} overlap")
    return A, B, C


def d_separated_sets(g, A, B, C):
    A, B, C = _check_sets(g, A, B, C)
    return all(not _connected(g, a, b, C) for a in A for b in B)


def d_separated_sets_bruteforce(g, A, B, C):
    A, B, C = _check_sets(g, A, B, C)
    return all(_separated_bruteforce(g, a, b, C) for a in A for b in B)


def latent_project(g, observed):
    """
    Projects a DAG onto its observed vertices.

    Args:
        g (Dag): DAG over observed and latent vertices.
        observed (iterable): The observed vertices.

    Returns:
        Admg: a -> b for every directed path whose intermediate vertices are all
        latent; a <-> b for every bifurcation through latent vertices only.
    """
    observed = frozenset(observed)
    missing = observed - set(g.vertices)
    if missing:
        raise StatementError(f"Observed vertices {sorted(missing)} are not in the graph")
    vertices = tuple(v for v in g.vertices if v in observed)

    def observed_reach(source):
        hits, seen = set(), set()
        stack = list(g.children(source))
        while stack:
            w = stack.pop()
            if w in seen:
                continue
            seen.add(w)
            if w in observed:
                hits.add(w)
            else:
                stack.extend(g.children(w))
        return hits

    directed = {(v, w) for v in vertices for w in observed_reach(v)}
    bidirected = set()
    for w in g.vertices:
        if w in observed:
            continue
        hits = sorted(observed_reach(w), key=g.index.__getitem__)
        bidirected.update(frozenset(pair) for pair in combinations(hits, 2))
    logger.debug(
        f"Latent projection onto {list(vertices)}: {len(directed)} directed, "
        f"{len(bidirected)} bidirected edges"
    )
    return Admg(vertices, directed, bidirected)


def enumerate_statements(g):
    """
    Lists every singleton statement (a, b | C) with a before b in declared order
    and C ranging over all subsets of the remaining vertices.

    Raises:
        SizeLimitError: The graph has more vertices than the configured limit.
    """
    n = len(g.vertices)
    limit = max_vertices()
    if n > limit:
        raise SizeLimitError(
            f"Refusing to enumerate statements over {n} vertices (limit {limit})"
        )
    statements = []
    for i, a in enumerate(g.vertices):
        for b in g.vertices[i + 1 :]:
            rest = [v for v in g.vertices if v not in (a, b)]
            for size in range(len(rest) + 1):
                for c in combinations(rest, size):
                    statements.append(
                        SeparationStatement(a, b, c, not _connected(g, a, b, frozenset(c)))
                    )
    return statements
