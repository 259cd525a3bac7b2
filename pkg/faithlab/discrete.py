"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Discrete Bayesian Network Module

Exact rational CPTs, joint and marginal tables, the cell-wise
conditional-independence defect and the faithfulness classification.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from math import prod

import numpy as np

try:
    from .config import resolution as default_resolution, retry_budget
    from .errors import (
        ModelInvariantError,
        PreconditionError,
        SearchFailureError,
        StatementError,
    )
    from .graph import (
        Dag,
        check_vertices,
        d_separated,
        enumerate_statements,
        topological_order,
    )
    from .utils import format_rational, sub_seed
except ImportError:
    from config import resolution as default_resolution, retry_budget
    from errors import (
        ModelInvariantError,
        PreconditionError,
        SearchFailureError,
        StatementError,
    )
    from graph import (
        Dag,
        check_vertices,
        d_separated,
        enumerate_statements,
        topological_order,
    )
    from utils import format_rational, sub_seed

logger = logging.getLogger(__name__)


def _describe_row(vertex, parents, cardinalities, row):
    if not parents:
        return f"CPT of {vertex}"
    states = np.unravel_index(row, [cardinalities[p] for p in parents])
    given = ", ".join(f"{p}={int(s)}" for p, s in zip(parents, states))
    return f"CPT row of {vertex} given ({given})"


@dataclass(frozen=True)
class DiscreteBn:
    """
    A Bayesian network over finite state spaces.

    `cpts[v]` holds one row per parent configuration, rows in row-major order
    over the parents of v in declared vertex order; each row is a tuple of
    Fractions over the states of v.
    """

    graph: Dag
    cardinalities: dict
    cpts: dict

    def __post_init__(self):
        cards = {}
        for v in self.graph.vertices:
            k = self.cardinalities.get(v) if self.cardinalities else None
            if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 2:
                raise ModelInvariantError(f"Cardinality of {v} must be an integer >= 2, got {k!r}")
            cards[v] = int(k)
        cpts = {}
        for v in self.graph.vertices:
            if v not in self.cpts:
                raise ModelInvariantError(f"Missing CPT for vertex {v}")
            parents = self.graph.parents(v)
            rows = tuple(tuple(Fraction(x) for x in row) for row in self.cpts[v])
            expected_rows = prod(cards[p] for p in parents)
            if len(rows) != expected_rows:
                raise ModelInvariantError(
                    f"CPT of {v} has {len(rows)} rows, expected {expected_rows} "
                    f"(one per configuration of {list(parents)})"
                )
            for i, row in enumerate(rows):
                where = _describe_row(v, parents, cards, i)
                if len(row) != cards[v]:
                    raise ModelInvariantError(
                        f"{where} has {len(row)} entries, expected {cards[v]}"
                    )
                if any(x < 0 for x in row):
                    raise ModelInvariantError(f"{where} has a negative entry")
                total = sum(row)
                if total != 1:
                    raise ModelInvariantError(
                        f"{where} sums to {format_rational(total)}, expected 1"
                    )
            cpts[v] = rows
        extra = set(self.cpts) - set(self.graph.vertices)
        if extra:
            raise ModelInvariantError(f"CPTs given for undeclared vertices {sorted(extra)}")
        object.__setattr__(self, "cardinalities", cards)
        object.__setattr__(self, "cpts", cpts)

    def cpt_array(self, v):
        """CPT of v as an object array of shape (*parent cardinalities, card(v))."""
        shape = [self.cardinalities[p] for p in self.graph.parents(v)]
        shape.append(self.cardinalities[v])
        array = np.empty(len(self.cpts[v]) * self.cardinalities[v], dtype=object)
        array[:] = [x for row in self.cpts[v] for x in row]
        return array.reshape(shape)

    def with_cpts(self, cpts):
        return DiscreteBn(self.graph, self.cardinalities, {**self.cpts, **cpts})


class JointTable:
    """
    Exact probability table over the product state space of `scope`.
    Axis i of `probabilities` indexes the states of scope[i].
    """

    def __init__(self, scope, cardinalities, probabilities):
        self.scope = tuple(scope)
        self.cardinalities = {v: int(cardinalities[v]) for v in self.scope}
        self.probabilities = np.asarray(probabilities, dtype=object)
        shape = tuple(self.cardinalities[v] for v in self.scope)
        if self.probabilities.shape != shape:
            raise ModelInvariantError(
                f"Table shape {self.probabilities.shape} does not match scope {shape}"
            )
        flat = list(self.probabilities.flat)
        if any(x < 0 for x in flat):
            raise ModelInvariantError("Joint table has a negative entry")
        total = sum(flat)
        if total != 1:
            raise ModelInvariantError(
                f"Joint table sums to {format_rational(total)}, expected 1"
            )

    def __eq__(self, other):
        if not isinstance(other, JointTable):
            return NotImplemented
        return (
            self.scope == other.scope
            and self.cardinalities == other.cardinalities
            and bool(np.array_equal(self.probabilities, other.probabilities))
        )

    def __repr__(self):
        return f"JointTable(scope={self.scope}, cells={self.probabilities.size})"

    def value(self, cell):
        """Probability of a full configuration given as {vertex: state}."""
        return self.probabilities[tuple(cell[v] for v in self.scope)]

    def cells(self):
        for index in np.ndindex(*self.probabilities.shape):
            yield dict(zip(self.scope, index)), self.probabilities[index]


def _align(array, axes, order):
    """Reshapes `array`, whose axes are labelled by `axes`, to broadcast against `order`."""
    ranked = sorted(range(len(axes)), key=lambda i: order.index(axes[i]))
    array = np.transpose(array, ranked)
    shape = [1] * len(order)
    for k, i in enumerate(ranked):
        shape[order.index(axes[i])] = array.shape[k]
    return array.reshape(shape)


def joint(bn):
    """
    The distribution map: multiplies the CPTs of every vertex into the joint
    table over the declared vertex order.
    """
    order = bn.graph.vertices
    table = np.ones([bn.cardinalities[v] for v in order], dtype=object)
    for v in topological_order(bn.graph):
        axes = bn.graph.parents(v) + (v,)
        table = table * _align(bn.cpt_array(v), axes, order)
    return JointTable(order, bn.cardinalities, table)


def marginal(t, s):
    """
    Sums out every vertex of the table's scope that is not in `s`.

    Raises:
        StatementError: `s` is not a subset of the scope.
    """
    s = frozenset(s)
    missing = s - set(t.scope)
    if missing:
        raise StatementError(f"Vertices {sorted(missing)} are not in the table scope {list(t.scope)}")
    keep = tuple(v for v in t.scope if v in s)
    axes = tuple(i for i, v in enumerate(t.scope) if v not in s)
    probabilities = t.probabilities.sum(axis=axes) if axes else t.probabilities.copy()
    return JointTable(keep, t.cardinalities, np.asarray(probabilities, dtype=object))


def _query_sets(t, a, b, c):
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    missing = (a | b | c) - set(t.scope)
    if missing:
        raise StatementError(f"Vertices {sorted(missing)} are not in the table scope {list(t.scope)}")
    if not a or not b:
        raise StatementError("Conditional independence queries need non-empty a and b")
    if a & b or a & c or b & c:
        raise StatementError(f"Query sets {sorted(a)}, {sorted(b)}, {sorted(c)} overlap")

    def ordered(s):
        return tuple(v for v in t.scope if v in s)

    return ordered(a), ordered(b), ordered(c)


def signed_defect_table(t, a, b, c):
    """
    Per-cell q = p(a, b, c) p(c) - p(a, c) p(b, c).

    Returns:
        tuple: (axes, array) where axes lists the vertices of a, b and c in
        that order and array is indexed by their states.
    """
    a, b, c = _query_sets(t, a, b, c)
    order = a + b + c

    def aligned(vertices):
        m = marginal(t, vertices)
        return _align(m.probabilities, m.scope, order)

    table = aligned(order) * aligned(c) - aligned(a + c) * aligned(b + c)
    return order, table


def ci_defect(t, a, b, c):
    """
    Max over cells of |p(a, b, c) p(c) - p(a, c) p(b, c)|. Zero exactly when
    X_a is independent of X_b given X_c.
    """
    _, table = signed_defect_table(t, a, b, c)
    return Fraction(max(abs(x) for x in table.flat))


def is_ci(t, a, b, c):
    return ci_defect(t, a, b, c) == 0


def _normalize_row(weights):
    total = int(sum(int(w) for w in weights))
    return tuple(Fraction(int(w), total) for w in weights)


def _cardinality_map(g, cards):
    if cards is None:
        return {v: 2 for v in g.vertices}
    if isinstance(cards, int):
        return {v: cards for v in g.vertices}
    return {v: cards.get(v, 2) for v in g.vertices}


def sample_parameters(g, cards, rng_seed, resolution=None):
    """
    Draws a strictly positive DiscreteBn over `g`.

    Each CPT row takes integer weights uniformly from {1, ..., M} per state and
    is normalized by their sum, so every entry is at least 1/(kM).

    Args:
        g (Dag): The graph.
        cards (dict | int | None): Cardinalities, defaulting to binary.
        rng_seed (int): Seed; equal seeds give equal networks.
        resolution (int): M, defaults to the configured resolution.
    """
    resolution = default_resolution() if resolution is None else int(resolution)
    if resolution < 2:
        raise PreconditionError(f"Resolution must be at least 2, got {resolution}")
    cards = _cardinality_map(g, cards)
    rng = np.random.default_rng(rng_seed)
    cpts = {}
    for v in g.vertices:
        rows = prod(cards[p] for p in g.parents(v))
        weights = rng.integers(1, resolution, size=(rows, cards[v]), endpoint=True)
        cpts[v] = tuple(_normalize_row(row) for row in weights)
    return DiscreteBn(g, cards, cpts)


def independent_product_bn(g, cards=None, p=None):
    """
    Every vertex ignores its parents: P(X_v = 0) = p and the remaining mass is
    split evenly over the other states (uniform when p is None).
    """
    cards = _cardinality_map(g, cards)
    cpts = {}
    for v in g.vertices:
        k = cards[v]
        if p is None:
            row = (Fraction(1, k),) * k
        else:
            p = Fraction(p)
            row = (p,) + ((1 - p) / (k - 1),) * (k - 1)
        cpts[v] = (row,) * prod(cards[u] for u in g.parents(v))
    return DiscreteBn(g, cards, cpts)


@dataclass(frozen=True)
class FaithfulnessReport:
    """Defect per enumerated statement and the resulting classification."""

    statements: tuple

    @property
    def markov_violations(self):
        return tuple((s, d) for s, d in self.statements if s.separated and d > 0)

    @property
    def unfaithful_statements(self):
        return tuple((s, d) for s, d in self.statements if not s.separated and d == 0)

    @property
    def is_faithful(self):
        return not self.markov_violations and not self.unfaithful_statements

    @property
    def min_connected_defect(self):
        defects = [d for s, d in self.statements if not s.separated]
        return min(defects) if defects else None

    def defect_of(self, a, b, c=()):
        c = frozenset(c)
        for s, d in self.statements:
            if s.a == a and s.b == b and frozenset(s.c) == c:
                return d
        raise StatementError(f"No statement ({a}, {b} | {sorted(c)}) in this report")

    def to_dict(self):
        def entry(s, d):
            return {**s.to_dict(), "defect": format_rational(d)}

        delta = self.min_connected_defect
        return {
            "is_faithful": self.is_faithful,
            "min_connected_defect": None if delta is None else format_rational(delta),
            "markov_violations": [entry(s, d) for s, d in self.markov_violations],
            "unfaithful_statements": [entry(s, d) for s, d in self.unfaithful_statements],
            "statements": [entry(s, d) for s, d in self.statements],
        }


def assess(statements, oracle):
    """
    Classifies enumerated statements with a defect oracle `oracle(a, b, c)`.
    """
    return FaithfulnessReport(tuple((s, oracle(s.a, s.b, s.c)) for s in statements))


def check_faithful(bn):
    t = joint(bn)
    return assess(
        enumerate_statements(bn.graph), lambda a, b, c: ci_defect(t, {a}, {b}, c)
    )


def _rows(table):
    return tuple(tuple(Fraction(x) for x in row) for row in table)


def _three_cards(cards, names):
    cards = cards or {}
    return {v: cards.get(v, 2) for v in names}


def deterministic_variable_bn(cards, cpt_a_given_b, cpt_c_given_b, atom=0):
    """
    B -> A, B -> C with B a point mass at `atom`: A and C are independent
    although they are d-connected.
    """
    cards = _three_cards(cards, ("A", "B", "C"))
    if not 0 <= atom < cards["B"]:
        raise ModelInvariantError(f"Atom {atom} out of range for B with {cards['B']} states")
    g = Dag(("A", "B", "C"), {("B", "A"), ("B", "C")})
    point_mass = tuple(Fraction(int(i == atom)) for i in range(cards["B"]))
    cpts = {
        "A": _rows(cpt_a_given_b),
        "B": (point_mass,),
        "C": _rows(cpt_c_given_b),
    }
    return DiscreteBn(g, cards, cpts)


def deterministic_relation_bn(cards, cpt_a_given_d, cpt_c_given_d, prior_d):
    """
    D -> A, D -> B, D -> C with B a copy of D: A and C are independent given B
    although B does not d-separate them.
    """
    cards = _three_cards(cards, ("A", "B", "C", "D"))
    if cards["B"] != cards["D"]:
        raise ModelInvariantError(
            f"B copies D, so they need equal cardinalities ({cards['B']} != {cards['D']})"
        )
    g = Dag(("A", "B", "C", "D"), {("D", "A"), ("D", "B"), ("D", "C")})
    k = cards["D"]
    identity = tuple(tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k))
    cpts = {
        "A": _rows(cpt_a_given_d),
        "B": identity,
        "C": _rows(cpt_c_given_d),
        "D": _rows([prior_d]),
    }
    return DiscreteBn(g, cards, cpts)


def dependent_binary_bn(g, a, b, c, rng_seed, budget=None, resolution=None):
    """
    Finds a binary network over `g` with X_a and X_b dependent given X_c.

    The network is Markov by construction; draws are repeated with derived
    seeds until the defect of (a, b | c) is nonzero. For a == b the
    independent product with P(X_v = 0) = 1/2 is returned.

    Raises:
        PreconditionError: a and b are d-separated given c.
        SearchFailureError: No dependent draw within the retry budget.
    """
    c = frozenset(c)
    check_vertices(g, [a, b, *c])
    cards = {v: 2 for v in g.vertices}
    if a == b:
        if a in c:
            raise StatementError(f"{a!r} cannot be both queried and conditioned on")
        return independent_product_bn(g, cards, Fraction(1, 2))
    if d_separated(g, a, b, c):
        raise PreconditionError(
            f"{a} and {b} are d-separated given {sorted(c)}; no Markov network makes them dependent"
        )
    budget = retry_budget() if budget is None else budget
    for attempt in range(budget):
        bn = sample_parameters(g, cards, sub_seed(rng_seed, attempt), resolution)
        if ci_defect(joint(bn), {a}, {b}, c) > 0:
            logger.debug(
                f"Dependent network for ({a}, {b} | {sorted(c)}) found after {attempt + 1} draw(s)"
            )
            return bn
    raise SearchFailureError(
        f"No dependent network for ({a}, {b} | {sorted(c)}) within {budget} draws"
    )
