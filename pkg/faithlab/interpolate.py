"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Markov Interpolation Module

Per-vertex mixtures of two discrete networks over one graph, exact total
variation, the dependence polynomial of a statement along a path, and a
certified bound on how long the dependence survives near the independent end.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

try:
    from .config import root_precision
    from .discrete import DiscreteBn, JointTable, ci_defect, joint, signed_defect_table
    from .errors import DegeneratePathError, InputError, ModelInvariantError, PreconditionError, StatementError
    from .graph import Dag
    from .polynomial import RationalPolynomial, smallest_positive_root_bound
    from .utils import format_rational
except ImportError:
    from config import root_precision
    from discrete import DiscreteBn, JointTable, ci_defect, joint, signed_defect_table
    from errors import DegeneratePathError, InputError, ModelInvariantError, PreconditionError, StatementError
    from graph import Dag
    from polynomial import RationalPolynomial, smallest_positive_root_bound
    from utils import format_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class InterpolationPath:
    p0: DiscreteBn
    p1: DiscreteBn

    def __post_init__(self):
        if self.p0.graph != self.p1.graph:
            raise ModelInvariantError("Interpolation endpoints must share the same graph")
        if self.p0.cardinalities != self.p1.cardinalities:
            raise ModelInvariantError("Interpolation endpoints must share the same cardinalities")

    @property
    def graph(self):
        return self.p0.graph


def _check_lambda(lam):
    lam = Fraction(lam)
    if not 0 <= lam <= 1:
        raise StatementError(f"λ must lie in [0, 1], got {format_rational(lam)}")
    return lam


def interpolate(path, lam):
    """
    Mixes every CPT row: (1 - λ) P0(X_v | pa) + λ P1(X_v | pa). The result is a
    network over the same graph, hence Markov to it.
    """
    lam = _check_lambda(lam)
    cpts = {}
    for v in path.graph.vertices:
        cpts[v] = tuple(
            tuple((1 - lam) * x + lam * y for x, y in zip(row0, row1))
            for row0, row1 in zip(path.p0.cpts[v], path.p1.cpts[v])
        )
    return DiscreteBn(path.graph, path.p0.cardinalities, cpts)


def _check_same_scope(t0, t1):
    if t0.scope != t1.scope or t0.cardinalities != t1.cardinalities:
        raise StatementError(
            f"Tables over different scopes: {list(t0.scope)} and {list(t1.scope)}"
        )


def naive_mixture(t0, t1, lam):
    """Cell-wise mixture of two joint tables; in general not Markov to any graph."""
    _check_same_scope(t0, t1)
    lam = _check_lambda(lam)
    return JointTable(
        t0.scope, t0.cardinalities, (1 - lam) * t0.probabilities + lam * t1.probabilities
    )


def tv_distance(t0, t1):
    _check_same_scope(t0, t1)
    difference = t0.probabilities - t1.probabilities
    return Fraction(sum(abs(x) for x in difference.flat)) / 2


def pseudo_distance(m0, m1):
    """Total variation between the joints of two networks over one graph."""
    InterpolationPath(m0, m1)
    return tv_distance(joint(m0), joint(m1))


def tv_bound(lam, d):
    """Upper bound 1 - (1 - λ)^d on d_TV(P_λ, P_0) for d vertices."""
    return 1 - (1 - Fraction(lam)) ** d


def expansion_joint(path, lam):
    """
    Joint of P_λ as the sum over α in {0,1}^V of (1 - λ)^(d - |α|) λ^|α| times
    the joint of the hybrid network taking vertex v from P1 when α_v = 1.
    """
    lam = _check_lambda(lam)
    vertices = path.graph.vertices
    d = len(vertices)
    total = None
    for alpha in product((0, 1), repeat=d):
        k = sum(alpha)
        weight = (1 - lam) ** (d - k) * lam**k
        if weight == 0:
            continue
        hybrid = path.p0.with_cpts(
            {v: path.p1.cpts[v] for v, chosen in zip(vertices, alpha) if chosen}
        )
        term = weight * joint(hybrid).probabilities
        total = term if total is None else total + term
    return JointTable(vertices, path.p0.cardinalities, total)


def _defect_samples(path, a, b, c):
    """
    Signed defect tables at 2|V| + 1 equally spaced λ in [0, 1], enough to
    recover every cell polynomial (degree at most 2|V|).
    """
    d = len(path.graph.vertices)
    points = [Fraction(i, 2 * d) for i in range(2 * d + 1)]
    axes, tables = None, []
    for lam in points:
        axes, table = signed_defect_table(joint(interpolate(path, lam)), a, b, c)
        tables.append(table)
    return axes, points, tables


def _cell_index(path, axes, cell):
    if set(cell) != set(axes):
        raise StatementError(
            f"Cell must assign exactly the vertices {list(axes)}, got {sorted(cell)}"
        )
    index = []
    for v in axes:
        state = cell[v]
        card = path.p0.cardinalities[v]
        if isinstance(state, bool) or not isinstance(state, (int, np.integer)) or not 0 <= state < card:
            raise StatementError(f"State {state!r} of {v} out of range for {card} states")
        index.append(int(state))
    return tuple(index)


def dependence_polynomial(path, a, b, c, cell):
    """
    q(λ) = p_λ(x_a, x_b, x_c) p_λ(x_c) - p_λ(x_a, x_c) p_λ(x_b, x_c) for one cell.

    Args:
        path (InterpolationPath): The path.
        a, b, c: Disjoint vertex sets.
        cell (dict): State of every vertex in a, b and c.

    Returns:
        RationalPolynomial: The exact polynomial in λ.
    """
    axes, points, tables = _defect_samples(path, a, b, c)
    index = _cell_index(path, axes, cell)
    return RationalPolynomial.through_points([(lam, t[index]) for lam, t in zip(points, tables)])


def cell_polynomials(path, a, b, c):
    """Every cell's dependence polynomial, keyed by the cell as {vertex: state}."""
    axes, points, tables = _defect_samples(path, a, b, c)
    result = []
    for index in np.ndindex(*tables[0].shape):
        q = RationalPolynomial.through_points([(lam, t[index]) for lam, t in zip(points, tables)])
        result.append((dict(zip(axes, index)), q))
    return result


def lambda_star(path, a, b, c, precision=None):
    """
    Certified λ* in (0, 1] such that X_a and X_b stay dependent given X_c for
    every λ in (0, λ*).

    For every cell with a nonzero polynomial, the smallest root in (0, 1] is
    isolated by Sturm sequences and bisection; the best lower bound over cells
    is returned, or 1 when some cell has no root in (0, 1].

    Raises:
        PreconditionError: P0 is dependent or P1 is independent.
        DegeneratePathError: Every cell polynomial is identically zero.
    """
    precision = root_precision() if precision is None else Fraction(precision)
    if precision <= 0:
        raise InputError(f"Root precision must be positive, got {format_rational(precision)}")
    if ci_defect(joint(path.p0), a, b, c) != 0:
        raise PreconditionError("λ* needs an independent start: P0 already violates the statement")
    if ci_defect(joint(path.p1), a, b, c) == 0:
        raise PreconditionError("λ* needs a dependent end: P1 satisfies the statement")
    axes, points, tables = _defect_samples(path, a, b, c)
    bounds = {}
    best = None
    for index in np.ndindex(*tables[0].shape):
        q = RationalPolynomial.through_points([(lam, t[index]) for lam, t in zip(points, tables)])
        if q.is_zero:
            continue
        if q not in bounds:
            bounds[q] = smallest_positive_root_bound(q, precision)
            logger.debug(f"Cell {dict(zip(axes, index))}: q(λ) = {q}, bound {format_rational(bounds[q])}")
        best = bounds[q] if best is None else max(best, bounds[q])
        if best == 1:
            break
    if best is None:
        raise DegeneratePathError("Every dependence polynomial along the path is identically zero")
    return best


def tv_convergence_profile(path, grid):
    """List of (λ, d_TV(P_λ, P_0)) over the grid."""
    grid = [_check_lambda(lam) for lam in grid]
    t0 = joint(path.p0)
    return [(lam, tv_distance(joint(interpolate(path, lam)), t0)) for lam in grid]


def _binary_network(g, cpts):
    return DiscreteBn(g, {v: 2 for v in g.vertices}, cpts)


ONE = Fraction(1)
HALF = Fraction(1, 2)
COPY = ((ONE, Fraction(0)), (Fraction(0), ONE))
FLIP = ((Fraction(0), ONE), (ONE, Fraction(0)))


def opposite_copy_path():
    """
    X -> Y with X uniform: P0 copies X into Y, P1 copies its negation. Both
    ends are dependent and the midpoint is uniform on the four cells.
    """
    g = Dag(("X", "Y"), {("X", "Y")})
    return InterpolationPath(
        _binary_network(g, {"X": ((HALF, HALF),), "Y": COPY}),
        _binary_network(g, {"X": ((HALF, HALF),), "Y": FLIP}),
    )


def common_cause_path():
    """
    A <- C -> B with C uniform: P0 copies C into A and B, P1 copies its
    negation into both. Mixing the joints breaks A independent of B given C,
    mixing the kernels does not.
    """
    g = Dag(("A", "B", "C"), {("C", "A"), ("C", "B")})
    return InterpolationPath(
        _binary_network(g, {"A": COPY, "B": COPY, "C": ((HALF, HALF),)}),
        _binary_network(g, {"A": FLIP, "B": FLIP, "C": ((HALF, HALF),)}),
    )
