"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Linear Gaussian Network Module
"""

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

try:
    from .config import resolution as default_resolution
    from .discrete import assess
    from .errors import (
        InvariantViolationError,
        ModelInvariantError,
        PreconditionError,
        StatementError,
    )
    from .graph import Dag, enumerate_statements, topological_order
    from .utils import format_rational
except ImportError:
    from config import resolution as default_resolution
    from discrete import assess
    from errors import (
        InvariantViolationError,
        ModelInvariantError,
        PreconditionError,
        StatementError,
    )
    from graph import Dag, enumerate_statements, topological_order
    from utils import format_rational

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GaussianBn:
    """
    X_v = sum of beta[v][p] * X_p over the parents p of v, plus N(0, variances[v]).
    Means are zero.
    """

    graph: Dag
    coefficients: dict
    variances: dict

    def __post_init__(self):
        coefficients = {}
        variances = {}
        for v in self.graph.vertices:
            given = self.coefficients.get(v, {})
            parents = set(self.graph.parents(v))
            if set(given) != parents:
                raise ModelInvariantError(
                    f"Coefficients of {v} are given for {sorted(given)}, "
                    f"expected exactly its parents {sorted(parents)}"
                )
            coefficients[v] = {p: Fraction(given[p]) for p in self.graph.parents(v)}
            if v not in self.variances:
                raise ModelInvariantError(f"Missing variance for vertex {v}")
            variance = Fraction(self.variances[v])
            if variance <= 0:
                raise ModelInvariantError(
                    f"Variance of {v} must be positive, got {format_rational(variance)}"
                )
            variances[v] = variance
        extra = (set(self.coefficients) | set(self.variances)) - set(self.graph.vertices)
        if extra:
            raise ModelInvariantError(f"Parameters given for undeclared vertices {sorted(extra)}")
        object.__setattr__(self, "coefficients", coefficients)
        object.__setattr__(self, "variances", variances)


def is_positive_definite(entries):
    """
    Exact test through Gaussian elimination without pivoting: a symmetric
    matrix is positive definite iff every pivot is positive.
    """
    a = [[Fraction(x) for x in row] for row in entries]
    n = len(a)
    for i in range(n):
        pivot = a[i][i]
        if pivot <= 0:
            return False
        for j in range(i + 1, n):
            factor = a[j][i] / pivot
            if factor:
                for k in range(i, n):
                    a[j][k] -= factor * a[i][k]
    return True


class CovarianceMatrix:
    """Symmetric positive definite rational matrix indexed by `scope`."""

    def __init__(self, scope, entries):
        self.scope = tuple(scope)
        self.entries = np.asarray(entries, dtype=object)
        n = len(self.scope)
        if self.entries.shape != (n, n):
            raise ModelInvariantError(
                f"Covariance shape {self.entries.shape} does not match scope of size {n}"
            )
        if not bool(np.array_equal(self.entries, self.entries.T)):
            raise ModelInvariantError("Covariance matrix is not symmetric")
        if not is_positive_definite(self.entries.tolist()):
            raise ModelInvariantError("Covariance matrix is not positive definite")
        self._index = {v: i for i, v in enumerate(self.scope)}

    def __eq__(self, other):
        if not isinstance(other, CovarianceMatrix):
            return NotImplemented
        return self.scope == other.scope and bool(np.array_equal(self.entries, other.entries))

    def __repr__(self):
        return f"CovarianceMatrix(scope={self.scope})"

    def __getitem__(self, pair):
        u, v = pair
        return self.entries[self._index[u], self._index[v]]

    def block(self, rows, cols):
        return self.entries[np.ix_([self._index[v] for v in rows], [self._index[v] for v in cols])]

    def submatrix(self, vertices):
        """Covariance of the marginal over `vertices`, kept in scope order."""
        missing = set(vertices) - set(self.scope)
        if missing:
            raise StatementError(f"Vertices {sorted(missing)} are not in the covariance scope")
        keep = tuple(v for v in self.scope if v in set(vertices))
        return CovarianceMatrix(keep, self.block(keep, keep))


def covariance(bn):
    """
    Covariance of a GaussianBn by recursion along a topological order:
    Cov(v, u) = sum_p beta_vp Cov(p, u) for every u before v, and
    Var(v) = sigma_v^2 + sum_p beta_vp Cov(v, p).
    """
    sigma = {}
    done = []
    for v in topological_order(bn.graph):
        beta = bn.coefficients[v]
        for u in done:
            value = sum((b * sigma[p, u] for p, b in beta.items()), Fraction(0))
            sigma[v, u] = sigma[u, v] = value
        sigma[v, v] = bn.variances[v] + sum(
            (b * sigma[v, p] for p, b in beta.items()), Fraction(0)
        )
        done.append(v)
    order = bn.graph.vertices
    return CovarianceMatrix(order, [[sigma[u, v] for v in order] for u in order])


def _inverse(x):
    """Gauss-Jordan inverse over the rationals."""
    n = x.shape[0]
    x = x.copy()
    y = np.array([[Fraction(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    for i in range(n):
        pivot_row = next((j for j in range(i, n) if x[j, i] != 0), None)
        if pivot_row is None:
            raise InvariantViolationError("Conditioning block of the covariance is singular")
        if pivot_row != i:
            x[[i, pivot_row]] = x[[pivot_row, i]]
            y[[i, pivot_row]] = y[[pivot_row, i]]
        pivot = x[i, i]
        y[i, :] = y[i, :] / pivot
        x[i, :] = x[i, :] / pivot
        for j in range(n):
            if j != i and x[j, i] != 0:
                factor = x[j, i]
                y[j, :] = y[j, :] - factor * y[i, :]
                x[j, :] = x[j, :] - factor * x[i, :]
    return y


def _query_sets(m, a, b, c):
    a, b, c = frozenset(a), frozenset(b), frozenset(c)
    missing = (a | b | c) - set(m.scope)
    if missing:
        raise StatementError(f"Vertices {sorted(missing)} are not in the covariance scope")
    if not a or not b:
        raise StatementError("Conditional independence queries need non-empty a and b")
    if a & b or a & c or b & c:
        raise StatementError(f"Query sets {sorted(a)}, {sorted(b)}, {sorted(c)} overlap")

    def ordered(s):
        return tuple(v for v in m.scope if v in s)

    return ordered(a), ordered(b), ordered(c)


def conditional_covariance(m, a, b, c):
    """
    Schur complement Sigma_ab - Sigma_ac Sigma_cc^-1 Sigma_cb.

    Returns:
        numpy.ndarray: Object array of Fractions, rows over a and columns over
        b, each in scope order.
    """
    a, b, c = _query_sets(m, a, b, c)
    result = m.block(a, b)
    if not c:
        return result.copy()
    inverse = _inverse(m.block(c, c))
    return result - m.block(a, c).dot(inverse).dot(m.block(c, b))


def covariance_defect(m, a, b, c):
    block = conditional_covariance(m, a, b, c)
    return Fraction(max(abs(x) for x in block.flat))


def ci_defect_gaussian(bn, a, b, c):
    """
    Max absolute entry of the conditional covariance; zero exactly when
    X_a and X_b are independent given X_c.
    """
    return covariance_defect(covariance(bn), a, b, c)


def check_faithful_gaussian(bn):
    m = covariance(bn)
    return assess(
        enumerate_statements(bn.graph), lambda a, b, c: covariance_defect(m, {a}, {b}, c)
    )


def cancelling_paths_bn(beta_ab, beta_bc, variances=(1, 1, 1)):
    """
    A -> B -> C plus A -> C with beta_AC = -beta_AB * beta_BC, so the two
    paths cancel and Cov(A, C) = 0.

    Args:
        beta_ab: Coefficient of A in B.
        beta_bc: Coefficient of B in C.
        variances: Noise variances of A, B and C.
    """
    beta_ab, beta_bc = Fraction(beta_ab), Fraction(beta_bc)
    g = Dag(("A", "B", "C"), {("A", "B"), ("B", "C"), ("A", "C")})
    return GaussianBn(
        g,
        {"A": {}, "B": {"A": beta_ab}, "C": {"A": -beta_ab * beta_bc, "B": beta_bc}},
        dict(zip(("A", "B", "C"), variances)),
    )


def sample_parameters_gaussian(g, rng_seed, resolution=None):
    """
    Draws a GaussianBn over `g`: every coefficient is +-k/M with k uniform in
    {1, ..., 2M}, every variance is k/M with k uniform in {ceil(M/2), ..., 2M}.
    Parameters are drawn vertex by vertex in declared order.
    """
    resolution = default_resolution() if resolution is None else int(resolution)
    if resolution < 2:
        raise PreconditionError(f"Resolution must be at least 2, got {resolution}")
    rng = np.random.default_rng(rng_seed)
    coefficients = {}
    variances = {}
    for v in g.vertices:
        beta = {}
        for p in g.parents(v):
            k = int(rng.integers(1, 2 * resolution, endpoint=True))
            sign = 1 if rng.integers(0, 2) else -1
            beta[p] = Fraction(sign * k, resolution)
        coefficients[v] = beta
        k = int(rng.integers((resolution + 1) // 2, 2 * resolution, endpoint=True))
        variances[v] = Fraction(k, resolution)
    return GaussianBn(g, coefficients, variances)
