"""
Project Name: Faithlab
Copyright (c) 2024 Faithlab contributors

Permission is hereby granted under MIT license.

Rational Polynomial Module

Exact univariate polynomials, interpolation through rational points and
Sturm-sequence root isolation.
"""

from dataclasses import dataclass
from fractions import Fraction

import sympy as sp

try:
    from .utils import format_rational
except ImportError:
    from utils import format_rational

LAMBDA = sp.symbols("lambda")


def _to_sympy(value):
    value = Fraction(value)
    return sp.Rational(value.numerator, value.denominator)


def _from_sympy(value):
    value = sp.Rational(value)
    return Fraction(int(value.p), int(value.q))


@dataclass(frozen=True)
class RationalPolynomial:
    """Coefficients in ascending degree, without trailing zeros."""

    coefficients: tuple = ()

    def __post_init__(self):
        coefficients = [Fraction(c) for c in self.coefficients]
        while coefficients and coefficients[-1] == 0:
            coefficients.pop()
        object.__setattr__(self, "coefficients", tuple(coefficients))

    @property
    def is_zero(self):
        return not self.coefficients

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def __call__(self, x):
        x = Fraction(x)
        result = Fraction(0)
        for c in reversed(self.coefficients):
            result = result * x + c
        return result

    def __str__(self):
        if self.is_zero:
            return "0"
        terms = []
        for k, c in enumerate(self.coefficients):
            if c == 0:
                continue
            power = "" if k == 0 else "λ" if k == 1 else f"λ^{k}"
            coefficient = format_rational(c)
            if power and c == 1:
                coefficient = ""
            elif power and c == -1:
                coefficient = "-"
            elif power:
                coefficient = f"({coefficient})" if c.denominator != 1 else coefficient
            terms.append(f"{coefficient}{power}")
        return " + ".join(terms).replace("+ -", "- ")

    def to_sympy(self):
        return sp.Poly([_to_sympy(c) for c in reversed(self.coefficients)] or [0], LAMBDA, domain=sp.QQ)

    @classmethod
    def from_sympy(cls, poly):
        return cls(tuple(_from_sympy(c) for c in reversed(poly.all_coeffs())))

    @classmethod
    def through_points(cls, points):
        """
        The unique polynomial of degree < len(points) through the (x, y) pairs.
        """
        data = [(_to_sympy(x), _to_sympy(y)) for x, y in points]
        if all(y == 0 for _, y in data):
            return cls()
        return cls.from_sympy(sp.Poly(sp.interpolate(data, LAMBDA), LAMBDA, domain=sp.QQ))

    def root_multiplicity_at_zero(self):
        k = 0
        while k < len(self.coefficients) and self.coefficients[k] == 0:
            k += 1
        return k

    def without_zero_root(self):
        """Divides out the largest power of λ that divides the polynomial."""
        return RationalPolynomial(self.coefficients[self.root_multiplicity_at_zero():])

    def to_strings(self):
        return [format_rational(c) for c in self.coefficients]


def sturm_sequence(p):
    """
    Sturm sequence of the square-free part of `p`, so that sign-change counts
    give the number of distinct real roots.
    """
    if p.is_zero:
        raise ValueError("The zero polynomial has no Sturm sequence")
    square_free = p.to_sympy().sqf_part()
    return [RationalPolynomial.from_sympy(q) for q in sp.sturm(square_free)]


def sign_changes(values):
    nonzero = [v for v in values if v != 0]
    return sum(1 for x, y in zip(nonzero, nonzero[1:]) if (x > 0) != (y > 0))


def count_roots(sequence, lo, hi):
    """Number of distinct real roots in (lo, hi]."""
    return sign_changes([q(lo) for q in sequence]) - sign_changes([q(hi) for q in sequence])


def smallest_positive_root_bound(p, precision, upper=Fraction(1)):
    """
    Certified lower bound on the smallest root of `p` in (0, upper].

    Returns `upper` when there is no root in (0, upper]. Otherwise bisects
    with exact root counts until the isolating interval (lo, hi] holding the
    smallest root is at most `precision` wide, and returns lo > 0; `p` has no
    root in (0, lo].
    """
    if precision <= 0:
        raise ValueError(f"Bisection precision must be positive, got {precision}")
    p = p.without_zero_root()
    if p.is_zero:
        raise ValueError("The zero polynomial vanishes everywhere")
    if p.degree == 0:
        return Fraction(upper)
    sequence = sturm_sequence(p)
    lo, hi = Fraction(0), Fraction(upper)
    if count_roots(sequence, lo, hi) == 0:
        return hi
    while lo == 0 or hi - lo > precision:
        mid = (lo + hi) / 2
        if count_roots(sequence, lo, mid) > 0:
            hi = mid
        else:
            lo = mid
    return lo
