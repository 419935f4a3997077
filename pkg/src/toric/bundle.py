"""Futaki invariant of toric test-configurations of a toric bundle.

With densities Q1 > 0 and Q2 on the polytope,

    F(f) = ½∫_∂Δ f Q1 dσ + ∫_Δ f Q2 dμ − (a1/a0)∫_Δ f Q1 dμ,

where a0 = ∫Q1 dμ and a1 = ½∫_∂Q1 dσ + ∫Q2 dμ. The interval case takes the
boundary integral as endpoint evaluation with unit weights.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import sympy

from ..core.errors import DomainError, PositivityError, UnsupportedDegreeError
from ..core.exact import ExactModel, Rational, from_sympy, to_sympy
from ..geometry.grid import PLFunction
from ..geometry.integration import X, Y, Weight, as_bivariate, boundary_integral, integrate, polygon_integral
from ..geometry.polygon import RationalPolygon
from ..geometry.polynomial import PolynomialQ, poly_integral, poly_mul, sign_on_interval


@dataclass(frozen=True)
class IntervalFunction:
    """Piecewise-linear function on [knots[0], knots[-1]] given at its knots."""

    knots: Tuple[Fraction, ...]
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        knots = tuple(Fraction(k) for k in self.knots)
        values = tuple(Fraction(v) for v in self.values)
        if len(knots) < 2 or len(knots) != len(values):
            raise DomainError("an interval function needs matching knots and values, at least two")
        if any(b <= a for a, b in zip(knots, knots[1:])):
            raise DomainError("knots must increase strictly")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "values", values)

    @classmethod
    def affine(cls, lo, hi, c0=0, c1=0) -> "IntervalFunction":
        lo, hi = Fraction(lo), Fraction(hi)
        return cls((lo, hi), (Fraction(c0) + Fraction(c1) * lo, Fraction(c0) + Fraction(c1) * hi))

    @classmethod
    def hinge(cls, lo, hi, crease) -> "IntervalFunction":
        """max(τ − crease, 0)."""
        lo, hi, crease = Fraction(lo), Fraction(hi), Fraction(crease)
        if not lo < crease < hi:
            return cls((lo, hi), (max(lo - crease, Fraction(0)), max(hi - crease, Fraction(0))))
        return cls((lo, crease, hi), (Fraction(0), Fraction(0), hi - crease))

    @property
    def lo(self) -> Fraction:
        return self.knots[0]

    @property
    def hi(self) -> Fraction:
        return self.knots[-1]

    @property
    def is_convex(self) -> bool:
        slopes = [(v1 - v0) / (k1 - k0) for k0, k1, v0, v1 in zip(self.knots, self.knots[1:], self.values, self.values[1:])]
        return all(b >= a for a, b in zip(slopes, slopes[1:]))

    def pieces(self) -> List[Tuple[Fraction, Fraction, List[Fraction]]]:
        """(left, right, ascending coefficients of the affine piece)."""
        out = []
        for k0, k1, v0, v1 in zip(self.knots, self.knots[1:], self.values, self.values[1:]):
            slope = (v1 - v0) / (k1 - k0)
            out.append((k0, k1, [v0 - slope * k0, slope]))
        return out

    def __call__(self, tau) -> Fraction:
        tau = Fraction(tau)
        for k0, k1, coeffs in self.pieces():
            if k0 <= tau <= k1:
                return coeffs[0] + coeffs[1] * tau
        raise DomainError("point outside the interval", {"tau": tau})

    def integrate(self, weight: Sequence[Fraction], power: int = 1) -> Fraction:
        total = Fraction(0)
        for k0, k1, coeffs in self.pieces():
            integrand = list(weight)
            for _ in range(power):
                integrand = poly_mul(integrand, coeffs)
            total += poly_integral(integrand, k0, k1)
        return total


class BundleFutaki(ExactModel):
    a0: Rational
    a1: Rational
    futaki: Rational
    norm_squared: Rational
    relative_futaki: Rational
    relative_norm_squared: Rational
    average: Rational


def _check_positive_interval(q1: PolynomialQ, lo: Fraction, hi: Fraction) -> None:
    if sign_on_interval(q1, lo, hi, closed=True) != 1:
        raise PositivityError("Q1 must be positive on the interval", {"Q1": str(q1), "lo": lo, "hi": hi})


def _interval_futaki(lo, hi, q1: PolynomialQ, q2: PolynomialQ, f: IntervalFunction) -> BundleFutaki:
    if (f.lo, f.hi) != (lo, hi):
        raise DomainError("function is defined on a different interval")
    _check_positive_interval(q1, lo, hi)
    w1, w2 = list(q1.coefficients), list(q2.coefficients) or [Fraction(0)]

    def futaki_of(values_at_ends, int_q1, int_q2):
        return (values_at_ends[0] * q1(lo) + values_at_ends[1] * q1(hi)) / 2 + int_q2 - a1 / a0 * int_q1

    a0 = q1.integrate(lo, hi)
    a1 = (q1(lo) + q1(hi)) / 2 + q2.integrate(lo, hi)
    f_q1 = f.integrate(w1)
    f_q2 = f.integrate(w2)
    futaki = futaki_of((f(lo), f(hi)), f_q1, f_q2)
    average = f_q1 / a0
    norm2 = f.integrate(w1, power=2) - a0 * average * average

    # projection onto affine functions in L²(Q1 dτ)
    tau_q1 = poly_mul(w1, [Fraction(0), Fraction(1)])
    m0, m1, m2 = a0, poly_integral(tau_q1, lo, hi), poly_integral(poly_mul(tau_q1, [Fraction(0), Fraction(1)]), lo, hi)
    b0, b1 = f_q1, f.integrate(tau_q1)
    det = m0 * m2 - m1 * m1
    c0 = (b0 * m2 - b1 * m1) / det
    c1 = (m0 * b1 - m1 * b0) / det
    h = IntervalFunction.affine(lo, hi, c0, c1)
    futaki_h = futaki_of((h(lo), h(hi)), h.integrate(w1), h.integrate(w2))
    proj_norm2 = c0 * b0 + c1 * b1
    return BundleFutaki(
        a0=a0,
        a1=a1,
        futaki=futaki,
        norm_squared=norm2,
        relative_futaki=futaki - futaki_h,
        relative_norm_squared=f.integrate(w1, power=2) - proj_norm2,
        average=average,
    )


def _min_on_polygon(polygon: RationalPolygon, q: sympy.Poly) -> Fraction:
    """Exact minimum of a polynomial of degree ≤ 2 over the polygon."""
    expr = q.as_expr()
    candidates = [from_sympy(expr.subs({X: to_sympy(x), Y: to_sympy(y)})) for x, y in polygon.vertices]
    tt = sympy.Symbol("tt")
    for e in polygon.edges:
        along = sympy.expand(expr.subs({
            X: to_sympy(e.start[0]) + tt * to_sympy(e.end[0] - e.start[0]),
            Y: to_sympy(e.start[1]) + tt * to_sympy(e.end[1] - e.start[1]),
        }, simultaneous=True))
        for r in sympy.solve(sympy.diff(along, tt), tt):
            if r.is_rational and 0 <= r <= 1:
                candidates.append(from_sympy(along.subs(tt, r)))
    crit = sympy.solve([sympy.diff(expr, X), sympy.diff(expr, Y)], [X, Y], dict=True)
    for sol in crit if isinstance(crit, list) else []:
        if X in sol and Y in sol and sol[X].is_rational and sol[Y].is_rational:
            point = (from_sympy(sol[X]), from_sympy(sol[Y]))
            if polygon.contains(point):
                candidates.append(from_sympy(expr.subs(sol)))
    return min(candidates)


def _polygon_futaki(polygon: RationalPolygon, q1: Weight, q2: Weight, f: PLFunction) -> BundleFutaki:
    w1 = as_bivariate(q1 if q1 is not None else 1)
    w2 = as_bivariate(q2 if q2 is not None else 0)
    if w1.total_degree() > 2:
        raise UnsupportedDegreeError("Q1 of degree above 2 leaves the exact f²·Q1 bound", {"degree": w1.total_degree()})
    if _min_on_polygon(polygon, w1) <= 0:
        raise PositivityError("Q1 must be positive on the polygon")
    e1, e2 = w1.as_expr(), w2.as_expr()

    a0 = polygon_integral(polygon, e1)
    a1 = boundary_integral(polygon, e1) / 2 + polygon_integral(polygon, e2)
    f_q1 = integrate(polygon, f, "interior", weight=e1)
    f_q2 = integrate(polygon, f, "interior", weight=e2) if not w2.is_zero else Fraction(0)
    futaki = integrate(polygon, f, "boundary", weight=e1) / 2 + f_q2 - a1 / a0 * f_q1
    average = f_q1 / a0
    f2 = integrate(polygon, f, "interior", weight=e1, power=2)
    norm2 = f2 - a0 * average * average

    # projection onto affine functions in L²(Q1 dμ)
    basis = [sympy.Integer(1), X, Y]
    gram = [[polygon_integral(polygon, sympy.expand(e1 * u * v)) for v in basis] for u in basis]
    rhs = [f_q1] + [integrate(polygon, f, "interior", weight=sympy.expand(e1 * u)) for u in basis[1:]]
    coeffs = [from_sympy(c) for c in sympy.Matrix([[to_sympy(c) for c in row] for row in gram]).LUsolve(
        sympy.Matrix([to_sympy(c) for c in rhs]))]
    h = PLFunction.affine(f.grid, *coeffs)
    h_q1 = integrate(polygon, h, "interior", weight=e1)
    h_q2 = integrate(polygon, h, "interior", weight=e2) if not w2.is_zero else Fraction(0)
    futaki_h = integrate(polygon, h, "boundary", weight=e1) / 2 + h_q2 - a1 / a0 * h_q1
    return BundleFutaki(
        a0=a0,
        a1=a1,
        futaki=futaki,
        norm_squared=norm2,
        relative_futaki=futaki - futaki_h,
        relative_norm_squared=f2 - sum(c * r for c, r in zip(coeffs, rhs)),
        average=average,
    )


def toric_bundle_futaki(
    domain: Union[RationalPolygon, Tuple[object, object]],
    q1: Union[PolynomialQ, Weight, None],
    q2: Union[PolynomialQ, Weight, None],
    f: Union[PLFunction, IntervalFunction],
) -> BundleFutaki:
    """Futaki invariant and squared norm of the test-configuration given by f.

    ``domain`` is a polygon (Q1, Q2 bivariate) or an interval ``(lo, hi)``
    (Q1, Q2 univariate ``PolynomialQ``).
    """
    if isinstance(domain, RationalPolygon):
        if not isinstance(f, PLFunction):
            raise DomainError("a polygon needs a grid function")
        return _polygon_futaki(domain, q1, q2, f)
    lo, hi = (Fraction(domain[0]), Fraction(domain[1]))
    if lo >= hi:
        raise DomainError("empty interval", {"lo": lo, "hi": hi})
    if not isinstance(f, IntervalFunction):
        raise DomainError("an interval needs an interval function")
    q1 = q1 if isinstance(q1, PolynomialQ) else PolynomialQ.of(1)
    q2 = q2 if isinstance(q2, PolynomialQ) else PolynomialQ.of(0)
    return _interval_futaki(lo, hi, q1, q2, f)
