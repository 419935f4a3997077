"""The toric stability functional L(f) = ∫_∂P f dσ − ∫_P A f dμ and its affine data."""
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import sympy

from ..core.exact import ExactModel, Rational, from_sympy, to_sympy
from ..geometry.grid import PLFunction, PolygonGrid
from ..geometry.integration import X, Y, boundary_integral, integrate, polygon_integral
from ..geometry.polygon import Point, RationalPolygon

MONOMIALS = ("1", "x", "y")


class ExtremalAffine(ExactModel):
    """A(x, y) = a0 + a1·x + a2·y."""

    a0: Rational
    a1: Rational = Fraction(0)
    a2: Rational = Fraction(0)

    @classmethod
    def constant(cls, a) -> "ExtremalAffine":
        return cls(a0=Fraction(a))

    @property
    def is_constant(self) -> bool:
        return self.a1 == 0 and self.a2 == 0

    def __call__(self, p: Point):
        return self.a0 + self.a1 * p[0] + self.a2 * p[1]

    def as_expr(self) -> sympy.Expr:
        return to_sympy(self.a0) + to_sympy(self.a1) * X + to_sympy(self.a2) * Y


@lru_cache(maxsize=64)
def gram_matrix(polygon: RationalPolygon) -> Tuple[Tuple[Fraction, ...], ...]:
    """L²(P, dμ) inner products of 1, x, y."""
    products = [[f"({a})*({b})" for b in MONOMIALS] for a in MONOMIALS]
    return tuple(tuple(polygon_integral(polygon, e) for e in row) for row in products)


@lru_cache(maxsize=64)
def boundary_moments(polygon: RationalPolygon) -> Tuple[Fraction, Fraction, Fraction]:
    return tuple(boundary_integral(polygon, m) for m in MONOMIALS)


def average_scalar(polygon: RationalPolygon) -> Fraction:
    """a = Vol(∂P, dσ) / Vol(P, dμ)."""
    return polygon.boundary_measure / polygon.area


def _solve3(matrix, rhs) -> List[Fraction]:
    m = sympy.Matrix([[to_sympy(c) for c in row] for row in matrix])
    b = sympy.Matrix([to_sympy(c) for c in rhs])
    return [from_sympy(v) for v in m.LUsolve(b)]


@lru_cache(maxsize=64)
def extremal_affine(polygon: RationalPolygon) -> ExtremalAffine:
    """The affine A with L_A(1) = L_A(x) = L_A(y) = 0.

    Solves the Gram system ∫ A·m dμ = ∫ m dσ for m in {1, x, y}.
    """
    a0, a1, a2 = _solve3(gram_matrix(polygon), boundary_moments(polygon))
    return ExtremalAffine(a0=a0, a1=a1, a2=a2)


def affine_moments(f: PLFunction) -> Tuple[Fraction, Fraction, Fraction]:
    """(∫f, ∫xf, ∫yf) over the polygon, one triangle at a time."""
    grid = f.grid
    out = [Fraction(0)] * 3
    for tri, area in zip(grid.triangles, grid.areas):
        fv = [f.values[v] for v in tri]
        pts = [grid.nodes[v] for v in tri]
        sf = sum(fv)
        out[0] += area * sf / 3
        for k in (0, 1):
            g = [p[k] for p in pts]
            out[k + 1] += area * (sum(a * b for a, b in zip(g, fv)) + sum(g) * sf) / 12
    return out[0], out[1], out[2]


def weighted_interior_masses(grid: PolygonGrid, A: Optional[ExtremalAffine]) -> List[Fraction]:
    """∫ A·λ_v dμ for every hat function λ_v; A = None means the constant a."""
    if A is None:
        a = average_scalar(grid.polygon)
        return [a * m for m in grid.interior_masses()]
    mass = [Fraction(0)] * len(grid.nodes)
    for tri, area in zip(grid.triangles, grid.areas):
        values = [A(grid.nodes[v]) for v in tri]
        total = sum(values)
        for v, av in zip(tri, values):
            mass[v] += area * (av + total) / 12
    return mass


def interior_A_integral(polygon: RationalPolygon, f: PLFunction, A: Optional[ExtremalAffine]) -> Fraction:
    if A is None:
        return average_scalar(polygon) * integrate(polygon, f, "interior")
    m0, mx, my = affine_moments(f)
    return A.a0 * m0 + A.a1 * mx + A.a2 * my


def donaldson_functional(polygon: RationalPolygon, f: PLFunction, A: Optional[ExtremalAffine] = None) -> Fraction:
    """L(f), or L_A(f) when an affine A is given."""
    return integrate(polygon, f, "boundary") - interior_A_integral(polygon, f, A)


def affine_futaki(polygon: RationalPolygon) -> Tuple[Fraction, Fraction, Fraction]:
    """L with the constant a on 1, x and y; all zero exactly when A is constant."""
    a = average_scalar(polygon)
    gram = gram_matrix(polygon)
    bnd = boundary_moments(polygon)
    return tuple(bnd[i] - a * gram[0][i] for i in range(3))


def affine_projection(polygon: RationalPolygon, moments: Sequence[Fraction]) -> List[Fraction]:
    """Coefficients of the L²(P) projection onto affine functions, given (∫f, ∫xf, ∫yf)."""
    return _solve3(gram_matrix(polygon), moments)


def pi_norm_squared(polygon: RationalPolygon, f: PLFunction) -> Fraction:
    """‖f − (affine projection of f)‖²_{L²(P)}."""
    moments = affine_moments(f)
    coeffs = affine_projection(polygon, moments)
    return integrate(polygon, f, "interior", power=2) - sum(c * m for c, m in zip(coeffs, moments))
