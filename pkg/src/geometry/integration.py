"""Exact integration over polygons and their toric boundary, and lattice-point sums."""
from fractions import Fraction
from math import factorial
from typing import List, Literal, Optional, Sequence, Tuple, Union

import sympy
from sympy.polys.polyfuncs import interpolate

from ..core.errors import ArityError, DomainError, InternalConsistencyError, UnsupportedDegreeError
from ..core.exact import ExactModel, Rational, from_sympy, to_sympy
from .grid import PLFunction
from .polygon import Point, RationalPolygon, lattice_points

X, Y = sympy.symbols("x y")
U, V, T = sympy.symbols("u v t")
K = sympy.Symbol("k")

MAX_WEIGHT_DEGREE = 4

Weight = Union[sympy.Expr, sympy.Poly, str, int, Fraction, None]


def as_bivariate(weight: Weight) -> Optional[sympy.Poly]:
    """Normalize a weight to a QQ polynomial in x, y (None for the constant 1)."""
    if weight is None:
        return None
    if isinstance(weight, str):
        weight = sympy.parse_expr(weight, local_dict={"x": X, "y": Y})
    if isinstance(weight, Fraction):
        weight = to_sympy(weight)
    poly = sympy.Poly(weight, X, Y, domain=sympy.QQ)
    if poly.total_degree() > MAX_WEIGHT_DEGREE:
        raise UnsupportedDegreeError(
            "polynomial weight degree above the exact-integration bound",
            {"degree": poly.total_degree(), "bound": MAX_WEIGHT_DEGREE},
        )
    return poly


def _simplex_integral(expr: sympy.Expr, p: Point, q: Point, r: Point) -> Fraction:
    """∫ over triangle pqr of a polynomial expression in x, y."""
    sp = [tuple(to_sympy(c) for c in pt) for pt in (p, q, r)]
    sub = {
        X: sp[0][0] + U * (sp[1][0] - sp[0][0]) + V * (sp[2][0] - sp[0][0]),
        Y: sp[0][1] + U * (sp[1][1] - sp[0][1]) + V * (sp[2][1] - sp[0][1]),
    }
    poly = sympy.Poly(sympy.expand(expr.subs(sub, simultaneous=True)), U, V, domain=sympy.QQ)
    jac = abs((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
    total = sympy.Rational(0)
    for (a, b), c in poly.terms():
        total += c * sympy.Rational(factorial(a) * factorial(b), factorial(a + b + 2))
    return from_sympy(total) * jac


def _segment_integral(expr: sympy.Expr, p: Point, q: Point) -> Fraction:
    """∫_0^1 of the expression along p + t(q - p)."""
    sub = {
        X: to_sympy(p[0]) + T * to_sympy(q[0] - p[0]),
        Y: to_sympy(p[1]) + T * to_sympy(q[1] - p[1]),
    }
    poly = sympy.Poly(sympy.expand(expr.subs(sub, simultaneous=True)), T, domain=sympy.QQ)
    return from_sympy(sum(c / (k + 1) for (k,), c in poly.terms()))


def _affine_on(values: Sequence[Fraction], p: Point, q: Point, r: Point) -> sympy.Expr:
    """The affine function in x, y taking ``values`` at p, q, r."""
    det = (q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1])
    fp, fq, fr = values
    gx = ((fq - fp) * (r[1] - p[1]) - (fr - fp) * (q[1] - p[1])) / det
    gy = ((fr - fp) * (q[0] - p[0]) - (fq - fp) * (r[0] - p[0])) / det
    return to_sympy(fp) + to_sympy(gx) * (X - to_sympy(p[0])) + to_sympy(gy) * (Y - to_sympy(p[1]))


def integrate(
    polygon: RationalPolygon,
    f: PLFunction,
    region: Literal["interior", "boundary"] = "interior",
    weight: Weight = None,
    power: int = 1,
) -> Fraction:
    """Exact ∫ f^power · weight against dμ (interior) or dσ (boundary)."""
    if f.grid.polygon != polygon:
        raise DomainError("function is defined on a different polygon")
    if power not in (1, 2):
        raise UnsupportedDegreeError("only f and f² integrands are supported", {"power": power})
    w = as_bivariate(weight)
    grid = f.grid
    vals = f.values
    total = Fraction(0)

    if region == "interior":
        for (a, b, c), area in zip(grid.triangles, grid.areas):
            fa, fb, fc = vals[a], vals[b], vals[c]
            if w is None:
                if power == 1:
                    total += area * (fa + fb + fc) / 3
                else:
                    s = fa + fb + fc
                    total += area * (fa * fa + fb * fb + fc * fc + s * s) / 12
                continue
            p, q, r = grid.nodes[a], grid.nodes[b], grid.nodes[c]
            integrand = _affine_on((fa, fb, fc), p, q, r) ** power * w.as_expr()
            total += _simplex_integral(integrand, p, q, r)
        return total

    if region != "boundary":
        raise DomainError(f"unknown integration region: {region}")
    for seg in grid.boundary_segments:
        fa, fb = vals[seg.start], vals[seg.end]
        if w is None:
            if power == 1:
                total += seg.sigma_length * (fa + fb) / 2
            else:
                total += seg.sigma_length * (fa * fa + fa * fb + fb * fb) / 3
            continue
        p, q = grid.nodes[seg.start], grid.nodes[seg.end]
        f_t = to_sympy(fa) + T * to_sympy(fb - fa)
        sub = {X: to_sympy(p[0]) + T * to_sympy(q[0] - p[0]), Y: to_sympy(p[1]) + T * to_sympy(q[1] - p[1])}
        poly = sympy.Poly(sympy.expand(f_t**power * w.as_expr().subs(sub, simultaneous=True)), T, domain=sympy.QQ)
        total += seg.sigma_length * from_sympy(sum(c / (k + 1) for (k,), c in poly.terms()))
    return total


def polygon_integral(polygon: RationalPolygon, weight: Weight) -> Fraction:
    """∫_P Q dμ for a polynomial Q."""
    w = as_bivariate(weight)
    if w is None:
        return polygon.area
    v = polygon.vertices
    return sum((_simplex_integral(w.as_expr(), v[0], v[i], v[i + 1]) for i in range(1, len(v) - 1)), Fraction(0))


def boundary_integral(polygon: RationalPolygon, weight: Weight) -> Fraction:
    """∫_∂P Q dσ for a polynomial Q."""
    w = as_bivariate(weight)
    if w is None:
        return polygon.boundary_measure
    return sum((e.sigma_length * _segment_integral(w.as_expr(), e.start, e.end) for e in polygon.edges), Fraction(0))


class LatticeSumExpansion(ExactModel):
    k_values: Tuple[int, ...]
    sums: Tuple[Rational, ...]
    coefficients: Tuple[Rational, ...]
    leading: Rational
    subleading: Rational
    interior_integral: Rational
    half_boundary_integral: Rational

    @property
    def matches(self) -> bool:
        return self.leading == self.interior_integral and self.subleading == self.half_boundary_integral


def fit_exact_polynomial(ks: Sequence[int], values: Sequence[Fraction], degree: int) -> List[Fraction]:
    """Lagrange fit through the first degree+1 nodes; every further node must lie on it.

    Returns ascending coefficients.
    """
    if len(set(ks)) != len(ks):
        raise ArityError("fit nodes must be distinct")
    if len(ks) < degree + 1:
        raise ArityError("not enough nodes for the fit degree", {"nodes": len(ks), "degree": degree})
    data = [(int(k), to_sympy(Fraction(v))) for k, v in zip(ks[: degree + 1], values[: degree + 1])]
    poly = sympy.Poly(interpolate(data, K), K, domain=sympy.QQ) if data else sympy.Poly(0, K)
    for k, v in zip(ks[degree + 1 :], values[degree + 1 :]):
        if from_sympy(poly.eval(k)) != Fraction(v):
            raise InternalConsistencyError("exact fit leaves a nonzero residual", {"k": k})
    coeffs = [from_sympy(c) for c in reversed(poly.all_coeffs())]
    return coeffs + [Fraction(0)] * (degree + 1 - len(coeffs))


def lattice_sum_expansion(polygon: RationalPolygon, weight: Weight, k_list: Sequence[int]) -> LatticeSumExpansion:
    """Fit k^d·Σ_{α ∈ kP ∩ Z²} Q(α/k) as a polynomial in k, with one spare k as a residual check.

    Its two top coefficients are ∫Q dμ and (1/2)∫Q dσ.
    """
    if not polygon.is_lattice:
        raise DomainError("lattice sums need a lattice polygon")
    w = as_bivariate(weight)
    d = 0 if w is None or w.is_zero else w.total_degree()
    degree = 2 + d
    ks = sorted(set(int(k) for k in k_list))
    if len(ks) < degree + 2:
        raise ArityError("not enough k values for the fit degree", {"k_values": len(ks), "needed": degree + 2})

    sums = []
    for k in ks:
        pts = lattice_points(polygon, k)
        if w is None:
            s = Fraction(len(pts))
        else:
            s = sum(
                (from_sympy(w(sympy.Rational(i, k), sympy.Rational(j, k))) for i, j in pts),
                Fraction(0),
            )
        sums.append(s)
    scaled = [Fraction(k) ** d * s for k, s in zip(ks, sums)]
    coeffs = fit_exact_polynomial(ks, scaled, degree)
    return LatticeSumExpansion(
        k_values=tuple(ks),
        sums=tuple(sums),
        coefficients=tuple(coeffs),
        leading=coeffs[degree],
        subleading=coeffs[degree - 1],
        interior_integral=polygon_integral(polygon, weight),
        half_boundary_integral=boundary_integral(polygon, weight) / 2,
    )
