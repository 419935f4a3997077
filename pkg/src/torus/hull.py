"""Exact convex geometry of small weight sets: affine hulls, projections,
closest points and relative facets. Instances are tiny, so faces are found by
brute force over subsets."""
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple

import sympy

from ..core.exact import from_sympy, to_sympy
from ..core.lp import LinearProgram
from .action import Vector, dot


def _matrix(rows: Sequence[Sequence[Fraction]]) -> sympy.Matrix:
    return sympy.Matrix([[to_sympy(c) for c in row] for row in rows])


def _vector(m: sympy.Matrix) -> Vector:
    return tuple(from_sympy(c) for c in m)


def unique_points(points: Sequence[Vector]) -> List[Vector]:
    return sorted(set(points))


def direction_basis(points: Sequence[Vector]) -> List[Vector]:
    """A basis of the linear space parallel to the affine hull."""
    base = points[0]
    diffs = [tuple(a - b for a, b in zip(p, base)) for p in points[1:]]
    if not diffs:
        return []
    m = _matrix(diffs)
    _, pivots = m.T.rref()
    return [diffs[i] for i in pivots]


def affine_dimension(points: Sequence[Vector]) -> int:
    return len(direction_basis(points))


def linear_rank(points: Sequence[Vector]) -> int:
    return _matrix(points).rank()


def project_to_affine_hull(points: Sequence[Vector], target: Optional[Vector] = None) -> Vector:
    """Orthogonal projection of ``target`` (default the origin) onto the affine hull."""
    base = points[0]
    target = target or tuple(Fraction(0) for _ in base)
    basis = direction_basis(points)
    if not basis:
        return base
    b = _matrix(basis)
    rhs = b * _matrix([tuple(t - c for t, c in zip(target, base))]).T
    lam = (b * b.T).LUsolve(rhs)
    return tuple(from_sympy(c) for c in (_matrix([base]).T + b.T * lam))


def barycentric_projection(simplex: Sequence[Vector]) -> Optional[Tuple[Vector, Tuple[Fraction, ...]]]:
    """Closest point to the origin on aff(simplex) with its affine coordinates,
    or None when the points are affinely dependent."""
    k = len(simplex)
    gram = [[dot(p, q) for q in simplex] for p in simplex]
    rows = [row + [Fraction(1)] for row in gram] + [[Fraction(1)] * k + [Fraction(0)]]
    m = _matrix(rows)
    if m.det() == 0:
        return None
    rhs = _matrix([[Fraction(0)] * k + [Fraction(1)]]).T
    sol = m.LUsolve(rhs)
    lam = tuple(from_sympy(sol[i]) for i in range(k))
    point = tuple(sum(l * p[i] for l, p in zip(lam, simplex)) for i in range(len(simplex[0])))
    return point, lam


def closest_point(points: Sequence[Vector]) -> Vector:
    """Exact closest point of conv(points) to the origin."""
    pts = unique_points(points)
    dim = len(pts[0])
    best: Optional[Tuple[Fraction, Vector]] = None
    for size in range(1, min(len(pts), dim + 1) + 1):
        for subset in combinations(pts, size):
            proj = barycentric_projection(subset)
            if proj is None:
                continue
            point, lam = proj
            if any(l < 0 for l in lam):
                continue
            dist = dot(point, point)
            if best is None or dist < best[0]:
                best = (dist, point)
    return best[1]


def relative_interior_margin(points: Sequence[Vector], target: Vector) -> Optional[Fraction]:
    """Largest ε with target = Σλ_j p_j, Σλ_j = 1, λ_j ≥ ε; None if target ∉ conv.

    ε > 0 exactly when the target lies in the relative interior.
    """
    n = len(points)
    lp = LinearProgram(n + 1)
    eps = n
    for i in range(len(target)):
        lp.add_eq({j: p[i] for j, p in enumerate(points)}, target[i])
    lp.add_eq({j: 1 for j in range(n)}, 1)
    for j in range(n):
        lp.add_ge({j: 1, eps: -1}, 0)
    result = lp.maximize({eps: 1})
    if not result.optimal:
        return None
    return result.value


class RelativeFacet:
    """Facet of conv(points) inside its affine hull: ⟨normal, x⟩ ≤ offset."""

    def __init__(self, normal: Vector, offset: Fraction):
        self.normal = normal
        self.offset = offset

    def distance_squared(self, x: Vector) -> Fraction:
        gap = self.offset - dot(self.normal, x)
        return gap * gap / dot(self.normal, self.normal)


def relative_facets(points: Sequence[Vector]) -> List[RelativeFacet]:
    pts = unique_points(points)
    basis = direction_basis(pts)
    r = len(basis)
    if r == 0:
        return []
    b = _matrix(basis)
    facets: List[RelativeFacet] = []
    seen = set()
    for subset in combinations(pts, r):
        base = subset[0]
        diffs = [tuple(a - c for a, c in zip(p, base)) for p in subset[1:]]
        if diffs:
            null = (_matrix(diffs) * b.T).nullspace()
        else:
            null = [sympy.eye(r)[:, 0]]
        if len(null) != 1:
            continue
        normal = _vector(b.T * null[0])
        offset = dot(normal, base)
        sides = [dot(normal, p) - offset for p in pts]
        if all(s <= 0 for s in sides):
            key = (normal, offset)
        elif all(s >= 0 for s in sides):
            normal = tuple(-c for c in normal)
            key = (normal, -offset)
        else:
            continue
        scale = max(abs(c) for c in key[0])
        canonical = (tuple(c / scale for c in key[0]), key[1] / scale)
        if canonical in seen:
            continue
        seen.add(canonical)
        facets.append(RelativeFacet(*canonical))
    return facets
