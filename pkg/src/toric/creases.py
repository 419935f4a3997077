"""Zero creases of the toric functional and the semistable decomposition.

A simple piecewise-linear function is max(ℓ, 0) for an affine ℓ whose zero
line (the crease) crosses the polygon. With the crease running from a point
p on edge i to a point q on edge j, and p, q moving along their edges with
parameters s, t ∈ [0, 1], L(max(ℓ, 0)) is a polynomial in (s, t). Zero
creases are read off its factorisation: linear factors give one-parameter
families, other factors give isolated rational zeros.
"""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import hypot
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import sympy
import structlog

from ..core.errors import InternalConsistencyError, StabilityPreconditionError
from ..core.config import get_config
from ..core.exact import from_sympy, to_sympy
from ..geometry.grid import PLFunction, PolygonGrid
from ..geometry.polygon import Point, RationalPolygon, cross
from .cone import ConeMinimum, minimize_convex_cone
from .functional import ExtremalAffine, extremal_affine

logger = structlog.get_logger()

S, T = sympy.symbols("s t")

Segment = Tuple[Point, Point]


def _edge_point(polygon: RationalPolygon, edge: int, u):
    e = polygon.edges[edge]
    return (e.start[0] + u * (e.end[0] - e.start[0]), e.start[1] + u * (e.end[1] - e.start[1]))


def _affine_through(p: Point, q: Point) -> Tuple[Fraction, Fraction, Fraction]:
    """Coefficients (c0, c1, c2) of ℓ(x) = cross(q, p, x): zero on pq, positive left of q→p."""
    c1 = -(p[1] - q[1])
    c2 = p[0] - q[0]
    c0 = -(p[0] - q[0]) * q[1] + (p[1] - q[1]) * q[0]
    return c0, c1, c2


def segment_key(p: Point, q: Point) -> Segment:
    return (p, q) if p <= q else (q, p)


@dataclass(frozen=True)
class SimplePL:
    """max(ℓ, 0) with crease from ``start`` to ``end``; ℓ is positive on the
    part of the polygon swept counterclockwise from start to end."""

    start: Point
    end: Point
    start_edge: int
    end_edge: int

    @property
    def affine(self) -> Tuple[Fraction, Fraction, Fraction]:
        return _affine_through(self.start, self.end)

    @property
    def unit_affine(self) -> Tuple[float, float, float]:
        """ℓ rescaled to a unit Euclidean gradient."""
        c0, c1, c2 = self.affine
        norm = hypot(float(c1), float(c2))
        return float(c0) / norm, float(c1) / norm, float(c2) / norm

    @property
    def key(self) -> Segment:
        return segment_key(self.start, self.end)

    def level(self, p: Point) -> Fraction:
        c0, c1, c2 = self.affine
        return c0 + c1 * p[0] + c2 * p[1]

    def __call__(self, p: Point) -> Fraction:
        return max(self.level(p), Fraction(0))

    def on_grid(self, grid: PolygonGrid) -> PLFunction:
        return PLFunction.from_callable(grid, lambda x, y: self((x, y)))

    def to_json(self) -> Dict[str, object]:
        return {
            "start": [str(c) for c in self.start],
            "end": [str(c) for c in self.end],
            "edges": [self.start_edge, self.end_edge],
            "unit_affine": list(self.unit_affine),
        }


@dataclass(frozen=True)
class CreaseFamily:
    """One-parameter family of zero creases joining the same two edges."""

    start_edge: int
    end_edge: int
    first: Segment
    last: Segment
    parallel: bool

    @property
    def key(self) -> frozenset:
        return frozenset((segment_key(*self.first), segment_key(*self.last)))

    def contains(self, crease: SimplePL) -> bool:
        """Whether the crease is one of the family's members."""
        (p0, q0), (p1, q1) = self.first, self.last
        for a, b in ((crease.start, crease.end), (crease.end, crease.start)):
            if _on_segment(a, p0, p1) and _on_segment(b, q0, q1):
                if not self.parallel:
                    return True
                d = (q0[0] - p0[0], q0[1] - p0[1]) if p0 != q0 else (q1[0] - p1[0], q1[1] - p1[1])
                if d[0] * (b[1] - a[1]) - d[1] * (b[0] - a[0]) == 0:
                    return True
        return False

    def to_json(self) -> Dict[str, object]:
        return {
            "edges": [self.start_edge, self.end_edge],
            "first": [[str(c) for c in pt] for pt in self.first],
            "last": [[str(c) for c in pt] for pt in self.last],
            "parallel": self.parallel,
        }


def _on_segment(x: Point, a: Point, b: Point) -> bool:
    if cross(a, b, x) != 0:
        return False
    return min(a[0], b[0]) <= x[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= x[1] <= max(a[1], b[1])


def is_degenerate(polygon: RationalPolygon, p: Point, q: Point) -> bool:
    """A crease is degenerate when it collapses to a point or runs along an edge."""
    return p == q or polygon.edge_through(p, q) is not None


def _triangle_moment(pts, A_vals, l_vals):
    """∫ A·ℓ over a triangle for affine A, ℓ given by vertex values."""
    area = cross(*pts) / 2
    return area * (sum(a * l for a, l in zip(A_vals, l_vals)) + sum(A_vals) * sum(l_vals)) / 12


def crease_polynomial(polygon: RationalPolygon, i: int, j: int, A: ExtremalAffine) -> sympy.Poly:
    """L_A(max(ℓ, 0)) for the crease from edge i (parameter s) to edge j (parameter t)."""
    n = len(polygon.vertices)
    verts = [(to_sympy(x), to_sympy(y)) for x, y in polygon.vertices]
    sigma = [to_sympy(e.sigma_length) for e in polygon.edges]
    a0, a1, a2 = to_sympy(A.a0), to_sympy(A.a1), to_sympy(A.a2)

    def at(edge, u):
        a, b = verts[edge], verts[(edge + 1) % n]
        return (a[0] + u * (b[0] - a[0]), a[1] + u * (b[1] - a[1]))

    p, q = at(i, S), at(j, T)

    def ell(x):
        return (p[0] - q[0]) * (x[1] - q[1]) - (p[1] - q[1]) * (x[0] - q[0])

    steps = (j - i) % n
    walk = [(i + k) % n for k in range(1, steps + 1)]
    total = sigma[i] * (1 - S) * ell(verts[walk[0]]) / 2
    for k in walk[:-1]:
        total += sigma[k] * (ell(verts[k]) + ell(verts[(k + 1) % n])) / 2
    total += sigma[j] * T * ell(verts[j]) / 2

    region = [p] + [verts[k] for k in walk] + [q]
    for k in range(1, len(region) - 1):
        tri = (region[0], region[k], region[k + 1])
        area = ((tri[1][0] - tri[0][0]) * (tri[2][1] - tri[0][1]) - (tri[1][1] - tri[0][1]) * (tri[2][0] - tri[0][0])) / 2
        A_vals = [a0 + a1 * x + a2 * y for x, y in tri]
        l_vals = [ell(v) for v in tri]
        total -= area * (sum(a * l for a, l in zip(A_vals, l_vals)) + sum(A_vals) * sum(l_vals)) / 12
    return sympy.Poly(sympy.expand(total), S, T, domain=sympy.QQ)


def _clip_half_plane(vertices: Sequence[Point], coeffs, sign: int) -> List[Point]:
    """Part of a convex polygon where sign·ℓ ≥ 0, without repeated or collinear vertices."""
    c0, c1, c2 = coeffs

    def lv(p):
        return sign * (c0 + c1 * p[0] + c2 * p[1])

    out: List[Point] = []
    for k, cur in enumerate(vertices):
        prev = vertices[k - 1]
        lc, lp = lv(cur), lv(prev)
        if (lc >= 0) != (lp >= 0) and lc != lp:
            t = lp / (lp - lc)
            cut = (prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1]))
            if not out or out[-1] != cut:
                out.append(cut)
        if lc >= 0 and (not out or out[-1] != cur):
            out.append(cur)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        for k in range(len(out)):
            if cross(out[k - 1], out[k], out[(k + 1) % len(out)]) == 0:
                del out[k]
                changed = True
                break
    return out


def simple_pl_functional(polygon: RationalPolygon, simple: SimplePL, A: Optional[ExtremalAffine] = None) -> Fraction:
    """L_A(max(ℓ, 0)) by clipping the polygon against ℓ ≥ 0 and integrating exactly."""
    A = A or extremal_affine(polygon)
    coeffs = simple.affine
    total = Fraction(0)
    for e in polygon.edges:
        la, lb = simple.level(e.start), simple.level(e.end)
        if la <= 0 and lb <= 0:
            continue
        if la >= 0 and lb >= 0:
            total += e.sigma_length * (la + lb) / 2
        else:
            pos = la if la > 0 else lb
            frac = pos / (abs(la) + abs(lb))
            total += e.sigma_length * frac * pos / 2
    region = _clip_half_plane(polygon.vertices, coeffs, 1)
    for k in range(1, len(region) - 1):
        tri = (region[0], region[k], region[k + 1])
        total -= _triangle_moment(tri, [A(v) for v in tri], [simple.level(v) for v in tri])
    return total


def _unit_roots(expr, var) -> Optional[List[Fraction]]:
    """Rational roots in [0, 1]; None when the expression vanishes identically."""
    expr = sympy.expand(expr)
    if expr == 0:
        return None
    poly = sympy.Poly(expr, var, domain=sympy.QQ)
    if poly.degree() <= 0:
        return []
    return sorted(from_sympy(r) for r in poly.ground_roots() if 0 <= r <= 1)


def _line_in_unit_square(a: Fraction, b: Fraction, c: Fraction) -> Optional[Tuple[Tuple[Fraction, Fraction], ...]]:
    """Part of a·s + b·t + c = 0 inside [0, 1]²."""
    pts = set()
    for s0 in (Fraction(0), Fraction(1)):
        if b != 0:
            t0 = -(a * s0 + c) / b
            if 0 <= t0 <= 1:
                pts.add((s0, t0))
    for t0 in (Fraction(0), Fraction(1)):
        if a != 0:
            s0 = -(b * t0 + c) / a
            if 0 <= s0 <= 1:
                pts.add((s0, t0))
    if not pts:
        return None
    ordered = sorted(pts)
    return ordered[0], ordered[-1]


def _isolated_zeros(g: sympy.Expr) -> List[Tuple[Fraction, Fraction]]:
    pts = set()
    for val in (Fraction(0), Fraction(1)):
        for r in _unit_roots(g.subs(S, to_sympy(val)), T) or []:
            pts.add((val, r))
        for r in _unit_roots(g.subs(T, to_sympy(val)), S) or []:
            pts.add((r, val))
    gt = sympy.diff(g, T)
    if gt != 0:
        res = sympy.resultant(g, gt, T)
        for s0 in _unit_roots(res, S) or []:
            h = sympy.gcd(sympy.expand(g.subs(S, to_sympy(s0))), sympy.expand(gt.subs(S, to_sympy(s0))))
            for t0 in _unit_roots(h, T) or []:
                if g.subs({S: to_sympy(s0), T: to_sympy(t0)}) == 0:
                    pts.add((s0, t0))
    return sorted(pts)


def zero_set(poly: sympy.Poly):
    """(isolated zeros, zero line segments) of a polynomial on [0, 1]²."""
    if poly.is_zero:
        raise InternalConsistencyError("crease functional vanishes on a two-parameter family")
    points: List[Tuple[Fraction, Fraction]] = []
    lines = []
    _, factors = sympy.factor_list(poly.as_expr(), S, T)
    for g, _mult in factors:
        gp = sympy.Poly(g, S, T, domain=sympy.QQ)
        degree = gp.total_degree()
        if degree == 0:
            continue
        if degree == 1:
            a = from_sympy(gp.coeff_monomial(S))
            b = from_sympy(gp.coeff_monomial(T))
            c = from_sympy(gp.coeff_monomial(1))
            seg = _line_in_unit_square(a, b, c)
            if seg is None:
                continue
            if seg[0] == seg[1]:
                points.append(seg[0])
            else:
                lines.append(seg)
            continue
        points.extend(_isolated_zeros(g))
    return sorted(set(points)), lines


class CreaseSearch:
    """Collects isolated zero creases and families over all ordered edge pairs."""

    def __init__(self, polygon: RationalPolygon, A: ExtremalAffine):
        self.polygon = polygon
        self.A = A
        self.creases: Dict[Segment, SimplePL] = {}
        self.families: Dict[frozenset, CreaseFamily] = {}
        self._logger = logger.bind(component="crease_search")

    def _crease(self, i: int, j: int, s: Fraction, t: Fraction) -> Optional[SimplePL]:
        p, q = _edge_point(self.polygon, i, s), _edge_point(self.polygon, j, t)
        if is_degenerate(self.polygon, p, q):
            return None
        return SimplePL(p, q, i, j)

    def scan_pair(self, i: int, j: int) -> None:
        poly = crease_polynomial(self.polygon, i, j, self.A)
        points, lines = zero_set(poly)
        for s, t in points:
            crease = self._crease(i, j, s, t)
            if crease is not None:
                self.creases.setdefault(crease.key, crease)
        for (s0, t0), (s1, t1) in lines:
            mid = self._crease(i, j, (s0 + s1) / 2, (t0 + t1) / 2)
            if mid is None:
                continue
            first = (_edge_point(self.polygon, i, s0), _edge_point(self.polygon, j, t0))
            last = (_edge_point(self.polygon, i, s1), _edge_point(self.polygon, j, t1))
            quarter = (_edge_point(self.polygon, i, (3 * s0 + s1) / 4), _edge_point(self.polygon, j, (3 * t0 + t1) / 4))
            d_mid = (mid.end[0] - mid.start[0], mid.end[1] - mid.start[1])
            d_q = (quarter[1][0] - quarter[0][0], quarter[1][1] - quarter[0][1])
            parallel = d_mid[0] * d_q[1] - d_mid[1] * d_q[0] == 0
            family = CreaseFamily(i, j, first, last, parallel)
            self.families.setdefault(family.key, family)

    def run(self) -> Tuple[List[SimplePL], List[CreaseFamily]]:
        n = len(self.polygon.vertices)
        for i in range(n):
            for j in range(n):
                if i != j:
                    self.scan_pair(i, j)
        families = list(self.families.values())
        creases = [c for c in self.creases.values() if not any(f.contains(c) for f in families)]
        self._logger.info("creases_found", isolated=len(creases), families=len(families))
        return sorted(creases, key=lambda c: c.key), families


def check_semistable(polygon: RationalPolygon, resolution: Optional[int] = None) -> ConeMinimum:
    resolution = resolution or get_config().toric.default_resolution
    cone = minimize_convex_cone(polygon, resolution)
    if cone.value < 0:
        raise StabilityPreconditionError(
            "polygon is not semistable at this resolution",
            {"resolution": resolution, "minimum": cone.value},
        )
    return cone


def find_zero_creases(
    polygon: RationalPolygon,
    resolution: Optional[int] = None,
) -> Tuple[List[SimplePL], List[CreaseFamily]]:
    """Non-affine simple PL functions with L_A = 0, isolated and in families."""
    check_semistable(polygon, resolution)
    return CreaseSearch(polygon, extremal_affine(polygon)).run()


@dataclass(frozen=True)
class DecompositionPiece:
    polygon: RationalPolygon
    tag: Literal["polystable", "parallelogram", "unstable"]
    cone_value: Fraction

    def to_json(self) -> Dict[str, object]:
        return {"polygon": self.polygon.to_json(), "tag": self.tag, "cone_value": str(self.cone_value)}


@dataclass(frozen=True)
class DecompositionResult:
    pieces: Tuple[DecompositionPiece, ...]
    creases: Tuple[SimplePL, ...]
    families: Tuple[CreaseFamily, ...] = field(default=())
    resolution: int = 0

    @property
    def total_area(self) -> Fraction:
        return sum((p.polygon.area for p in self.pieces), Fraction(0))


def _segments_cross(a: Segment, b: Segment) -> bool:
    """Proper crossing of two segments (shared endpoints do not count)."""
    (p, q), (r, s) = a, b
    d1, d2 = cross(p, q, r), cross(p, q, s)
    d3, d4 = cross(r, s, p), cross(r, s, q)
    return d1 * d2 < 0 and d3 * d4 < 0


def _piece_weights(polygon: RationalPolygon, vertices: Sequence[Point]) -> List[Fraction]:
    weights = []
    for k, a in enumerate(vertices):
        b = vertices[(k + 1) % len(vertices)]
        edge = polygon.edge_through(a, b)
        weights.append(edge.weight if edge is not None else Fraction(0))
    return weights


def _is_parallelogram(vertices: Sequence[Point]) -> bool:
    if len(vertices) != 4:
        return False
    a, b, c, d = vertices
    return (b[0] - a[0], b[1] - a[1]) == (c[0] - d[0], c[1] - d[1])


def semistable_decomposition(polygon: RationalPolygon, resolution: Optional[int] = None) -> DecompositionResult:
    """Cut along every zero crease and the outermost members of every family,
    then re-test each piece with its own extremal affine function."""
    resolution = resolution or get_config().toric.default_resolution
    log = logger.bind(component="decomposition", resolution=resolution)
    creases, families = find_zero_creases(polygon, resolution)

    cuts: List[SimplePL] = list(creases)
    for family in families:
        for p, q in (family.first, family.last):
            if not is_degenerate(polygon, p, q):
                cuts.append(SimplePL(p, q, family.start_edge, family.end_edge))
    for a, b in combinations(cuts, 2):
        if _segments_cross(a.key, b.key):
            raise InternalConsistencyError("zero creases intersect", {"first": a.key, "second": b.key})

    pieces: List[List[Point]] = [list(polygon.vertices)]
    for cut in cuts:
        next_pieces = []
        for verts in pieces:
            mid = ((cut.start[0] + cut.end[0]) / 2, (cut.start[1] + cut.end[1]) / 2)
            inside = all(cross(verts[k], verts[(k + 1) % len(verts)], mid) > 0 for k in range(len(verts)))
            if not inside:
                next_pieces.append(verts)
                continue
            for sign in (1, -1):
                half = _clip_half_plane(verts, cut.affine, sign)
                if len(half) >= 3:
                    next_pieces.append(half)
        pieces = next_pieces

    family_mids = []
    for family in families:
        (p0, q0), (p1, q1) = family.first, family.last
        family_mids.append(((p0[0] + q0[0] + p1[0] + q1[0]) / 4, (p0[1] + q0[1] + p1[1] + q1[1]) / 4))

    result = []
    for verts in pieces:
        piece = RationalPolygon(tuple(verts), tuple(_piece_weights(polygon, verts)))
        cone = minimize_convex_cone(piece, resolution, extremal_affine(piece))
        in_family = any(piece.contains(m) and not any(e.contains(m) for e in piece.edges) for m in family_mids)
        if in_family and _is_parallelogram(piece.vertices):
            tag = "parallelogram"
        elif cone.value >= 0:
            tag = "polystable"
        else:
            tag = "unstable"
        result.append(DecompositionPiece(piece, tag, cone.value))
    log.info("decomposed", pieces=len(result), creases=len(creases), families=len(families))
    if sum((p.polygon.area for p in result), Fraction(0)) != polygon.area:
        raise InternalConsistencyError("pieces do not tile the polygon")
    return DecompositionResult(tuple(result), tuple(creases), tuple(families), resolution)
