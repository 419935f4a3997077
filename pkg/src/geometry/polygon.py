import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import ceil, floor, gcd
from typing import Any, Dict, List, Optional, Sequence, Tuple

import sympy

from ..core.errors import DomainError, OrientationError, PolygonValidationError
from ..core.exact import ExactModel, Rational, parse_rational

Point = Tuple[Fraction, Fraction]


def cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def primitive_direction(dx: Fraction, dy: Fraction) -> Tuple[Tuple[int, int], Fraction]:
    """Split a rational vector into (primitive integer vector u, rational length L) with v = L*u."""
    if dx == 0 and dy == 0:
        raise PolygonValidationError("zero-length edge")
    den = dx.denominator * dy.denominator // gcd(dx.denominator, dy.denominator)
    ix, iy = int(dx * den), int(dy * den)
    g = gcd(abs(ix), abs(iy))
    return (ix // g, iy // g), Fraction(g, den)


@dataclass(frozen=True)
class Edge:
    index: int
    start: Point
    end: Point
    normal: Tuple[int, int]
    lattice_length: Fraction
    weight: Fraction

    @property
    def density_squared(self) -> Fraction:
        """Square of the dσ density relative to Euclidean length, 1/|ν|²."""
        return Fraction(1, self.normal[0] ** 2 + self.normal[1] ** 2)

    @property
    def density(self) -> sympy.Expr:
        return sympy.sqrt(sympy.Rational(self.density_squared.numerator, self.density_squared.denominator))

    @property
    def sigma_length(self) -> Fraction:
        """∫_edge 1 dσ including the edge's measure weight."""
        return self.weight * self.lattice_length

    def level(self, p: Point) -> Fraction:
        """⟨ν, p⟩ minus its value on the edge; zero on the edge line, negative inside."""
        return self.normal[0] * (p[0] - self.start[0]) + self.normal[1] * (p[1] - self.start[1])

    def contains(self, p: Point) -> bool:
        if self.level(p) != 0:
            return False
        lo_x, hi_x = sorted((self.start[0], self.end[0]))
        lo_y, hi_y = sorted((self.start[1], self.end[1]))
        return lo_x <= p[0] <= hi_x and lo_y <= p[1] <= hi_y

    def fraction_of(self, p: Point, q: Point) -> Fraction:
        """Length of the sub-segment pq relative to the whole edge."""
        dx, dy = self.end[0] - self.start[0], self.end[1] - self.start[1]
        if abs(dx) >= abs(dy):
            return abs((q[0] - p[0]) / dx)
        return abs((q[1] - p[1]) / dy)


@dataclass(frozen=True)
class RationalPolygon:
    """Strictly convex counterclockwise polygon with rational vertices.

    ``edge_weights`` scales the boundary measure dσ edge by edge (edge i runs
    from vertex i to vertex i+1); the toric measure has all weights 1.
    """

    vertices: Tuple[Point, ...]
    edge_weights: Tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        verts = tuple((Fraction(x), Fraction(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise PolygonValidationError("a polygon needs at least three vertices", {"vertices": n})
        weights = tuple(Fraction(w) for w in self.edge_weights) or (Fraction(1),) * n
        if len(weights) != n:
            raise PolygonValidationError("one edge weight per edge", {"edges": n, "weights": len(weights)})
        if any(w < 0 for w in weights):
            raise PolygonValidationError("edge weights must be nonnegative")
        object.__setattr__(self, "edge_weights", weights)

        area2 = sum(verts[i][0] * verts[(i + 1) % n][1] - verts[(i + 1) % n][0] * verts[i][1] for i in range(n))
        if area2 == 0:
            raise PolygonValidationError("degenerate polygon with zero area")
        if area2 < 0:
            raise OrientationError("vertices are in clockwise order")
        for i in range(n):
            turn = cross(verts[i - 1], verts[i], verts[(i + 1) % n])
            if turn == 0:
                raise PolygonValidationError("three collinear vertices", {"vertex": i})
            if turn < 0:
                raise PolygonValidationError("polygon is not convex", {"vertex": i})

    @classmethod
    def from_points(cls, points: Sequence[Sequence[Any]], edge_weights: Sequence[Any] = ()) -> "RationalPolygon":
        return cls(
            tuple((parse_rational(x), parse_rational(y)) for x, y in points),
            tuple(parse_rational(w) for w in edge_weights),
        )

    @classmethod
    def rectangle(cls, width, height) -> "RationalPolygon":
        w, h = Fraction(width), Fraction(height)
        return cls(((Fraction(0), Fraction(0)), (w, Fraction(0)), (w, h), (Fraction(0), h)))

    def with_edge_weights(self, weights: Sequence[Any]) -> "RationalPolygon":
        return RationalPolygon(self.vertices, tuple(Fraction(w) for w in weights))

    @cached_property
    def edges(self) -> Tuple[Edge, ...]:
        out = []
        n = len(self.vertices)
        for i in range(n):
            p, q = self.vertices[i], self.vertices[(i + 1) % n]
            (ux, uy), length = primitive_direction(q[0] - p[0], q[1] - p[1])
            out.append(Edge(i, p, q, (uy, -ux), length, self.edge_weights[i]))
        return tuple(out)

    @cached_property
    def area(self) -> Fraction:
        v = self.vertices
        n = len(v)
        return sum(v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1] for i in range(n)) / 2

    @cached_property
    def centroid(self) -> Point:
        v = self.vertices
        n = len(v)
        cx = cy = Fraction(0)
        for i in range(n):
            (x0, y0), (x1, y1) = v[i], v[(i + 1) % n]
            w = x0 * y1 - x1 * y0
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        return cx / (6 * self.area), cy / (6 * self.area)

    @cached_property
    def boundary_measure(self) -> Fraction:
        return sum((e.sigma_length for e in self.edges), Fraction(0))

    @property
    def is_lattice(self) -> bool:
        return all(x.denominator == 1 and y.denominator == 1 for x, y in self.vertices)

    @property
    def bounding_box(self) -> Tuple[Fraction, Fraction, Fraction, Fraction]:
        xs = [x for x, _ in self.vertices]
        ys = [y for _, y in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def contains(self, p: Point) -> bool:
        """Closed containment."""
        return all(e.level(p) <= 0 for e in self.edges)

    def edge_through(self, p: Point, q: Point) -> Optional[Edge]:
        for e in self.edges:
            if e.contains(p) and e.contains(q):
                return e
        return None

    def to_json(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "vertices": [[x.numerator, x.denominator, y.numerator, y.denominator] for x, y in self.vertices]
        }
        if any(w != 1 for w in self.edge_weights):
            data["edge_weights"] = [str(w) for w in self.edge_weights]
        return data


class EdgeMeasure(ExactModel):
    edge: int
    normal: Tuple[int, int]
    density_squared: Rational
    lattice_length: Rational
    sigma_length: Rational

    @property
    def density(self) -> sympy.Expr:
        return sympy.sqrt(sympy.Rational(self.density_squared.numerator, self.density_squared.denominator))


def edge_measure_density(polygon: RationalPolygon) -> List[EdgeMeasure]:
    """dσ on each edge: density 1/|ν| against Euclidean length, total mass the lattice length."""
    return [
        EdgeMeasure(
            edge=e.index,
            normal=e.normal,
            density_squared=e.density_squared,
            lattice_length=e.lattice_length,
            sigma_length=e.sigma_length,
        )
        for e in polygon.edges
    ]


def polygon_from_json(data: Dict[str, Any]) -> RationalPolygon:
    """Parse ``{"vertices": [[num, den, num, den], ...], "edge_weights": [...]}``."""
    try:
        raw = data["vertices"]
        points = []
        for entry in raw:
            if len(entry) != 4 or not all(isinstance(v, int) for v in entry):
                raise PolygonValidationError("each vertex is four integers [num, den, num, den]", {"vertex": entry})
            if entry[1] <= 0 or entry[3] <= 0:
                raise PolygonValidationError("denominators must be positive", {"vertex": entry})
            points.append((Fraction(entry[0], entry[1]), Fraction(entry[2], entry[3])))
    except (KeyError, TypeError) as e:
        raise PolygonValidationError("malformed polygon document") from e
    return RationalPolygon(tuple(points), tuple(parse_rational(w) for w in data.get("edge_weights", ())))


def load_polygon(path: str) -> RationalPolygon:
    with open(path, "r") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise PolygonValidationError(f"polygon file is not JSON: {path}") from e
    return polygon_from_json(data)


def standard_triangle() -> RationalPolygon:
    return RationalPolygon.from_points([(0, 0), (1, 0), (0, 1)])


def unit_square() -> RationalPolygon:
    return RationalPolygon.rectangle(1, 1)


def lattice_points(polygon: RationalPolygon, k: int) -> List[Tuple[int, int]]:
    """Integer points of the dilate k·P."""
    if k < 1:
        raise DomainError("dilation must be a positive integer", {"k": k})
    x0, y0, x1, y1 = polygon.bounding_box
    pts = []
    for i in range(floor(k * x0), ceil(k * x1) + 1):
        for j in range(floor(k * y0), ceil(k * y1) + 1):
            if polygon.contains((Fraction(i, k), Fraction(j, k))):
                pts.append((i, j))
    return pts
