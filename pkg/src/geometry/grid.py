"""Regular triangulated grids on polygons and piecewise-linear functions on them.

At odd N, cell ``[i/N,(i+1)/N] x [j/N,(j+1)/N]`` is split along its anti-diagonal
and cells crossing the boundary are clipped to the polygon and re-triangulated.
The grid at 2N is the midpoint subdivision of the grid at N, so grids at N and
N·2^k nest even where a clipped cell was fanned along an off-lattice diagonal.
On interior cells the subdivision is the anti-diagonal lattice again.
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import ceil, floor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import structlog

from ..core.errors import InternalConsistencyError, ResolutionError
from .polygon import Point, RationalPolygon, cross

logger = structlog.get_logger()

Triangle = Tuple[int, int, int]


def _clip(poly: List[Point], polygon: RationalPolygon) -> List[Point]:
    """Sutherland–Hodgman clip of a convex region against every edge half-plane."""
    out = poly
    for edge in polygon.edges:
        if not out:
            break
        src, out = out, []
        for k, cur in enumerate(src):
            prev = src[k - 1]
            lc, lp = edge.level(cur), edge.level(prev)
            if lc <= 0:
                if lp > 0:
                    t = lp / (lp - lc)
                    out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
                out.append(cur)
            elif lp <= 0 and lp != 0:
                t = lp / (lp - lc)
                out.append((prev[0] + t * (cur[0] - prev[0]), prev[1] + t * (cur[1] - prev[1])))
    deduped: List[Point] = []
    for p in out:
        if not deduped or deduped[-1] != p:
            deduped.append(p)
    if len(deduped) > 1 and deduped[0] == deduped[-1]:
        deduped.pop()
    return deduped


def _triangulate(poly: List[Point]) -> List[Tuple[Point, Point, Point]]:
    """Fan from the first vertex; fall back to a fan from the barycenter when that
    fan would contain a flat triangle (it would drop a boundary node)."""
    if len(poly) < 3:
        return []
    fan = [(poly[0], poly[k], poly[k + 1]) for k in range(1, len(poly) - 1)]
    if all(cross(*t) != 0 for t in fan):
        return fan
    n = len(poly)
    center = (sum(p[0] for p in poly) / n, sum(p[1] for p in poly) / n)
    return [(center, poly[k], poly[(k + 1) % n]) for k in range(n) if cross(center, poly[k], poly[(k + 1) % n]) != 0]


@dataclass(frozen=True)
class BoundarySegment:
    start: int
    end: int
    edge: int
    sigma_length: Fraction


@dataclass(frozen=True)
class ConvexityRow:
    """Σ coefficients[v]·f(v) ≥ 0 expresses convexity across one interior edge."""

    coefficients: Tuple[Tuple[int, Fraction], ...]


class PolygonGrid:
    """Triangulation of a polygon at scale 1/N, built once per (polygon, N)."""

    def __init__(self, polygon: RationalPolygon, resolution: int):
        if resolution < 1:
            raise ResolutionError("resolution must be a positive integer", {"resolution": resolution})
        self.polygon = polygon
        self.resolution = resolution
        self._logger = logger.bind(component="grid", resolution=resolution)
        self.nodes: List[Point] = []
        self.node_index: Dict[Point, int] = {}
        self.triangles: List[Triangle] = []
        self.areas: List[Fraction] = []
        self._build()
        self.interior_edges, self.boundary_segments = self._edges()
        self.convexity_rows = tuple(self._convexity_rows())
        self._logger.debug(
            "grid_built",
            nodes=len(self.nodes),
            triangles=len(self.triangles),
            convexity_rows=len(self.convexity_rows),
        )

    def _node(self, p: Point) -> int:
        idx = self.node_index.get(p)
        if idx is None:
            idx = len(self.nodes)
            self.nodes.append(p)
            self.node_index[p] = idx
        return idx

    def _add_triangle(self, p: Point, q: Point, r: Point) -> None:
        area = cross(p, q, r) / 2
        if area == 0:
            return
        if area < 0:
            q, r = r, q
            area = -area
        self.triangles.append((self._node(p), self._node(q), self._node(r)))
        self.areas.append(area)

    def _build(self) -> None:
        if self.resolution % 2 == 0:
            self._subdivide(build_grid(self.polygon, self.resolution // 2))
        else:
            self._build_cells()
        if not self.triangles:
            raise ResolutionError("grid does not meet the polygon", {"resolution": self.resolution})

    def _subdivide(self, parent: "PolygonGrid") -> None:
        """Split every parent triangle into four at its edge midpoints."""
        for a, b, c in parent.triangles:
            p, q, r = parent.nodes[a], parent.nodes[b], parent.nodes[c]
            pq = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
            qr = ((q[0] + r[0]) / 2, (q[1] + r[1]) / 2)
            rp = ((r[0] + p[0]) / 2, (r[1] + p[1]) / 2)
            for tri in ((p, pq, rp), (pq, q, qr), (rp, qr, r), (pq, qr, rp)):
                self._add_triangle(*tri)

    def _build_cells(self) -> None:
        n = self.resolution
        x0, y0, x1, y1 = self.polygon.bounding_box
        h = Fraction(1, n)
        for i in range(floor(x0 * n), ceil(x1 * n)):
            for j in range(floor(y0 * n), ceil(y1 * n)):
                a = (i * h, j * h)
                b = ((i + 1) * h, j * h)
                c = ((i + 1) * h, (j + 1) * h)
                d = (i * h, (j + 1) * h)
                for tri in ((a, b, d), (b, c, d)):
                    if all(self.polygon.contains(p) for p in tri):
                        pieces = [tri]
                    else:
                        pieces = _triangulate(_clip(list(tri), self.polygon))
                    for tri in pieces:
                        self._add_triangle(*tri)

    def _edges(self):
        adjacency: Dict[Tuple[int, int], List[Tuple[int, int]]] = {}
        for t, tri in enumerate(self.triangles):
            for k in range(3):
                u, v, w = tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]
                adjacency.setdefault((min(u, v), max(u, v)), []).append((t, w))
        interior, boundary = [], []
        for (u, v), sides in sorted(adjacency.items()):
            if len(sides) == 2:
                interior.append((u, v, sides[0][1], sides[1][1]))
            elif len(sides) == 1:
                p, q = self.nodes[u], self.nodes[v]
                edge = self.polygon.edge_through(p, q)
                if edge is None:
                    raise InternalConsistencyError("non-conforming grid edge", {"start": p, "end": q})
                boundary.append(BoundarySegment(u, v, edge.index, edge.weight * edge.lattice_length * edge.fraction_of(p, q)))
            else:
                raise InternalConsistencyError("grid edge shared by more than two triangles")
        return tuple(interior), tuple(boundary)

    def _convexity_rows(self):
        for u, v, w, s in self.interior_edges:
            p, q, r, t = self.nodes[u], self.nodes[v], self.nodes[w], self.nodes[s]
            det = cross(r, p, q)
            if det == 0:
                continue
            # barycentric coordinates of t with respect to (p, q, r)
            bp = cross(r, t, q) / cross(r, p, q)
            bq = cross(r, p, t) / cross(r, p, q)
            br = 1 - bp - bq
            if br == 0:
                continue
            yield ConvexityRow(((s, Fraction(1)), (u, -bp), (v, -bq), (w, -br)))

    @property
    def boundary_nodes(self) -> List[int]:
        return sorted({i for seg in self.boundary_segments for i in (seg.start, seg.end)})

    def interior_masses(self) -> List[Fraction]:
        """∫ λ_v dμ for every hat function λ_v."""
        mass = [Fraction(0)] * len(self.nodes)
        for tri, area in zip(self.triangles, self.areas):
            for v in tri:
                mass[v] += area / 3
        return mass

    def boundary_masses(self) -> List[Fraction]:
        """∫ λ_v dσ for every hat function λ_v."""
        mass = [Fraction(0)] * len(self.nodes)
        for seg in self.boundary_segments:
            mass[seg.start] += seg.sigma_length / 2
            mass[seg.end] += seg.sigma_length / 2
        return mass

    def nearest_node(self, p: Point) -> int:
        """Node closest to ``p``; ties broken by coordinates."""
        def key(i: int):
            q = self.nodes[i]
            return ((q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2, q)

        return min(range(len(self.nodes)), key=key)

    def locate(self, p: Point) -> Optional[Tuple[int, Tuple[Fraction, Fraction, Fraction]]]:
        """Triangle containing ``p`` with barycentric coordinates."""
        for t, (a, b, c) in enumerate(self.triangles):
            pa, pb, pc = self.nodes[a], self.nodes[b], self.nodes[c]
            total = cross(pa, pb, pc)
            la = cross(p, pb, pc) / total
            lb = cross(pa, p, pc) / total
            lc = 1 - la - lb
            if la >= 0 and lb >= 0 and lc >= 0:
                return t, (la, lb, lc)
        return None


@lru_cache(maxsize=64)
def build_grid(polygon: RationalPolygon, resolution: int) -> PolygonGrid:
    return PolygonGrid(polygon, resolution)


@dataclass(frozen=True)
class PLFunction:
    """Piecewise-linear function given by its values on the nodes of a grid."""

    grid: PolygonGrid
    values: Tuple[Fraction, ...]

    def __post_init__(self):
        values = tuple(Fraction(v) for v in self.values)
        if len(values) != len(self.grid.nodes):
            raise ResolutionError("one value per grid node", {"nodes": len(self.grid.nodes), "values": len(values)})
        object.__setattr__(self, "values", values)

    @property
    def resolution(self) -> int:
        return self.grid.resolution

    @classmethod
    def from_callable(cls, grid: PolygonGrid, fn: Callable[[Fraction, Fraction], object]) -> "PLFunction":
        return cls(grid, tuple(Fraction(fn(x, y)) for x, y in grid.nodes))

    @classmethod
    def affine(cls, grid: PolygonGrid, a0=0, a1=0, a2=0) -> "PLFunction":
        a0, a1, a2 = Fraction(a0), Fraction(a1), Fraction(a2)
        return cls.from_callable(grid, lambda x, y: a0 + a1 * x + a2 * y)

    @classmethod
    def zero(cls, grid: PolygonGrid) -> "PLFunction":
        return cls(grid, (Fraction(0),) * len(grid.nodes))

    def __add__(self, other: "PLFunction") -> "PLFunction":
        self._same_grid(other)
        return PLFunction(self.grid, tuple(a + b for a, b in zip(self.values, other.values)))

    def scale(self, k) -> "PLFunction":
        k = Fraction(k)
        return PLFunction(self.grid, tuple(k * v for v in self.values))

    def _same_grid(self, other: "PLFunction") -> None:
        if other.grid is not self.grid:
            raise ResolutionError("functions live on different grids")

    def convexity_defects(self) -> List[Fraction]:
        """Values of the per-edge convexity inequalities that are negative."""
        out = []
        for row in self.grid.convexity_rows:
            value = sum(c * self.values[v] for v, c in row.coefficients)
            if value < 0:
                out.append(value)
        return out

    @property
    def is_convex(self) -> bool:
        return not self.convexity_defects()

    def __call__(self, p: Point) -> Fraction:
        hit = self.grid.locate((Fraction(p[0]), Fraction(p[1])))
        if hit is None:
            raise ResolutionError("point outside the polygon", {"point": p})
        t, bary = hit
        return sum(b * self.values[v] for b, v in zip(bary, self.grid.triangles[t]))

    def refine(self, resolution: int) -> "PLFunction":
        """Interpolate onto a finer grid; exact when ``resolution`` is N·2^k."""
        fine = build_grid(self.grid.polygon, resolution)
        return PLFunction(fine, tuple(self(p) for p in fine.nodes))
