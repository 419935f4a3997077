from fractions import Fraction

import pytest
import sympy

from src.core.errors import ArityError, OrientationError, PolygonValidationError, UnsupportedDegreeError
from src.geometry.grid import PLFunction, build_grid
from src.geometry.integration import (
    boundary_integral,
    fit_exact_polynomial,
    integrate,
    lattice_sum_expansion,
    polygon_integral,
)
from src.geometry.polygon import (
    RationalPolygon,
    edge_measure_density,
    lattice_points,
    polygon_from_json,
    standard_triangle,
    unit_square,
)


@pytest.fixture
def triangle():
    return standard_triangle()


@pytest.fixture
def square():
    return unit_square()


def test_polygon_area_and_boundary(triangle, square):
    """Area and total boundary measure of the standard polygons."""
    assert triangle.area == Fraction(1, 2)
    assert triangle.boundary_measure == 3
    assert square.area == 1
    assert square.boundary_measure == 4
    assert square.centroid == (Fraction(1, 2), Fraction(1, 2))


def test_hypotenuse_has_lattice_length_one(triangle):
    """The slanted edge of the triangle carries σ-mass 1, not √2."""
    measures = edge_measure_density(triangle)
    assert [m.sigma_length for m in measures] == [1, 1, 1]
    assert measures[1].density_squared == Fraction(1, 2)


def test_clockwise_polygon_rejected():
    """Clockwise vertex order is an orientation error."""
    with pytest.raises(OrientationError):
        RationalPolygon.from_points([(0, 0), (0, 1), (1, 0)])


def test_non_convex_polygon_rejected():
    """A reflex vertex is rejected."""
    with pytest.raises(PolygonValidationError):
        RationalPolygon.from_points([(0, 0), (2, 0), (1, "1/4"), (2, 2), (0, 2)])


def test_collinear_vertices_rejected():
    """Three collinear vertices are rejected."""
    with pytest.raises(PolygonValidationError):
        RationalPolygon.from_points([(0, 0), (1, 0), (2, 0), (0, 1)])


def test_polygon_from_json():
    """Vertices are read as [num, den, num, den]."""
    polygon = polygon_from_json({"vertices": [[0, 1, 0, 1], [1, 2, 0, 1], [0, 1, 1, 3]]})
    assert polygon.vertices[1] == (Fraction(1, 2), Fraction(0))
    assert polygon.area == Fraction(1, 12)
    assert not polygon.is_lattice


def test_polygon_from_json_bad_vertex():
    """Non-integer entries are a validation error."""
    with pytest.raises(PolygonValidationError):
        polygon_from_json({"vertices": [[0, 1, 0], [1, 1, 0, 1], [0, 1, 1, 1]]})


def test_polygon_json_round_trip(square):
    """to_json feeds back into polygon_from_json."""
    weighted = square.with_edge_weights([1, 2, 1, 1])
    assert polygon_from_json(weighted.to_json()) == weighted


def test_lattice_points(triangle):
    """The dilate k·Δ has (k+1)(k+2)/2 lattice points."""
    for k in (1, 2, 5):
        assert len(lattice_points(triangle, k)) == (k + 1) * (k + 2) // 2


def test_polygon_integral_matches_sympy(triangle):
    """∫_Δ x²y agrees with a direct sympy double integral."""
    x, y = sympy.symbols("x y")
    expected = sympy.integrate(sympy.integrate(x**2 * y, (y, 0, 1 - x)), (x, 0, 1))
    assert polygon_integral(triangle, "x**2*y") == Fraction(int(expected.p), int(expected.q))


def test_boundary_integral(square, triangle):
    """∫_∂ x dσ on the square and on the triangle."""
    assert boundary_integral(square, "x") == 2
    assert boundary_integral(triangle, "x") == 1


def test_weight_degree_bound(square):
    """Weights above degree four are refused."""
    with pytest.raises(UnsupportedDegreeError):
        polygon_integral(square, "x**5")


@pytest.mark.parametrize("weight", [None, "x", "x**2"])
@pytest.mark.parametrize("polygon", [unit_square(), standard_triangle()])
def test_lattice_sum_expansion(polygon, weight):
    """The top two coefficients are ∫Q dμ and half of ∫Q dσ."""
    expansion = lattice_sum_expansion(polygon, weight, range(1, 9))
    assert expansion.matches
    assert expansion.leading == polygon_integral(polygon, weight)


def test_lattice_sum_needs_enough_k(square):
    """Too few dilations cannot determine the fit."""
    with pytest.raises(ArityError):
        lattice_sum_expansion(square, "x**2", [1, 2, 3])


def test_fit_exact_polynomial():
    """Nodes beyond the degree are checked against the fit."""
    assert fit_exact_polynomial([1, 2, 3, 4], [1, 4, 9, 16], 2) == [0, 0, 1]


def test_grid_integration_of_affine_function(square):
    """Grid integrals of x agree with the closed forms."""
    grid = build_grid(square, 4)
    f = PLFunction.affine(grid, 0, 1, 0)
    assert integrate(square, f) == Fraction(1, 2)
    assert integrate(square, f, "boundary") == 2
    assert integrate(square, f, weight="y") == Fraction(1, 4)
    assert integrate(square, f, power=2) == Fraction(1, 3)


def test_grid_convexity(square):
    """A hinge along a grid line is convex, its negative is not."""
    grid = build_grid(square, 2)
    hinge = PLFunction.from_callable(grid, lambda x, y: max(x - Fraction(1, 2), 0))
    assert hinge.is_convex
    assert not hinge.scale(-1).is_convex


def test_refinement_is_exact(triangle):
    """Interpolating to a nested grid keeps every value."""
    coarse = PLFunction.from_callable(build_grid(triangle, 2), lambda x, y: max(x, y))
    fine = coarse.refine(4)
    assert fine((Fraction(1, 4), Fraction(1, 2))) == Fraction(1, 2)
    assert integrate(triangle, fine) == integrate(triangle, coarse)


@pytest.fixture
def skew_triangle():
    return RationalPolygon.from_points([(0, 0), (3, 0), (0, 2)])


def test_clipped_cells_nest_under_refinement(skew_triangle):
    """A bump at a clipped-cell corner survives every dyadic refinement."""
    coarse = build_grid(skew_triangle, 1)
    corner = coarse.node_index[(Fraction(2), Fraction(2, 3))]
    bump = PLFunction(coarse, tuple(Fraction(int(i == corner)) for i in range(len(coarse.nodes))))
    for resolution in (2, 4):
        fine = bump.refine(resolution)
        assert integrate(skew_triangle, fine) == integrate(skew_triangle, bump)
        assert integrate(skew_triangle, fine, power=2) == integrate(skew_triangle, bump, power=2)
        assert integrate(skew_triangle, fine, "boundary") == integrate(skew_triangle, bump, "boundary")
        for a, b, c in fine.grid.triangles:
            p, q, r = fine.grid.nodes[a], fine.grid.nodes[b], fine.grid.nodes[c]
            centroid = ((p[0] + q[0] + r[0]) / 3, (p[1] + q[1] + r[1]) / 3)
            assert fine(centroid) == bump(centroid)


@pytest.mark.parametrize("resolution", [1, 2, 3])
def test_doubled_grid_keeps_coarse_nodes(skew_triangle, resolution):
    """Every node of the grid at N is a node at 2N, with a quarter of each area."""
    coarse = build_grid(skew_triangle, resolution)
    fine = build_grid(skew_triangle, 2 * resolution)
    assert set(coarse.nodes) <= set(fine.nodes)
    assert len(fine.triangles) == 4 * len(coarse.triangles)
    assert sum(fine.areas) == sum(coarse.areas) == skew_triangle.area


def test_lattice_sum_keeps_a_spare_k(square):
    """The fit takes one more k than its degree needs."""
    with pytest.raises(ArityError):
        lattice_sum_expansion(square, "x**2", range(1, 6))
    assert lattice_sum_expansion(square, "x**2", range(1, 7)).matches
