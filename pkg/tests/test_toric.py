from fractions import Fraction

import numpy as np
import pytest

from src.core.errors import PositivityError, ResolutionError, StabilityPreconditionError
from src.core.exact import from_sympy, to_sympy
from src.geometry.grid import PLFunction, build_grid
from src.geometry.polygon import RationalPolygon, standard_triangle, unit_square
from src.geometry.polynomial import PolynomialQ
from src.toric.bundle import IntervalFunction, toric_bundle_futaki
from src.toric.cone import (
    boundary_l2_constant_check,
    minimize_convex_cone,
    random_convex_function,
    uniform_ratio_estimate,
)
from src.toric.creases import (
    S,
    T,
    SimplePL,
    crease_polynomial,
    find_zero_creases,
    semistable_decomposition,
    simple_pl_functional,
)
from src.toric.functional import affine_futaki, donaldson_functional, extremal_affine, pi_norm_squared


@pytest.fixture
def square():
    return unit_square()


@pytest.fixture
def triangle():
    return standard_triangle()


@pytest.fixture
def heavy_left_square():
    """Unit square with the left edge's boundary measure scaled by five."""
    return unit_square().with_edge_weights([1, 1, 1, 5])


@pytest.fixture
def strip():
    """[0,2]×[0,1] with no boundary measure on the short edges."""
    return RationalPolygon.rectangle(2, 1).with_edge_weights([1, 0, 1, 0])


def test_extremal_affine_is_constant_for_symmetric_polygons(square, triangle):
    """A is the average scalar curvature on the triangle and the square."""
    a_tri = extremal_affine(triangle)
    a_sq = extremal_affine(square)
    assert a_tri.is_constant and a_tri.a0 == 6
    assert a_sq.is_constant and a_sq.a0 == 4
    assert affine_futaki(square) == (0, 0, 0)


def test_extremal_affine_for_weighted_measure(heavy_left_square):
    """Unequal edge weights give a non-constant A killing 1, x and y."""
    A = extremal_affine(heavy_left_square)
    assert not A.is_constant
    grid = build_grid(heavy_left_square, 2)
    for coeffs in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
        assert donaldson_functional(heavy_left_square, PLFunction.affine(grid, *coeffs), A) == 0


def test_functional_vanishes_on_affine(triangle):
    """L(x) = 0 on the triangle."""
    grid = build_grid(triangle, 4)
    assert donaldson_functional(triangle, PLFunction.affine(grid, 0, 1, 0)) == 0


def test_functional_on_hinge(square):
    """L(max(x − 1/2, 0)) = 1/4 on the square."""
    grid = build_grid(square, 4)
    f = PLFunction.from_callable(grid, lambda x, y: max(x - Fraction(1, 2), 0))
    assert donaldson_functional(square, f) == Fraction(1, 4)


def test_simple_pl_agrees_with_grid_evaluation(square):
    """Clipping and grid integration give the same value for a grid-aligned crease."""
    crease = SimplePL((Fraction(1, 2), Fraction(0)), (Fraction(1, 2), Fraction(1)), 0, 2)
    grid = build_grid(square, 2)
    assert simple_pl_functional(square, crease) == Fraction(1, 4)
    assert donaldson_functional(square, crease.on_grid(grid)) == Fraction(1, 4)


def test_crease_polynomial_at_a_point(square):
    """The bivariate crease polynomial evaluates to the same hinge value."""
    poly = crease_polynomial(square, 0, 2, extremal_affine(square))
    half = to_sympy(Fraction(1, 2))
    assert from_sympy(poly.as_expr().subs({S: half, T: half})) == Fraction(1, 4)


@pytest.mark.slow
@pytest.mark.parametrize("resolution", [2, 4, 8])
@pytest.mark.parametrize("polygon", [unit_square(), standard_triangle()])
def test_cone_minimum_nonnegative(polygon, resolution):
    """Polygons carrying a constant scalar curvature metric are grid-certified."""
    result = minimize_convex_cone(polygon, resolution)
    assert result.value >= 0
    assert result.status == "grid-certified"
    assert not result.destabilized


def test_cone_finds_destabilizer(heavy_left_square):
    """Moving boundary weight to one edge destabilises the constant functional."""
    result = minimize_convex_cone(heavy_left_square, 2)
    assert result.value < 0
    assert result.destabilized
    assert result.witness.is_convex
    assert result.witness.values[result.anchor] == 0
    assert donaldson_functional(heavy_left_square, result.witness) == result.value


def test_cone_resolution_floor(square):
    """Resolution one is refused."""
    with pytest.raises(ResolutionError):
        minimize_convex_cone(square, 1)


def test_uniform_ratio_positive_on_square(square):
    """The sampled uniform ratio is positive on the square."""
    estimate = uniform_ratio_estimate(square, 4, samples=10, seed=0)
    assert estimate.estimate > 0
    assert estimate.lp_value >= 0
    assert estimate.kind == "estimate"


def test_boundary_l2_constant_is_monotone_and_bounded(triangle):
    """The running maximum never decreases and stays finite."""
    check = boundary_l2_constant_check(triangle, samples=6, resolutions=[2, 4], seed=3)
    levels = [level.max_ratio_squared for level in check.levels]
    assert levels == sorted(levels)
    assert 0 < check.constant < 10


def test_pi_norm_vanishes_on_affine(triangle):
    """π removes affine functions exactly."""
    grid = build_grid(triangle, 2)
    assert pi_norm_squared(triangle, PLFunction.affine(grid, 1, 2, -3)) == 0


def test_no_zero_creases_on_square(square):
    """The square is stable: no simple PL function has L = 0."""
    creases, families = find_zero_creases(square, 2)
    assert creases == []
    assert families == []


def test_square_decomposes_trivially(square):
    """A stable polygon is its own single polystable piece."""
    result = semistable_decomposition(square, 2)
    assert len(result.pieces) == 1
    assert result.pieces[0].tag == "polystable"
    assert result.total_area == square.area


def test_strip_has_family_of_vertical_creases(strip):
    """Every vertical crease of the strip has L = 0."""
    creases, families = find_zero_creases(strip, 2)
    assert creases == []
    assert len(families) == 1
    assert families[0].parallel
    for c in (Fraction(1, 3), Fraction(1), Fraction(3, 2)):
        crease = SimplePL((c, Fraction(0)), (c, Fraction(1)), 0, 2)
        assert simple_pl_functional(strip, crease) == 0
        assert families[0].contains(crease)


def test_strip_decomposes_into_parallelogram(strip):
    """A ≡ 2 closes the vertical family onto the short edges, so nothing is cut."""
    _, families = find_zero_creases(strip, 2)
    assert {p[0] for seg in (families[0].first, families[0].last) for p in seg} == {0, 2}
    result = semistable_decomposition(strip, 2)
    assert [p.tag for p in result.pieces] == ["parallelogram"]
    assert result.total_area == 2


def test_unstable_polygon_has_no_decomposition(heavy_left_square):
    """Crease search needs a semistable polygon."""
    with pytest.raises(StabilityPreconditionError):
        find_zero_creases(heavy_left_square, 2)


def test_bundle_with_trivial_densities_is_half_functional():
    """Q1 = 1, Q2 = 0 gives half of L on random fixtures."""
    rng = np.random.default_rng(11)
    polygons = [
        unit_square(),
        standard_triangle(),
        RationalPolygon.from_points([(0, 0), (2, 0), (1, 1), (0, 1)]),
    ]
    for k in range(50):
        polygon = polygons[k % len(polygons)]
        f = random_convex_function(build_grid(polygon, 2 + 2 * (k % 2)), rng)
        result = toric_bundle_futaki(polygon, 1, 0, f)
        assert result.futaki == donaldson_functional(polygon, f) / 2


def test_bundle_on_polygon_with_weight(square):
    """Affine test functions have zero relative invariant."""
    grid = build_grid(square, 2)
    result = toric_bundle_futaki(square, "1 + x", "y", PLFunction.affine(grid, 1, 1, 0))
    assert result.relative_futaki == 0
    assert result.relative_norm_squared == 0
    assert result.a0 == Fraction(3, 2)


def test_bundle_on_interval_hinge():
    """F(max(τ − 1/2, 0)) on [0, 1] with unit densities is 1/8."""
    f = IntervalFunction.hinge(0, 1, Fraction(1, 2))
    result = toric_bundle_futaki((0, 1), PolynomialQ.of(1), PolynomialQ.of(0), f)
    assert result.futaki == Fraction(1, 8)
    assert result.a0 == 1
    assert result.a1 == 1


def test_bundle_on_interval_affine_is_relatively_trivial():
    """The relative invariant ignores affine functions."""
    f = IntervalFunction.affine(0, 3, 2, -1)
    result = toric_bundle_futaki((0, 3), PolynomialQ.of(1, 1), PolynomialQ.of(-1), f)
    assert result.relative_futaki == 0
    assert result.relative_norm_squared == 0


def test_bundle_rejects_nonpositive_density():
    """Q1 must be positive on the whole interval."""
    with pytest.raises(PositivityError):
        toric_bundle_futaki((0, 2), PolynomialQ.of(-1, 1), PolynomialQ.of(0), IntervalFunction.hinge(0, 2, 1))


def test_interval_function_convexity():
    """Hinges are convex, their reflections are not."""
    hinge = IntervalFunction.hinge(0, 2, 1)
    assert hinge.is_convex
    assert not IntervalFunction((0, 1, 2), (0, 1, 0)).is_convex
    assert hinge(Fraction(3, 2)) == Fraction(1, 2)


@pytest.fixture
def balanced_hexagon():
    """Symmetric hexagon whose heavy horizontal edges make x = 0 the only zero crease."""
    return RationalPolygon.from_points(
        [(-1, 0), (1, 0), (2, 1), (1, 2), (-1, 2), (-2, 1)]
    ).with_edge_weights([13, 5, 5, 13, 5, 5])


@pytest.mark.parametrize("c", [Fraction(0), Fraction(1, 3), Fraction(2), Fraction(7, 2)])
@pytest.mark.parametrize("relative", [False, True])
def test_functional_is_homogeneous(heavy_left_square, c, relative):
    """L(c·f) = c·L(f) for both the constant and the extremal A."""
    A = extremal_affine(heavy_left_square) if relative else None
    rng = np.random.default_rng(5)
    f = random_convex_function(build_grid(heavy_left_square, 4), rng, offset=True)
    assert donaldson_functional(heavy_left_square, f.scale(c), A) == c * donaldson_functional(heavy_left_square, f, A)


@pytest.mark.parametrize("coeffs", [(1, 0, 0), (0, 3, 0), (0, 0, -2), (Fraction(1, 2), -1, Fraction(5, 3))])
def test_relative_functional_ignores_affine_terms(heavy_left_square, coeffs):
    """L_A(f + g) = L_A(f) for affine g when A is the non-constant extremal function."""
    A = extremal_affine(heavy_left_square)
    grid = build_grid(heavy_left_square, 4)
    f = random_convex_function(grid, np.random.default_rng(8))
    g = PLFunction.affine(grid, *coeffs)
    assert donaldson_functional(heavy_left_square, f + g, A) == donaldson_functional(heavy_left_square, f, A)


@pytest.mark.parametrize(
    "polygon,resolution",
    [
        (unit_square(), 2),
        (unit_square().with_edge_weights([1, 1, 1, 5]), 2),
        pytest.param(standard_triangle(), 3, marks=pytest.mark.slow),
    ],
)
def test_cone_minimum_decreases_under_refinement(polygon, resolution):
    """The coarse minimiser stays feasible on the doubled grid, so the minimum can only drop."""
    coarse = minimize_convex_cone(polygon, resolution)
    fine = minimize_convex_cone(polygon, 2 * resolution)
    assert fine.witness.grid.nodes[fine.anchor] == coarse.witness.grid.nodes[coarse.anchor]
    embedded = coarse.witness.refine(2 * resolution)
    assert embedded.is_convex
    assert embedded.values[fine.anchor] == 0
    assert donaldson_functional(polygon, embedded) == coarse.value
    assert fine.value <= coarse.value


@pytest.mark.parametrize("resolution", [2, 4])
@pytest.mark.parametrize("polygon", [unit_square(), standard_triangle()])
def test_zero_minimum_only_on_affine_witnesses(polygon, resolution):
    """On stable polygons the minimum is zero exactly when the witness is affine."""
    result = minimize_convex_cone(polygon, resolution)
    assert result.value >= 0
    assert (result.value == 0) == (pi_norm_squared(polygon, result.witness) == 0)


def test_boundary_anchor_admits_an_affine_witness(triangle):
    """At N = 2 the anchor sits on the hypotenuse and 1 − x − y is feasible."""
    result = minimize_convex_cone(triangle, 2)
    assert result.witness.grid.nodes[result.anchor] == (Fraction(1, 2), Fraction(1, 2))
    assert result.value == 0
    assert pi_norm_squared(triangle, result.witness) == 0


def test_isolated_crease_on_hexagon(balanced_hexagon):
    """The vertical axis is the only zero crease; a parallel crease at x = c pays 2c²."""
    A = extremal_affine(balanced_hexagon)
    assert A.is_constant and A.a0 == 12
    creases, families = find_zero_creases(balanced_hexagon, 2)
    assert families == []
    assert len(creases) == 1
    assert {creases[0].start, creases[0].end} == {(0, 0), (0, 2)}
    for c in (Fraction(1, 2), Fraction(-1, 3)):
        crease = SimplePL((c, Fraction(0)), (c, Fraction(2)), 0, 3)
        assert simple_pl_functional(balanced_hexagon, crease) == 2 * c * c


def test_semistable_hexagon_reaches_zero_on_a_crease(balanced_hexagon):
    """The cone minimum is zero and its witness is the non-affine axis crease."""
    result = minimize_convex_cone(balanced_hexagon, 2)
    assert result.value == 0
    assert not result.destabilized
    assert pi_norm_squared(balanced_hexagon, result.witness) > 0


def test_isolated_crease_splits_into_two_polystable_pieces(balanced_hexagon):
    """Cutting along the one zero crease leaves two polystable halves."""
    result = semistable_decomposition(balanced_hexagon, 2)
    assert len(result.creases) == 1
    assert result.families == ()
    assert len(result.pieces) == 2
    assert [p.tag for p in result.pieces] == ["polystable", "polystable"]
    assert result.total_area == balanced_hexagon.area == 6
    for piece in result.pieces:
        assert piece.polygon.area == 3
        assert 0 in piece.polygon.edge_weights
        assert extremal_affine(piece.polygon).a0 == 12
