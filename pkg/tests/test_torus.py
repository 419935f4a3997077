import math
import random
from fractions import Fraction

import numpy as np
import pytest

from src.core.errors import DomainError, PreconditionError
from src.torus.action import WeightedAction, action_from_json, binary_form_action, hm_weight, parse_vector
from src.torus.moment import (
    eigenvalue_bound_check,
    minimize_norm_functional,
    moment_hessian,
    moment_lower_bound_check,
    moment_map,
    norm_functional,
)
from src.torus.stability import classify_stability, extremal_vector, modulus_and_worst_direction


@pytest.fixture
def unstable_pair():
    return WeightedAction.from_weights([[1], [2]])


def test_unstable_pair(unstable_pair):
    """Weights 1 and 2 miss the origin; the worst direction is −1."""
    report = classify_stability(unstable_pair)
    assert report.stability_class == "unstable"
    assert report.inf_norm_squared == 1
    assert report.worst_direction == (Fraction(-1),)
    assert report.worst_weight == -1
    assert hm_weight(unstable_pair, [-1]) == -1


@pytest.mark.parametrize(
    "n,r,s,expected",
    [
        (4, 1, 1, "stable"),
        (5, 2, 2, "stable"),
        (4, 2, 0, "semistable-not-polystable"),
        (4, 3, 0, "unstable"),
        (4, 2, 2, "polystable-not-stable"),
        (3, 2, 0, "unstable"),
    ],
)
def test_binary_forms(n, r, s, expected):
    """Root multiplicity against n/2 decides the class of a binary form."""
    assert classify_stability(binary_form_action(n, r, s)).stability_class == expected


def test_stable_modulus():
    """The modulus is the distance from the origin to the relative boundary."""
    report = classify_stability(binary_form_action(4, 1, 1))
    assert report.modulus_squared == 4
    modulus, worst, inf_norm = modulus_and_worst_direction(binary_form_action(4, 1, 1))
    assert modulus == 2.0
    assert worst is None
    assert inf_norm == 0.0


def test_single_zero_weight_has_infinite_modulus():
    """A lone weight at the origin has no relative boundary."""
    report = classify_stability(binary_form_action(4, 2, 2))
    assert report.modulus_squared is None
    assert math.isinf(report.modulus)


def test_two_dimensional_boundary_point():
    """The origin on an edge of a triangle of weights is semistable only."""
    action = WeightedAction.from_weights([[-1, 0], [1, 0], [0, 1]])
    report = classify_stability(action)
    assert report.stability_class == "semistable-not-polystable"
    assert report.worst_direction is not None
    assert report.worst_weight == 0
    assert hm_weight(action, report.worst_direction) == 0


def test_support_flags_drop_weights():
    """Unsupported coordinates do not enter the weight polytope."""
    action = WeightedAction.from_weights([[-1], [1], [2]], [False, True, True])
    assert classify_stability(action).stability_class == "unstable"


def test_action_validation():
    """Mismatched dimensions and empty support are rejected."""
    with pytest.raises(DomainError):
        WeightedAction.from_weights([[1, 0], [1]])
    with pytest.raises(DomainError):
        WeightedAction.from_weights([[1], [2]], [False, False])
    with pytest.raises(DomainError):
        hm_weight(WeightedAction.from_weights([[1]]), [0])
    with pytest.raises(DomainError):
        action_from_json({"dimension": 2, "weights": [[1], [2]]})


def test_parse_vector():
    """Comma lists and JSON lists both parse."""
    assert parse_vector("1,-1/2") == (Fraction(1), Fraction(-1, 2))
    assert parse_vector("[2, 3]") == (Fraction(2), Fraction(3))


def test_extremal_vector_is_affine_projection():
    """Weights on the line x + y = 2 project the origin to (1, 1)."""
    action = WeightedAction.from_weights([[2, 0], [0, 2], [1, 1]])
    assert extremal_vector(action) == (Fraction(1), Fraction(1))


def test_moment_map_is_gradient():
    """Finite differences of the norm functional reproduce μ."""
    action = WeightedAction.from_weights([[1, 0], [0, 1], [-1, -1], [2, 1]])
    xi = np.array([0.3, -0.2])
    h = 1e-6
    fd = np.array(
        [(norm_functional(action, xi + h * e) - norm_functional(action, xi - h * e)) / (2 * h) for e in np.eye(2)]
    )
    assert np.allclose(fd, moment_map(action, xi), atol=1e-6)
    hess = moment_hessian(action, xi)
    assert np.allclose(hess, hess.T)
    assert np.linalg.eigvalsh(hess).min() > 0


def test_kempf_ness_converges_for_stable_point():
    """The minimum of the norm functional for weights −1, 3 sits at −log(3)/8."""
    result = minimize_norm_functional(WeightedAction.from_weights([[-1], [3]]))
    assert result.converged
    assert abs(result.xi[0] + math.log(3) / 8) < 1e-8
    assert result.moment_norm < 1e-9


def test_kempf_ness_diverges_for_unstable_point(unstable_pair):
    """An unstable point escapes along the worst direction."""
    result = minimize_norm_functional(unstable_pair)
    assert result.diverged
    assert not result.converged
    assert result.recession_direction[0] == pytest.approx(-1.0)
    assert result.moment_norm >= 0.5


def test_eigenvalue_bound():
    """dμ at the zero of μ dominates 2λ²/n."""
    check = eigenvalue_bound_check(binary_form_action(4, 1, 1))
    assert check.holds
    assert check.bound == pytest.approx(8 / 3)
    assert check.min_eigenvalue == pytest.approx(16 / 3, rel=1e-6)


def test_eigenvalue_bound_requires_polystable(unstable_pair):
    """Unstable points have no zero of μ."""
    with pytest.raises(PreconditionError):
        eigenvalue_bound_check(unstable_pair)


def test_lower_bound_on_unstable_pair(unstable_pair):
    """inf ‖μ‖² = 1 meets ‖χ‖² + F²/‖α‖² with equality."""
    check = moment_lower_bound_check(unstable_pair, [-1])
    assert check.applicable
    assert check.weight == -1
    assert check.lhs == check.rhs == 1
    assert check.holds


def test_lower_bound_not_applicable_for_nonnegative_weight(unstable_pair):
    """A direction with nonnegative relative weight is skipped."""
    assert not moment_lower_bound_check(unstable_pair, [1]).applicable


def test_lower_bound_on_random_instances():
    """The bound holds on every applicable random instance."""
    rng = random.Random(7)
    checked = 0
    for _ in range(200):
        d = rng.randint(1, 3)
        weights = [[rng.randint(-3, 3) for _ in range(d)] for _ in range(rng.randint(1, 5))]
        alpha = [rng.randint(-2, 2) for _ in range(d)]
        if not any(alpha):
            continue
        check = moment_lower_bound_check(WeightedAction.from_weights(weights), alpha)
        if check.applicable:
            checked += 1
            assert check.holds
    assert checked > 0


BINARY_FORMS = [(4, 1, 1), (5, 2, 2), (4, 2, 0), (4, 3, 0), (4, 2, 2), (3, 2, 0)]

PLANE_ACTIONS = [
    [[1, 0], [0, 1], [-1, -1]],
    [[-1, 0], [1, 0], [0, 1]],
    [[1, 0], [0, 1], [1, 1]],
    [[1, 0], [-1, 0]],
]


def _summary(report):
    return report.stability_class, report.modulus_squared, report.inf_norm_squared


@pytest.mark.parametrize("n,r,s", BINARY_FORMS)
def test_binary_form_class_ignores_weight_order(n, r, s):
    """Reversing or shuffling the weight list changes nothing."""
    action = binary_form_action(n, r, s)
    expected = _summary(classify_stability(action))
    shuffled = list(action.weights)
    random.Random(n * 10 + r).shuffle(shuffled)
    for weights in (action.weights[::-1], shuffled):
        assert _summary(classify_stability(WeightedAction.from_weights(weights))) == expected


@pytest.mark.parametrize("n,r,s", BINARY_FORMS)
def test_binary_form_class_under_inversion(n, r, s):
    """Swapping the roles of the two points of P¹ negates the weight and keeps class and modulus."""
    action = binary_form_action(n, r, s)
    flipped = action.transformed([[-1]])
    assert _summary(classify_stability(flipped)) == _summary(classify_stability(action))
    assert _summary(classify_stability(binary_form_action(n, s, r))) == _summary(classify_stability(action))


@pytest.mark.parametrize("weights", PLANE_ACTIONS)
@pytest.mark.parametrize("matrix", [[[0, 1], [1, 0]], [[-1, 0], [0, 1]], [[0, -1], [-1, 0]]])
def test_plane_class_under_signed_permutations(weights, matrix):
    """Orthogonal lattice automorphisms keep class, modulus and infimum."""
    action = WeightedAction.from_weights(weights)
    assert _summary(classify_stability(action.transformed(matrix))) == _summary(classify_stability(action))


@pytest.mark.parametrize("weights", PLANE_ACTIONS)
@pytest.mark.parametrize("matrix", [[[1, 1], [0, 1]], [[2, 1], [1, 1]], [[1, 0], [-3, 1]]])
def test_plane_class_under_unimodular_maps(weights, matrix):
    """A GL(2, Z) change of coordinates keeps the stability class."""
    action = WeightedAction.from_weights(weights)
    assert classify_stability(action.transformed(matrix)).stability_class == classify_stability(action).stability_class


@pytest.mark.parametrize("weights", [[[1], [2]], [[1, 0], [0, 1], [1, 1]], [[-1, 0], [1, 0], [0, 1]]])
def test_support_function_dominates_moment_map(weights):
    """h(ξ) = max⟨ξ, α⟩ bounds ⟨ξ, μ(η)⟩ from above for every η."""
    action = WeightedAction.from_weights(weights)
    rng = np.random.default_rng(17)
    for _ in range(25):
        xi = rng.integers(-3, 4, size=action.dimension)
        if not xi.any():
            continue
        eta = rng.normal(size=action.dimension)
        assert float(hm_weight(action, xi.tolist())) >= float(np.dot(xi, moment_map(action, eta))) - 1e-12
