from fractions import Fraction

import mpmath
import numpy as np
import pytest

from src.core.errors import DomainError
from src.geometry.polynomial import (
    PolynomialQ,
    isolate_real_roots,
    real_root_count,
    refine_root,
    sign_on_interval,
)


def test_trailing_zeros_trimmed():
    """Leading zero coefficients do not count towards the degree."""
    p = PolynomialQ.of(1, 2, 0, 0)
    assert p.degree == 1
    assert p == PolynomialQ.of(1, 2)


def test_arithmetic():
    """Products, sums and derivatives over QQ."""
    p = PolynomialQ.of(-1, 1)
    q = PolynomialQ.of(1, 1)
    assert p * q == PolynomialQ.of(-1, 0, 1)
    assert (p + q) == PolynomialQ.of(0, 2)
    assert (p * q).derivative() == PolynomialQ.of(0, 2)
    assert PolynomialQ.of(0, 0, 3).integrate(0, 1) == 1


def test_isolates_sqrt_two():
    """x² − 2 has two roots, each isolated to the requested width."""
    roots = isolate_real_roots(PolynomialQ.of(-2, 0, 1), precision=Fraction(1, 10**6))
    assert len(roots) == 2
    for root, expected in zip(roots, (-2**0.5, 2**0.5)):
        assert root.width <= Fraction(1, 10**6)
        assert float(root.lo) <= expected <= float(root.hi)


def test_isolation_respects_interval():
    """Only roots inside the open interval are reported."""
    p = PolynomialQ.of(-6, 11, -6, 1)  # (x-1)(x-2)(x-3)
    roots = isolate_real_roots(p, (Fraction(3, 2), None))
    assert len(roots) == 2
    assert all(r.contains(2) or r.contains(3) for r in roots)
    assert real_root_count(p, (0, 1)) == 0


def test_exact_rational_root_found():
    """A rational root landing on a bisection midpoint is returned exactly."""
    roots = isolate_real_roots(PolynomialQ.of(0, -1, 1), (-1, 1))
    assert any(r.lo == r.hi == 0 for r in roots)


def test_root_count_matches_dense_sampling():
    """Sturm counts agree with sign changes of a well-separated quartic."""
    p = PolynomialQ.of(-12, -48, -52, -16, 1)
    xs = np.linspace(-50, 50, 200001)
    values = np.polyval([1, -16, -52, -48, -12], xs)
    assert real_root_count(p) == int(np.sum(np.sign(values[:-1]) != np.sign(values[1:])))


def test_sign_on_interval():
    """Strict signs, with closed intervals failing at endpoint zeros."""
    p = PolynomialQ.of(0, -1, 1)  # x(x-1)
    assert sign_on_interval(p, 0, 1) == -1
    assert sign_on_interval(p, 0, 1, closed=True) == 0
    assert sign_on_interval(p, 2, 5) == 1
    assert sign_on_interval(p, -1, 2) == 0


def test_refine_root():
    """Refinement reaches the requested number of digits."""
    p = PolynomialQ.of(-2, 0, 1)
    root = isolate_real_roots(p, (0, None))[0]
    with mpmath.workdps(40):
        value = refine_root(p, root, 30)
        assert abs(value - mpmath.sqrt(2)) < mpmath.mpf(10) ** -30


def test_nonpositive_precision_rejected():
    """A zero precision is a domain error."""
    with pytest.raises(DomainError):
        isolate_real_roots(PolynomialQ.of(-2, 0, 1), precision=0)
