from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from src.core.lp import LinearProgram


def test_optimum_is_exact():
    """min −x − y subject to x + 2y ≤ 4, 3x + y ≤ 6."""
    lp = LinearProgram(2)
    lp.add_le({0: 1, 1: 2}, 4)
    lp.add_le({0: 3, 1: 1}, 6)
    result = lp.minimize({0: -1, 1: -1})
    assert result.optimal
    assert result.value == Fraction(-14, 5)
    assert result.x == (Fraction(8, 5), Fraction(6, 5))


def test_equality_and_lower_bounds():
    """Phase one finds a start from equality and ≥ rows."""
    lp = LinearProgram(3)
    lp.add_eq({0: 1, 1: 1, 2: 1}, 1)
    lp.add_ge({0: 1}, Fraction(1, 3))
    result = lp.minimize({0: 2, 1: 1, 2: 3})
    assert result.optimal
    assert result.value == Fraction(4, 3)


def test_infeasible():
    """Contradictory rows are reported, not raised."""
    lp = LinearProgram(1)
    lp.add_ge({0: 1}, 2)
    lp.add_le({0: 1}, 1)
    assert lp.minimize({0: 1}).status == "infeasible"


def test_unbounded():
    """A free descent direction is detected."""
    lp = LinearProgram(2)
    lp.add_ge({0: 1, 1: -1}, 0)
    assert lp.minimize({0: -1}).status == "unbounded"


def test_maximize_flips_sign():
    """maximize reports the maximum, not its negative."""
    lp = LinearProgram(1)
    lp.add_le({0: 3}, 2)
    assert lp.maximize({0: 1}).value == Fraction(2, 3)


@pytest.mark.parametrize("n", [3, 6])
def test_degenerate_vertex_terminates(n):
    """A highly degenerate polytope still solves."""
    lp = LinearProgram(n)
    for i in range(n):
        lp.add_le({i: 1}, 1)
        lp.add_le({j: 1 for j in range(i + 1)}, 1)
    result = lp.minimize({i: -1 for i in range(n)})
    assert result.optimal
    assert result.value == -1


def test_agrees_with_scipy_on_random_boxes():
    """Optimal values match HiGHS on random bounded problems."""
    rng = np.random.default_rng(5)
    for _ in range(25):
        n, m = rng.integers(2, 5), rng.integers(1, 5)
        a = rng.integers(-4, 5, size=(m, n))
        b = rng.integers(1, 10, size=m)
        c = rng.integers(-5, 6, size=n)
        lp = LinearProgram(int(n))
        for i in range(n):
            lp.add_le({i: 1}, 3)
        for row, rhs in zip(a, b):
            lp.add_le({j: int(v) for j, v in enumerate(row)}, int(rhs))
        exact = lp.minimize({j: int(v) for j, v in enumerate(c)})
        reference = linprog(c, A_ub=a, b_ub=b, bounds=[(0, 3)] * n, method="highs")
        assert exact.optimal and reference.status == 0
        assert float(exact.value) == pytest.approx(reference.fun, abs=1e-9)
