"""Univariate polynomials with exact rational coefficients and Sturm root isolation.

Besides :class:`PolynomialQ` this module carries a few coefficient-list helpers
that work over any field the callers use (``Fraction`` for exact work,
``mpmath.mpf`` for algebraic junction points).
"""
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from math import comb
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import sympy

from ..core.errors import DomainError
from ..core.exact import ExactModel, Rational, from_sympy, to_mpf

TAU = sympy.Symbol("tau")


def horner(coefficients: Sequence, x):
    """Evaluate an ascending coefficient list at ``x``."""
    acc = 0 * x
    for c in reversed(coefficients):
        acc = acc * x + c
    return acc


def poly_mul(p: Sequence, q: Sequence) -> list:
    if not p or not q:
        return []
    out = [0 * p[0]] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return out


def poly_add(p: Sequence, q: Sequence) -> list:
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def poly_derivative(p: Sequence) -> list:
    return [k * c for k, c in enumerate(p)][1:]


def poly_compose_affine(p: Sequence, shift, scale) -> list:
    """Coefficients of ``p(scale * x + shift)``."""
    out = [0 * scale] * len(p)
    for k, c in enumerate(p):
        for i in range(k + 1):
            out[i] = out[i] + c * comb(k, i) * scale**i * shift ** (k - i)
    return out


def poly_integral(p: Sequence, a, b):
    """Definite integral of the polynomial over [a, b]."""
    return sum(c * (b ** (k + 1) - a ** (k + 1)) / (k + 1) for k, c in enumerate(p))


@dataclass(frozen=True)
class PolynomialQ:
    """Polynomial with Fraction coefficients in ascending degree."""

    coefficients: Tuple[Fraction, ...]

    def __post_init__(self):
        coeffs = [Fraction(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def of(cls, *coefficients: Union[int, Fraction, str]) -> "PolynomialQ":
        return cls(tuple(Fraction(c) for c in coefficients))

    @classmethod
    def from_sympy(cls, expr, var: sympy.Symbol = TAU) -> "PolynomialQ":
        poly = sympy.Poly(expr, var, domain=sympy.QQ)
        return cls(tuple(from_sympy(c) for c in reversed(poly.all_coeffs())))

    def to_sympy(self, var: sympy.Symbol = TAU) -> sympy.Poly:
        coeffs = [sympy.Rational(c.numerator, c.denominator) for c in reversed(self.coefficients)]
        return sympy.Poly(coeffs or [0], var, domain=sympy.QQ)

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> Fraction:
        return self.coefficients[-1] if self.coefficients else Fraction(0)

    def __call__(self, x):
        if isinstance(x, (int, Fraction)):
            return horner(self.coefficients, Fraction(x))
        return horner([to_mpf(c) for c in self.coefficients], x)

    def __add__(self, other: "PolynomialQ") -> "PolynomialQ":
        return PolynomialQ(tuple(poly_add(self.coefficients, other.coefficients)))

    def __sub__(self, other: "PolynomialQ") -> "PolynomialQ":
        return self + other.scale(-1)

    def __mul__(self, other: "PolynomialQ") -> "PolynomialQ":
        return PolynomialQ(tuple(poly_mul(self.coefficients, other.coefficients)))

    def scale(self, k) -> "PolynomialQ":
        return PolynomialQ(tuple(Fraction(k) * c for c in self.coefficients))

    def derivative(self) -> "PolynomialQ":
        return PolynomialQ(tuple(poly_derivative(self.coefficients)))

    def integrate(self, a, b) -> Fraction:
        return poly_integral(self.coefficients, Fraction(a), Fraction(b))

    def divmod(self, other: "PolynomialQ") -> Tuple["PolynomialQ", "PolynomialQ"]:
        q, r = sympy.div(self.to_sympy(), other.to_sympy())
        return PolynomialQ.from_sympy(q.as_expr()), PolynomialQ.from_sympy(r.as_expr())

    def squarefree(self) -> "PolynomialQ":
        return PolynomialQ.from_sympy(sympy.sqf_part(self.to_sympy()).as_expr())

    def __str__(self) -> str:
        return str(self.to_sympy().as_expr())


class RootInterval(ExactModel):
    """Isolating interval: the root lies in (lo, hi], or equals lo when lo == hi."""

    lo: Rational
    hi: Rational

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi


class SturmSequence:
    """Sturm chain of the squarefree part of ``p``, kept as Fraction coefficient lists."""

    def __init__(self, p: PolynomialQ):
        if p.is_zero:
            raise DomainError("root isolation of the zero polynomial")
        self.polynomial = p.squarefree()
        chain = sympy.sturm(self.polynomial.to_sympy())
        self._chain = [PolynomialQ.from_sympy(q.as_expr()).coefficients for q in chain]

    @cached_property
    def cauchy_bound(self) -> Fraction:
        coeffs = self.polynomial.coefficients
        lead = abs(coeffs[-1])
        return 1 + max((abs(c) / lead for c in coeffs[:-1]), default=Fraction(0))

    def variations(self, x: Fraction) -> int:
        signs = [horner(q, x) for q in self._chain]
        nonzero = [s for s in signs if s != 0]
        return sum(1 for u, v in zip(nonzero, nonzero[1:]) if (u > 0) != (v > 0))

    def count_half_open(self, a: Fraction, b: Fraction) -> int:
        """Distinct roots in (a, b]."""
        return self.variations(a) - self.variations(b)

    def count_open(self, a: Fraction, b: Fraction) -> int:
        n = self.count_half_open(a, b)
        return n - 1 if self.polynomial(b) == 0 else n


def _open_bounds(seq: SturmSequence, interval) -> Tuple[Fraction, Fraction]:
    bound = seq.cauchy_bound
    lo, hi = (None, None) if interval is None else interval
    lo = -bound if lo is None else max(Fraction(lo), -bound - 1)
    hi = bound if hi is None else min(Fraction(hi), bound + 1)
    return lo, hi


def isolate_real_roots(
    p: PolynomialQ,
    interval: Optional[Tuple[Optional[object], Optional[object]]] = None,
    precision: object = Fraction(1, 1000),
) -> List[RootInterval]:
    """Certified isolating intervals for the distinct real roots of ``p``.

    ``interval`` is an open range ``(lo, hi)``; ``None`` on either side means
    unbounded. Each returned interval has width at most ``precision``.
    """
    precision = Fraction(precision)
    if precision <= 0:
        raise DomainError("precision must be positive")
    seq = SturmSequence(p)
    if seq.polynomial.degree < 1:
        return []
    lo, hi = _open_bounds(seq, interval)
    if lo >= hi:
        return []

    found: List[RootInterval] = []
    stack = [(lo, hi, seq.count_open(lo, hi))]
    while stack:
        a, b, count = stack.pop()
        if count == 0:
            continue
        if count == 1 and b - a <= precision:
            found.append(RootInterval(lo=a, hi=b))
            continue
        mid = (a + b) / 2
        if seq.polynomial(mid) == 0:
            found.append(RootInterval(lo=mid, hi=mid))
            left = seq.count_half_open(a, mid) - 1
            right = seq.count_open(mid, b)
            stack.append((a, mid, left))
            stack.append((mid, b, right))
        else:
            left = seq.count_half_open(a, mid)
            stack.append((a, mid, left))
            stack.append((mid, b, count - left))
    return sorted(found, key=lambda r: r.lo)


def real_root_count(p: PolynomialQ, interval=None) -> int:
    seq = SturmSequence(p)
    if seq.polynomial.degree < 1:
        return 0
    lo, hi = _open_bounds(seq, interval)
    return seq.count_open(lo, hi) if lo < hi else 0


def sign_on_interval(p: PolynomialQ, lo, hi, closed: bool = False) -> int:
    """+1 or -1 when ``p`` keeps a strict sign on the interval, 0 otherwise."""
    lo, hi = Fraction(lo), Fraction(hi)
    if p.is_zero:
        return 0
    if p.degree == 0:
        return 1 if p.leading > 0 else -1
    if closed and (p(lo) == 0 or p(hi) == 0):
        return 0
    if SturmSequence(p).count_open(lo, hi) != 0:
        return 0
    value = p((lo + hi) / 2)
    if value == 0:
        return 0
    return 1 if value > 0 else -1


def refine_root(p: PolynomialQ, root: RootInterval, digits: int):
    """High-precision value of the isolated root by exact bisection."""
    if root.lo == root.hi:
        return to_mpf(root.lo)
    seq = SturmSequence(p)
    a, b = root.lo, root.hi
    target = Fraction(1, 10 ** (digits + 2))
    while b - a > target:
        mid = (a + b) / 2
        if seq.polynomial(mid) == 0:
            return to_mpf(mid)
        if seq.count_half_open(a, mid) == 1:
            b = mid
        else:
            a = mid
    return to_mpf((a + b) / 2)
