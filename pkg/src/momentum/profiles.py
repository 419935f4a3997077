"""Momentum profiles of circle-invariant metrics on the ruled surface.

A profile on [a, b] is φ = N/(1 + τ) with N a polynomial. Its scalar
curvature is S = (−4 − N'')/(2(1 + τ)), and φ' at a zero of N is
N'/(1 + τ), so the boundary slopes are linear conditions on N.
"""
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Literal, Optional, Sequence, Tuple, Union

import mpmath
import sympy
import structlog

from ..core.errors import DomainError, InternalConsistencyError
from ..core.exact import ExactModel, align, close_enough, from_sympy, parse_rational, to_mpf, to_sympy
from ..geometry.polynomial import (
    PolynomialQ,
    horner,
    poly_add,
    poly_compose_affine,
    poly_derivative,
    poly_mul,
    real_root_count,
    sign_on_interval,
)

logger = structlog.get_logger()

Number = Union[Fraction, mpmath.mpf]
BoundaryClass = Literal["smooth", "complete-no-S0", "complete-no-Sinf", "complete-both"]

# φ'(a), φ'(b)
BOUNDARY_SLOPES = {
    "smooth": (2, -2),
    "complete-no-S0": (0, -2),
    "complete-no-Sinf": (2, 0),
    "complete-both": (0, 0),
}

CLOSED_FORM_MODES = ("smooth", "no-sinf", "no-szero", "no-szero-shifted")
_MODE_CLASSES = {
    "smooth": "smooth",
    "no-sinf": "complete-no-Sinf",
    "no-szero": "complete-no-S0",
    "no-szero-shifted": "complete-no-S0",
}


def _num(x) -> Number:
    return x if isinstance(x, (Fraction, mpmath.mpf)) else parse_rational(x)


@dataclass(frozen=True)
class MomentumProfile:
    lo: Number
    hi: Number
    numerator: Tuple[Number, ...]
    boundary_class: BoundaryClass

    def __post_init__(self):
        if self.boundary_class not in BOUNDARY_SLOPES:
            raise DomainError("unknown boundary class", {"boundary_class": self.boundary_class})
        if not (self.lo >= 0 and self.hi > self.lo):
            raise DomainError("a profile needs 0 ≤ a < b", {"a": self.lo, "b": self.hi})
        n, dn = self.numerator, poly_derivative(self.numerator)
        s_lo, s_hi = BOUNDARY_SLOPES[self.boundary_class]
        checks = (
            (horner(n, self.lo), 0),
            (horner(n, self.hi), 0),
            (horner(dn, self.lo), s_lo * (1 + self.lo)),
            (horner(dn, self.hi), s_hi * (1 + self.hi)),
        )
        if not all(close_enough(u, v) for u, v in checks):
            raise DomainError("numerator violates the boundary conditions", {"boundary_class": self.boundary_class})

    @property
    def exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in (self.lo, self.hi, *self.numerator))

    @property
    def polynomial(self) -> PolynomialQ:
        if not self.exact:
            raise DomainError("profile has non-rational data")
        return PolynomialQ(tuple(self.numerator))

    def derivatives(self, tau) -> Tuple[Number, Number, Number]:
        """(φ, φ', φ'') at τ."""
        coeffs, tau = align(self.numerator, tau)
        n = horner(coeffs, tau)
        d1 = horner(poly_derivative(coeffs), tau)
        d2 = horner(poly_derivative(poly_derivative(coeffs)), tau)
        q = 1 + tau
        return n / q, (d1 * q - n) / (q * q), (d2 * q * q - 2 * d1 * q + 2 * n) / (q ** 3)

    def __call__(self, tau) -> Number:
        return self.derivatives(tau)[0]

    def scalar_numerator(self) -> List[Number]:
        """P with S = P/(2(1 + τ)): P = −4 − N''."""
        second = poly_derivative(poly_derivative(self.numerator))
        return poly_add([-4 + 0 * self.lo], [-c for c in second])


def _unknown_basis() -> Tuple[List[List[Fraction]], List[Fraction]]:
    """N = A·u_A + B·u_B + C·τ + D + fixed, from integrating twice."""
    f = Fraction
    u_a = [f(0), f(0), f(0), f(-1, 3), f(-1, 6)]
    u_b = [f(0), f(0), f(-1), f(-1, 3)]
    u_c = [f(0), f(1)]
    u_d = [f(1)]
    fixed = [f(0), f(0), f(-2)]
    return [u_a, u_b, u_c, u_d], fixed


def solve_extremal(interval: Sequence, bc: BoundaryClass) -> MomentumProfile:
    """The extremal profile (S affine) with the boundary data of ``bc``."""
    a, b = (parse_rational(x) for x in interval)
    if not b > a >= 0:
        raise DomainError("need b > a ≥ 0", {"a": a, "b": b})
    if bc not in BOUNDARY_SLOPES:
        raise DomainError("unknown boundary class", {"boundary_class": bc})
    basis, fixed = _unknown_basis()
    s_a, s_b = BOUNDARY_SLOPES[bc]
    rows, rhs = [], []
    for point, slope in ((a, s_a), (b, s_b)):
        rows.append([horner(u, point) for u in basis])
        rhs.append(-horner(fixed, point))
        rows.append([horner(poly_derivative(u), point) for u in basis])
        rhs.append(slope * (1 + point) - horner(poly_derivative(fixed), point))
    matrix = sympy.Matrix([[to_sympy(x) for x in row] for row in rows])
    if matrix.det() == 0:
        raise InternalConsistencyError("boundary system is singular", {"a": a, "b": b})
    coeffs = [from_sympy(v) for v in matrix.LUsolve(sympy.Matrix([to_sympy(x) for x in rhs]))]
    numerator: List[Fraction] = list(fixed)
    for coeff, u in zip(coeffs, basis):
        numerator = poly_add(numerator, [coeff * c for c in u])
    logger.bind(component="profiles").debug("extremal_solved", a=str(a), b=str(b), bc=bc)
    return MomentumProfile(lo=a, hi=b, numerator=tuple(numerator), boundary_class=bc)


def _closed_numerator(m: Number, mode: str) -> List[Number]:
    q = m * m + 6 * m + 6
    tau = [0 * m, 1 + 0 * m]
    gap = [m, -1 + 0 * m]
    if mode == "smooth":
        bracket = [q, -m * m + 4 * m + 6, 2 * m + 2]
        head, scale = poly_mul(tau, gap), 2 / (m * q)
    elif mode == "no-sinf":
        bracket = [q, -m * m + 2 * m + 3]
        head, scale = poly_mul(tau, poly_mul(gap, gap)), 2 / (m * m * q)
    else:
        bracket = [-m ** 3 + 3 * m * m + 9 * m + 6, 2 * m * m + 4 * m + 3]
        head, scale = poly_mul(poly_mul(tau, tau), gap), 2 / (m * m * q)
    return [scale * c for c in poly_mul(head, bracket)]


def closed_form_profile(m, mode: str = "smooth", shift=None) -> MomentumProfile:
    """Explicit extremal profiles on [0, m]; ``no-szero-shifted`` lives on [shift, m]
    and is (a + 1)·φ((τ − a)/(a + 1)) for the base profile on [0, (m − a)/(a + 1)]."""
    m = _num(m)
    if mode not in CLOSED_FORM_MODES:
        raise DomainError("unknown profile mode", {"mode": mode, "known": ", ".join(CLOSED_FORM_MODES)})
    if m <= 0:
        raise DomainError("m must be positive", {"m": m})
    bc = _MODE_CLASSES[mode]
    if mode != "no-szero-shifted":
        return MomentumProfile(lo=0 * m, hi=m, numerator=tuple(_closed_numerator(m, mode)), boundary_class=bc)

    if shift is None:
        raise DomainError("the shifted profile needs its left endpoint")
    a = _num(shift)
    if isinstance(m, mpmath.mpf) or isinstance(a, mpmath.mpf):
        m, a = to_mpf(m), to_mpf(a)
    if not 0 <= a < m:
        raise DomainError("shift must lie in [0, m)", {"shift": a, "m": m})
    base_m = (m - a) / (a + 1)
    base = _closed_numerator(base_m, "no-szero")
    # N_ψ(τ) = (a + 1)² · N_φ((τ − a)/(a + 1))
    composed = poly_compose_affine(base, -a / (a + 1), 1 / (a + 1))
    numerator = tuple((a + 1) ** 2 * c for c in composed)
    return MomentumProfile(lo=a, hi=m, numerator=numerator, boundary_class=bc)


class PositivityCertificate(ExactModel):
    positive: bool
    interior_roots: int
    order_at_lo: int
    order_at_hi: int
    end_types: Tuple[str, str]
    bracket: str


def vanishing_type(order: int) -> str:
    if order == 1:
        return "smooth"
    if order == 2:
        return "asymptotically-hyperbolic"
    return "degenerate"


def _strip_root(p: PolynomialQ, root: Fraction) -> Tuple[PolynomialQ, int]:
    linear = PolynomialQ.of(-root, 1)
    order = 0
    while not p.is_zero and p(root) == 0:
        p, _ = p.divmod(linear)
        order += 1
    return p, order


def vanishing_orders(p: MomentumProfile) -> Tuple[int, int]:
    poly = p.polynomial
    _, lo = _strip_root(poly, p.lo)
    _, hi = _strip_root(poly, p.hi)
    return lo, hi


def positivity_certificate(p: MomentumProfile) -> PositivityCertificate:
    """Sturm-certified positivity of φ on the open interval.

    Since 1 + τ > 0 this is the sign of N; the endpoint zeros are stripped
    off and the remaining bracket reported.
    """
    poly = p.polynomial
    rest, order_lo = _strip_root(poly, p.lo)
    rest, order_hi = _strip_root(rest, p.hi)
    positive = sign_on_interval(poly, p.lo, p.hi) == 1
    roots = real_root_count(poly, (p.lo, p.hi))
    logger.bind(component="profiles").debug("positivity_checked", positive=positive, interior_roots=roots)
    return PositivityCertificate(
        positive=positive,
        interior_roots=roots,
        order_at_lo=order_lo,
        order_at_hi=order_hi,
        end_types=(vanishing_type(order_lo), vanishing_type(order_hi)),
        bracket=str(rest),
    )
