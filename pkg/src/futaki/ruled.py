"""Weight sums on the ruled surface P(O ⊕ L) over a genus-2 curve.

H^0(kL) splits by vanishing order l = 0..mk along S∞ into blocks of dimension
k + l − 1. The fibre rotation β acts with weight l on block l. The
deformation to the normal cone of S∞ with parameter c gives the blocks with
l < ck the weight −(ck − l); the mirrored deformation of S0 gives the blocks
with l > (m − c)k the weight (m − c)k − l. A pair (X, D) discounts half of
the block restricting to D.
"""
from fractions import Fraction
from math import lcm
from typing import Iterator, List, Literal, Optional, Sequence, Tuple

import structlog
from pydantic import model_validator

from ..core.errors import DomainError
from ..core.exact import ExactModel, Rational, parse_rational
from ..geometry.integration import fit_exact_polynomial
from ..geometry.polynomial import PolynomialQ
from .asymptotics import CrossTraces, FutakiProducts, WeightAsymptotics, futaki_and_products

logger = structlog.get_logger()

Divisor = Literal["sinf", "s0"]
Mode = Literal["whole", "pair-sinf", "pair-s0"]
MODES: Tuple[str, ...] = ("whole", "pair-sinf", "pair-s0")


def divisor_alphas(m: Fraction, divisor: Divisor) -> Tuple[Fraction, Fraction]:
    """(α1, α2): L·D and −D·(K + D)/2 for the section D."""
    return (Fraction(1) if divisor == "sinf" else 1 + m), Fraction(-1)


def _check_range(m: Fraction, c: Fraction) -> None:
    if m <= 0:
        raise DomainError("m must be positive", {"m": m})
    if not 0 < c < m:
        raise DomainError("c must lie in (0, m)", {"m": m, "c": c})


def _check_pair(divisor: Divisor, pair: Optional[Divisor]) -> None:
    if pair is not None and pair != divisor:
        raise DomainError("a pair discounts the divisor being deformed", {"divisor": divisor, "pair": pair})


def _blocks(m: Fraction, c: Fraction, k: int, divisor: Divisor) -> Iterator[Tuple[int, int, int]]:
    """(dimension, α weight, β weight) for every block of H^0(kL)."""
    top, depth = m * k, c * k
    if top.denominator != 1 or depth.denominator != 1:
        raise DomainError("mk and ck must be integers", {"m": m, "c": c, "k": k})
    top, depth = int(top), int(depth)
    for l in range(top + 1):
        if divisor == "sinf":
            alpha = -(depth - l) if l < depth else 0
        else:
            alpha = (top - depth) - l if l > top - depth else 0
        yield k + l - 1, alpha, l


def _boundary_block(m: Fraction, c: Fraction, k: int, divisor: Divisor) -> Tuple[int, int, int]:
    """Block restricting to the divisor: l = 0 for S∞, l = mk for S0."""
    blocks = list(_blocks(m, c, k, divisor))
    return blocks[0] if divisor == "sinf" else blocks[-1]


class RuledWeightTables(ExactModel):
    m: Rational
    c: Rational
    divisor: Divisor
    pair: Optional[Divisor] = None
    k_values: Tuple[int, ...]
    dimensions: Tuple[Rational, ...]
    trace_a: Tuple[Rational, ...]
    trace_b: Tuple[Rational, ...]
    trace_ab: Tuple[Rational, ...]
    trace_aa: Tuple[Rational, ...]
    trace_bb: Tuple[Rational, ...]

    @model_validator(mode="after")
    def _c_in_range(self):
        _check_range(self.m, self.c)
        return self

    def fitted(self) -> Tuple[WeightAsymptotics, WeightAsymptotics]:
        """Exact Lagrange fits of every column, as (α, β) asymptotics."""
        ks = list(self.k_values)
        d = fit_exact_polynomial(ks, self.dimensions, 2)
        wa = fit_exact_polynomial(ks, self.trace_a, 3)
        wb = fit_exact_polynomial(ks, self.trace_b, 3)
        cross = CrossTraces(
            ab=fit_exact_polynomial(ks, self.trace_ab, 4)[4],
            aa=fit_exact_polynomial(ks, self.trace_aa, 4)[4],
            bb=fit_exact_polynomial(ks, self.trace_bb, 4)[4],
        )
        alpha = WeightAsymptotics(c0=d[2], c1=d[1], a0=wa[3], a1=wa[2], cross=cross)
        beta = WeightAsymptotics(c0=d[2], c1=d[1], a0=wb[3], a1=wb[2], cross=cross.swapped())
        return alpha, beta


def ruled_bruteforce_tables(
    m,
    c,
    k_list: Sequence[int],
    divisor: Divisor = "sinf",
    pair: Optional[Divisor] = None,
) -> RuledWeightTables:
    """Exact d_k and trace sums block by block, for every k in ``k_list``."""
    m, c = parse_rational(m), parse_rational(c)
    _check_range(m, c)
    _check_pair(divisor, pair)
    rows: List[Tuple[Fraction, ...]] = []
    for k in k_list:
        totals = [Fraction(0)] * 6
        for dim, a, b in _blocks(m, c, int(k), divisor):
            for i, v in enumerate((dim, a * dim, b * dim, a * b * dim, a * a * dim, b * b * dim)):
                totals[i] += v
        if pair is not None:
            dim, a, b = _boundary_block(m, c, int(k), divisor)
            half = Fraction(dim, 2)
            for i, v in enumerate((1, a, b, a * b, a * a, b * b)):
                totals[i] -= v * half
        rows.append(tuple(totals))
    columns = list(zip(*rows)) if rows else [()] * 6
    logger.bind(component="ruled").debug("tables_built", m=str(m), c=str(c), k_values=list(k_list))
    return RuledWeightTables(
        m=m,
        c=c,
        divisor=divisor,
        pair=pair,
        k_values=tuple(int(k) for k in k_list),
        dimensions=columns[0],
        trace_a=columns[1],
        trace_b=columns[2],
        trace_ab=columns[3],
        trace_aa=columns[4],
        trace_bb=columns[5],
    )


def admissible_k(m, c, count: int, start: int = 2) -> List[int]:
    """The first ``count`` integers k ≥ start with mk and ck integral."""
    m, c = parse_rational(m), parse_rational(c)
    step = lcm(m.denominator, c.denominator)
    first = -(-start // step) * step
    return [first + i * step for i in range(count)]


def _closed_forms(m: Fraction, c: Fraction, divisor: Divisor, pair: Optional[Divisor]):
    c0 = (m * m + 2 * m) / 2
    c1 = (2 - m) / 2
    b0 = (2 * m ** 3 + 3 * m * m) / 6
    b1 = m / 2
    bb = (3 * m ** 4 + 4 * m ** 3) / 12
    if divisor == "sinf":
        a0 = -(c ** 3 + 3 * c * c) / 6
        a1 = (c * c - c) / 2
        aa = c ** 3 / 3 + c ** 4 / 12
        ab = -(c ** 4 + 2 * c ** 3) / 12
    else:
        e = m - c
        a0 = -(1 + e) * c * c / 2 - c ** 3 / 3
        a1 = -(1 + e) * c / 2
        aa = (1 + e) * c ** 3 / 3 + c ** 4 / 4
        ab = -(c ** 4 / 4 + (1 + 2 * e) * c ** 3 / 3 + e * (1 + e) * c * c / 2)
    if pair == "sinf":
        # block l = 0: dimension k − 1, α weight −ck, β weight 0
        c1 -= Fraction(1, 2)
        a1 += c / 2
    elif pair == "s0":
        # block l = mk: dimension (1 + m)k − 1, α weight −ck, β weight mk
        c1 -= (1 + m) / 2
        a1 += c * (1 + m) / 2
        b1 -= m * (1 + m) / 2
    return c0, c1, a0, a1, b0, b1, ab, aa, bb


def ruled_asymptotics(
    m,
    c,
    divisor: Divisor = "sinf",
    pair: Optional[Divisor] = None,
) -> Tuple[WeightAsymptotics, WeightAsymptotics]:
    """Closed-form (α, β) asymptotics matching :func:`ruled_bruteforce_tables`."""
    m, c = parse_rational(m), parse_rational(c)
    _check_range(m, c)
    _check_pair(divisor, pair)
    c0, c1, a0, a1, b0, b1, ab, aa, bb = _closed_forms(m, c, divisor, pair)
    cross = CrossTraces(ab=ab, aa=aa, bb=bb)
    alpha = WeightAsymptotics(c0=c0, c1=c1, a0=a0, a1=a1, cross=cross)
    beta = WeightAsymptotics(c0=c0, c1=c1, a0=b0, a1=b1, cross=cross.swapped())
    return alpha, beta


def mode_setup(mode: Mode) -> Tuple[Divisor, Optional[Divisor]]:
    if mode == "whole":
        return "sinf", None
    if mode == "pair-sinf":
        return "sinf", "sinf"
    if mode == "pair-s0":
        return "s0", "s0"
    raise DomainError("unknown mode", {"mode": mode, "known": ", ".join(MODES)})


def _displayed(m: Fraction, c: Fraction, mode: Mode) -> Fraction:
    """Closed-form F_χ; the whole-surface normalisation is c0 times the asymptotic one."""
    q = m * m + 6 * m + 6
    if mode == "whole":
        bracket = (2 * m + 2) * c * c - (m * m - 4 * m - 6) * c + q
        return c * (m - c) * (m + 2) / (4 * q) * bracket
    if mode == "pair-sinf":
        bracket = c * (2 * m * m + 4 * m + 3) - m ** 3 + 3 * m * m + 9 * m + 6
        return c * c * (m - c) / (2 * m * m * q) * bracket
    divisor, pair = mode_setup(mode)
    c0, c1, a0, a1, b0, b1, ab, aa, bb = _closed_forms(m, c, divisor, pair)
    inner = ab - a0 * b0 / c0
    beta_norm = bb - b0 * b0 / c0
    return (c1 * a0 / c0 - a1) - inner / beta_norm * (c1 * b0 / c0 - b1)


def ruled_relative_futaki(m, c, mode: Mode = "whole") -> Fraction:
    """Closed-form relative Futaki invariant of the deformation with parameter c."""
    m, c = parse_rational(m), parse_rational(c)
    mode_setup(mode)
    _check_range(m, c)
    return _displayed(m, c, mode)


class RuledFutakiReport(ExactModel):
    m: Rational
    c: Rational
    mode: Mode
    futaki: Rational
    relative_futaki: Rational
    asymptotic_relative_futaki: Rational
    normalisation: Rational
    inner: Rational
    alpha_norm_squared: Rational
    beta_norm_squared: Rational
    nondegenerate: Optional[bool] = None
    second_order_positive: Optional[bool] = None


def ruled_futaki_report(m, c, mode: Mode = "whole") -> RuledFutakiReport:
    """Closed form next to the asymptotics path, with the pair flags."""
    m, c = parse_rational(m), parse_rational(c)
    divisor, pair = mode_setup(mode)
    _check_range(m, c)
    alpha, beta = ruled_asymptotics(m, c, divisor, pair)
    products: FutakiProducts = futaki_and_products(alpha, beta)
    displayed = _displayed(m, c, mode)
    normalisation = alpha.c0 if mode == "whole" else Fraction(1)

    nondegenerate = second_order = None
    if pair is not None:
        alpha1, alpha2 = divisor_alphas(m, pair)
        nondegenerate = alpha.c1 / alpha.c0 < alpha2 / alpha1
        second_order = futaki_polynomial(m, mode).second_order_coefficient > 0

    logger.bind(component="ruled").info("ruled_futaki", m=str(m), c=str(c), mode=mode, relative=str(displayed))
    return RuledFutakiReport(
        m=m,
        c=c,
        mode=mode,
        futaki=products.futaki,
        relative_futaki=displayed,
        asymptotic_relative_futaki=products.relative_futaki,
        normalisation=normalisation,
        inner=products.inner,
        alpha_norm_squared=products.alpha_norm_squared,
        beta_norm_squared=products.beta_norm_squared,
        nondegenerate=nondegenerate,
        second_order_positive=second_order,
    )


class FutakiPolynomial(ExactModel):
    m: Rational
    mode: Mode
    polynomial: PolynomialQ
    vanishing_order: int

    @property
    def second_order_coefficient(self) -> Fraction:
        coeffs = self.polynomial.coefficients
        return coeffs[2] if len(coeffs) > 2 else Fraction(0)

    @property
    def degenerate_at_zero(self) -> bool:
        """Vanishing to order above two at c = 0 is itself destabilising."""
        return self.vanishing_order > 2


def futaki_polynomial(m, mode: Mode = "whole") -> FutakiPolynomial:
    """F_χ as an exact polynomial in c (degree at most four)."""
    m = parse_rational(m)
    mode_setup(mode)
    if m <= 0:
        raise DomainError("m must be positive", {"m": m})
    nodes = list(range(1, 7))
    coeffs = fit_exact_polynomial(nodes, [_displayed(m, Fraction(k), mode) for k in nodes], 4)
    poly = PolynomialQ(tuple(coeffs))
    order = next((i for i, a in enumerate(poly.coefficients) if a != 0), -1)
    return FutakiPolynomial(m=m, mode=mode, polynomial=poly, vanishing_order=order)
