"""Exact-number plumbing shared by every module.

All exact quantities are ``fractions.Fraction``; high-precision reals are
``mpmath.mpf`` evaluated under :func:`working_precision`.
"""
from contextlib import contextmanager
from fractions import Fraction
from typing import Annotated, Any, Dict, Iterator, Optional, Sequence, Union

import mpmath
import sympy
from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer

from .config import precision_digits
from .errors import DomainError

Number = Union[Fraction, int]
RealLike = Union[Fraction, int, float, mpmath.mpf]


def fraction_str(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _coerce_rational(value: Any) -> Any:
    if isinstance(value, (int, str)) and not isinstance(value, bool):
        return parse_rational(value)
    return value


Rational = Annotated[
    Fraction,
    BeforeValidator(_coerce_rational),
    PlainSerializer(fraction_str, return_type=str, when_used="json"),
]


class ExactModel(BaseModel):
    """Immutable record type allowing Fraction / mpf fields."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


def parse_rational(text: Union[str, int, Fraction]) -> Fraction:
    """Parse ``"7/2"``, ``"3"``, ``"-0.25"`` into an exact Fraction."""
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError) as e:
        raise DomainError(f"not a rational number: {text!r}") from e


def to_sympy(q: RealLike) -> sympy.Expr:
    if isinstance(q, Fraction):
        return sympy.Rational(q.numerator, q.denominator)
    if isinstance(q, int):
        return sympy.Integer(q)
    return sympy.Float(mpmath.nstr(q, precision_digits() + 5), precision_digits())


def from_sympy(value: Any) -> Fraction:
    value = sympy.sympify(value)
    if not isinstance(value, sympy.Rational):
        raise DomainError(f"value is not rational: {value}")
    return Fraction(int(value.p), int(value.q))


def to_mpf(q: RealLike) -> mpmath.mpf:
    """Convert without passing through binary floats for Fractions."""
    if isinstance(q, Fraction):
        return mpmath.mpf(q.numerator) / q.denominator
    return mpmath.mpf(q)


@contextmanager
def working_precision(digits: Optional[int] = None) -> Iterator[None]:
    with mpmath.workdps(digits or precision_digits()):
        yield


def exact_value(q: Optional[RealLike]) -> Optional[Dict[str, Any]]:
    """Report form: exact source (when rational) plus a float preview."""
    if q is None:
        return None
    if isinstance(q, (Fraction, int)):
        return {"exact": fraction_str(Fraction(q)), "float": float(q)}
    return {"exact": None, "float": float(q), "digits": mpmath.nstr(q, 30)}


def exact_vector(values: Sequence[RealLike]) -> list:
    return [exact_value(v) for v in values]


def mpf_to_fraction(x: RealLike) -> Fraction:
    """The exact binary rational an mpf (or float) stores."""
    if isinstance(x, (Fraction, int)):
        return Fraction(x)
    man, exp = mpmath.mpf(x).man_exp
    return Fraction(man * 2 ** exp) if exp >= 0 else Fraction(man, 2 ** -exp)


def close_enough(x: RealLike, y: RealLike) -> bool:
    """Exact equality for rationals, agreement to half the working digits otherwise."""
    if isinstance(x, (Fraction, int)) and isinstance(y, (Fraction, int)):
        return x == y
    return abs(to_mpf(x) - to_mpf(y)) <= mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))


def align(coefficients: Sequence[RealLike], x: RealLike):
    """Bring polynomial coefficients and a point into one number type.

    Mixing Fraction with mpf silently falls back to float, so anything
    non-rational moves everything to mpf.
    """
    if isinstance(x, (Fraction, int)) and all(isinstance(c, (Fraction, int)) for c in coefficients):
        return list(coefficients), x
    return [to_mpf(c) for c in coefficients], to_mpf(x)
