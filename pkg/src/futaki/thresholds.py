"""Certified thresholds in m where the ruled surface turns relatively unstable."""
from fractions import Fraction
from typing import List

import mpmath
import structlog

from ..core.errors import InternalConsistencyError, PreconditionError
from ..core.exact import ExactModel, Rational, parse_rational, working_precision
from ..geometry.polynomial import PolynomialQ, RootInterval, isolate_real_roots, real_root_count, refine_root
from .ruled import Mode, futaki_polynomial

logger = structlog.get_logger()

# discriminant of the whole-surface bracket in c
WHOLE_QUARTIC = PolynomialQ.of(-12, -48, -52, -16, 1)
# m·(second-order coefficient of the pair-S∞ invariant) up to a positive factor
PAIR_CUBIC = PolynomialQ.of(-6, -9, -3, 1)


class CertifiedThreshold(ExactModel):
    interval: RootInterval
    positive_roots: int
    value: float

    @property
    def lo(self) -> Fraction:
        return self.interval.lo

    @property
    def hi(self) -> Fraction:
        return self.interval.hi


class Thresholds(ExactModel):
    k1: CertifiedThreshold
    k2: CertifiedThreshold
    precision: Rational


def _positive_root(p: PolynomialQ, precision: Fraction, name: str) -> CertifiedThreshold:
    count = real_root_count(p, (0, None))
    roots = isolate_real_roots(p, (0, None), precision)
    if count != 1 or len(roots) != 1:
        raise InternalConsistencyError("expected a single positive root", {"threshold": name, "count": count})
    with working_precision():
        value = float(refine_root(p, roots[0], mpmath.mp.dps))
    return CertifiedThreshold(interval=roots[0], positive_roots=count, value=value)


def instability_thresholds(precision="1/1000") -> Thresholds:
    """k1: positive root of m⁴ − 16m³ − 52m² − 48m − 12; k2: of m³ − 3m² − 9m − 6.

    Isolating intervals have width at most ``precision``.
    """
    precision = parse_rational(precision)
    if precision <= 0:
        raise PreconditionError("precision must be positive", {"precision": precision})
    k1 = _positive_root(WHOLE_QUARTIC, precision, "k1")
    k2 = _positive_root(PAIR_CUBIC, precision, "k2")
    logger.bind(component="thresholds").info("thresholds_certified", k1=k1.value, k2=k2.value)
    return Thresholds(k1=k1, k2=k2, precision=precision)


class InstabilityWindow(ExactModel):
    """c between the two roots, with a rational witness where F_χ < 0."""

    left: RootInterval
    right: RootInterval
    sample: Rational
    value: Rational


def instability_window(m, mode: Mode = "whole", precision="1/1000") -> List[InstabilityWindow]:
    """Every component of {c ∈ (0, m) : F_χ(c) < 0}, bounded by certified roots."""
    m = parse_rational(m)
    precision = parse_rational(precision)
    poly = futaki_polynomial(m, mode).polynomial
    if poly.is_zero:
        return []
    inner = isolate_real_roots(poly, (0, m), precision)
    fences = [RootInterval(lo=Fraction(0), hi=Fraction(0))] + inner + [RootInterval(lo=m, hi=m)]
    windows = []
    for left, right in zip(fences, fences[1:]):
        sample = (left.hi + right.lo) / 2
        value = poly(sample)
        if value < 0:
            windows.append(InstabilityWindow(left=left, right=right, sample=sample, value=value))
    logger.bind(component="thresholds").debug("instability_window", m=str(m), mode=mode, windows=len(windows))
    return windows
