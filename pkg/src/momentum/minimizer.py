"""The glued Calabi-minimising profile for unstable polarisations and the
destabilising function h = Ŝ − S realising the infimum of the Calabi functional."""
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

import mpmath
import sympy
import structlog

from ..core.config import get_config
from ..core.errors import DomainError, PreconditionError, StablePolarizationError
from ..core.exact import close_enough, mpf_to_fraction, parse_rational, to_mpf, to_sympy, working_precision
from ..futaki.surface import calabi_lower_bound
from ..futaki.thresholds import PAIR_CUBIC, WHOLE_QUARTIC
from ..geometry.polynomial import PolynomialQ, isolate_real_roots, poly_integral, poly_mul, refine_root
from ..toric.bundle import IntervalFunction, toric_bundle_futaki
from .curvature import (
    CalabiNorm,
    GluedProfile,
    ProfileSegment,
    as_glued,
    calabi_norm,
    deviation_numerator,
    scalar_curvature,
)
from .profiles import MomentumProfile, closed_form_profile

logger = structlog.get_logger()

# densities of the ruled surface seen as a toric bundle over the interval
RULED_Q1 = PolynomialQ.of(1, 1)
RULED_Q2 = PolynomialQ.of(-1)


def pair_threshold() -> mpmath.mpf:
    """k2 at the working precision."""
    root = isolate_real_roots(PAIR_CUBIC, (0, None))[0]
    return refine_root(PAIR_CUBIC, root, mpmath.mp.dps)


@dataclass(frozen=True)
class CalabiMinimizer:
    m: Fraction
    case: int
    junction: mpmath.mpf
    glued: GluedProfile
    plateau: Optional[Tuple[mpmath.mpf, mpmath.mpf]] = None


def glue_calabi_minimizer(m) -> CalabiMinimizer:
    """C² profile on [0, m] built from the complete extremal profiles.

    For m ≤ k2(k2 + 2) the pieces meet at c = √(m + 1) − 1; beyond that a zero
    plateau [k2, c] with c = (m + 1)/(k2 + 1) − 1 separates them.
    """
    m = parse_rational(m)
    if m <= 0 or WHOLE_QUARTIC(m) <= 0:
        raise StablePolarizationError("polarisation admits an extremal metric; nothing to glue", {"m": m})
    log = logger.bind(component="gluing", m=str(m))
    with working_precision():
        k2 = pair_threshold()
        mm = to_mpf(m)
        if mm + 1 <= (k2 + 1) ** 2:
            c = mpmath.sqrt(mm + 1) - 1
            left = closed_form_profile(c, "no-sinf")
            right = closed_form_profile(mm, "no-szero-shifted", shift=c)
            segments = (ProfileSegment(left.lo, c, left), ProfileSegment(c, mm, right))
            result = CalabiMinimizer(m=m, case=1, junction=c, glued=GluedProfile(segments))
        else:
            c = (mm + 1) / (k2 + 1) - 1
            left = closed_form_profile(k2, "no-sinf")
            right = closed_form_profile(mm, "no-szero-shifted", shift=c)
            segments = (
                ProfileSegment(left.lo, k2, left),
                ProfileSegment(k2, c, None),
                ProfileSegment(c, mm, right),
            )
            result = CalabiMinimizer(m=m, case=2, junction=c, glued=GluedProfile(segments), plateau=(k2, c))
    log.info("minimizer_glued", case=result.case, junction=float(c), mismatch=result.glued.junction_mismatch())
    return result


@dataclass(frozen=True)
class JunctionIdentity:
    m: Fraction
    junction: sympy.Expr
    holds: bool

    @property
    def value(self) -> float:
        return float(self.junction)


def junction_identity(m) -> JunctionIdentity:
    """(m − c)/(c + 1) = c for c = √(m + 1) − 1, decided symbolically."""
    m = parse_rational(m)
    if m <= 0:
        raise DomainError("m must be positive", {"m": m})
    ms = to_sympy(m)
    c = sympy.sqrt(ms + 1) - 1
    holds = sympy.simplify((ms - c) / (c + 1) - c) == 0
    return JunctionIdentity(m=m, junction=c, holds=bool(holds))


@dataclass(frozen=True)
class FutakiIdentity:
    lhs: Fraction
    rhs: mpmath.mpf
    residual: float


def _breakpoints(glued: GluedProfile, h: IntervalFunction) -> List[mpmath.mpf]:
    points = {to_mpf(glued.lo), to_mpf(glued.hi)}
    points.update(to_mpf(j) for j in glued.junctions)
    points.update(to_mpf(k) for k in h.knots)
    return sorted(points)


def _check_linear_where_positive(glued: GluedProfile, h: IntervalFunction) -> None:
    for knot in h.knots[1:-1]:
        x = to_mpf(knot)
        segment = glued.segment_at(x)
        if segment.is_zero:
            continue
        if close_enough(x, segment.lo) or close_enough(x, segment.hi):
            continue
        raise PreconditionError("h bends where the profile is positive", {"knot": knot})


def verify_futaki_identity(g: Union[GluedProfile, MomentumProfile], h: IntervalFunction) -> FutakiIdentity:
    """F(h) from the toric-bundle formula against (1/2)∫ h (S − Ŝ)(1 + τ) dτ."""
    glued = as_glued(g)
    if not (close_enough(to_mpf(h.lo), to_mpf(glued.lo)) and close_enough(to_mpf(h.hi), to_mpf(glued.hi))):
        raise DomainError("h must live on the profile's interval", {"h": (h.lo, h.hi)})
    _check_linear_where_positive(glued, h)
    lhs = toric_bundle_futaki((h.lo, h.hi), RULED_Q1, RULED_Q2, h).futaki

    curve = scalar_curvature(glued)
    pieces = h.pieces()
    with working_precision():
        rhs = mpmath.mpf(0)
        points = _breakpoints(glued, h)
        for u, v in zip(points, points[1:]):
            mid = (u + v) / 2
            piece = curve.piece_at(mid)
            lo_h, hi_h, coeffs = next(p for p in pieces if to_mpf(p[0]) <= mid <= to_mpf(p[1]))
            h_poly = [to_mpf(c) for c in coeffs]
            dev = [to_mpf(c) for c in deviation_numerator(piece, curve.average)]
            # (S − Ŝ)(1 + τ) = D/2, times the 1/2 in front of the integral
            rhs += poly_integral(poly_mul(h_poly, dev), u, v) / 4
        residual = float(abs(to_mpf(lhs) - rhs))
    logger.bind(component="futaki_identity").debug("identity_checked", residual=residual)
    return FutakiIdentity(lhs=lhs, rhs=rhs, residual=residual)


def destabilising_function(g: Union[GluedProfile, MomentumProfile], refine: Optional[int] = None) -> IntervalFunction:
    """Rational piecewise-linear h ≈ Ŝ − S, bending only at junctions and on plateaux.

    Plateaux get ``refine`` equal subdivisions since S = −2/(1 + τ) there.
    """
    refine = refine if refine is not None else get_config().momentum.refine
    if refine < 1:
        raise DomainError("refine must be at least 1", {"refine": refine})
    glued = as_glued(g)
    curve = scalar_curvature(glued)
    with working_precision():
        knots = [to_mpf(glued.lo)]
        for segment in glued.segments:
            lo, hi = to_mpf(segment.lo), to_mpf(segment.hi)
            if segment.is_zero:
                knots += [lo + (hi - lo) * i / refine for i in range(1, refine)]
            knots.append(hi)
        average = to_mpf(curve.average)
        values = [average - to_mpf(curve(x)) for x in knots]
    return IntervalFunction(tuple(mpf_to_fraction(k) for k in knots), tuple(mpf_to_fraction(v) for v in values))


@dataclass(frozen=True)
class InfimumReport:
    m: Fraction
    case: int
    junction: float
    calabi: CalabiNorm
    calabi_value: float
    futaki: Fraction
    h_norm_squared: Fraction
    futaki_bound: float
    lower_bound_squared: float
    relative_gap: float
    identity_residual: float
    junction_mismatch: float
    h_convex: bool


def infimum_report(m, refine: Optional[int] = None) -> InfimumReport:
    """‖S − Ŝ‖ of the glued minimiser against 4π(−F(h))/‖h‖.

    ‖h‖ is the L²(X) norm divided by 2π, i.e. (∫(h − h̄)²(1 + τ)dτ)^{1/2}.
    """
    minimizer = glue_calabi_minimizer(m)
    glued = minimizer.glued
    norm = calabi_norm(glued)
    h = destabilising_function(glued, refine)
    bundle = toric_bundle_futaki((h.lo, h.hi), RULED_Q1, RULED_Q2, h)
    identity = verify_futaki_identity(glued, h)
    with working_precision():
        h_norm = mpmath.sqrt(to_mpf(bundle.norm_squared))
        bound = 4 * mpmath.pi * (-to_mpf(bundle.futaki)) / h_norm
        value = mpmath.sqrt(to_mpf(norm.full_norm_squared))
        gap = abs(value - bound) / value
        lower_sq = calabi_lower_bound(bundle.futaki, h_norm)
    logger.bind(component="infimum").info("infimum_compared", m=str(minimizer.m), gap=float(gap))
    return InfimumReport(
        m=minimizer.m,
        case=minimizer.case,
        junction=float(minimizer.junction),
        calabi=norm,
        calabi_value=float(value),
        futaki=bundle.futaki,
        h_norm_squared=bundle.norm_squared,
        futaki_bound=float(bound),
        lower_bound_squared=float(lower_sq),
        relative_gap=float(gap),
        identity_residual=identity.residual,
        junction_mismatch=glued.junction_mismatch(),
        h_convex=h.is_convex,
    )
