"""Scalar curvature of (glued) momentum profiles and its Calabi norm."""
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import mpmath
import structlog

from ..core.config import get_config
from ..core.errors import DomainError, ToleranceError
from ..core.exact import align, close_enough, to_mpf, working_precision
from ..geometry.polynomial import horner, poly_add, poly_integral, poly_mul
from .profiles import MomentumProfile, Number

logger = structlog.get_logger()


def _at_or_before(x, y) -> bool:
    if isinstance(x, (Fraction, int)) and isinstance(y, (Fraction, int)):
        return x <= y
    return to_mpf(x) <= to_mpf(y)


# ‖·‖²_{L²(X)} = (2π)² · ∫ (·)²(1 + τ) dτ
CONVENTION_NOTES = (
    "full_norm_squared = (2*pi)^2 * tau_integral (fibre circle 2*pi, base curve area 2*pi)",
    "algebraic norm of h = L2(X) norm of h divided by 2*pi",
)


@dataclass(frozen=True)
class ProfileSegment:
    lo: Number
    hi: Number
    profile: Optional[MomentumProfile] = None

    @property
    def is_zero(self) -> bool:
        return self.profile is None

    def derivatives(self, tau) -> Tuple[Number, Number, Number]:
        if self.profile is None:
            z = 0 * tau
            return z, z, z
        return self.profile.derivatives(tau)

    def scalar_numerator(self) -> List[Number]:
        if self.profile is None:
            # φ ≡ 0 gives S = −2/(1 + τ)
            return [-4 + 0 * self.lo]
        return self.profile.scalar_numerator()


@dataclass(frozen=True)
class GluedProfile:
    """Profiles and zero plateaux partitioning [0, m]."""

    segments: Tuple[ProfileSegment, ...]

    def __post_init__(self):
        if not self.segments:
            raise DomainError("a glued profile needs at least one segment")
        for left, right in zip(self.segments, self.segments[1:]):
            if not close_enough(left.hi, right.lo):
                raise DomainError("segments must be contiguous", {"left": left.hi, "right": right.lo})

    @classmethod
    def single(cls, profile: MomentumProfile) -> "GluedProfile":
        return cls((ProfileSegment(profile.lo, profile.hi, profile),))

    @property
    def lo(self) -> Number:
        return self.segments[0].lo

    @property
    def hi(self) -> Number:
        return self.segments[-1].hi

    @property
    def junctions(self) -> Tuple[Number, ...]:
        return tuple(s.hi for s in self.segments[:-1])

    def segment_at(self, tau) -> ProfileSegment:
        for s in self.segments:
            if _at_or_before(tau, s.hi):
                return s
        return self.segments[-1]

    def derivatives(self, tau) -> Tuple[Number, Number, Number]:
        return self.segment_at(tau).derivatives(tau)

    def junction_mismatch(self) -> float:
        """Largest jump of φ, φ′ or φ″ across a junction."""
        worst = mpmath.mpf(0)
        with working_precision():
            for left, right in zip(self.segments, self.segments[1:]):
                x = to_mpf(left.hi)
                for u, v in zip(left.derivatives(x), right.derivatives(x)):
                    worst = max(worst, abs(to_mpf(u) - to_mpf(v)))
        return float(worst)


def as_glued(g: Union[GluedProfile, MomentumProfile]) -> GluedProfile:
    return g if isinstance(g, GluedProfile) else GluedProfile.single(g)


@dataclass(frozen=True)
class ScalarPiece:
    lo: Number
    hi: Number
    numerator: Tuple[Number, ...]

    def __call__(self, tau) -> Number:
        coeffs, tau = align(self.numerator, tau)
        return horner(coeffs, tau) / (2 * (1 + tau))

    def affine(self) -> Optional[Tuple[Number, Number]]:
        """(slope, intercept) when P is divisible by 1 + τ with a linear quotient."""
        p = list(self.numerator)
        if len(p) > 3 or not close_enough(horner(p, -1), 0):
            return None
        p += [0] * (3 - len(p))
        # P = (1 + τ)(q0 + q1·τ)
        q1 = p[2]
        q0 = p[0]
        return q1 / 2, q0 / 2


@dataclass(frozen=True)
class ScalarCurve:
    pieces: Tuple[ScalarPiece, ...]
    average: Number

    def piece_at(self, tau) -> ScalarPiece:
        for piece in self.pieces:
            if _at_or_before(tau, piece.hi):
                return piece
        return self.pieces[-1]

    def __call__(self, tau) -> Number:
        return self.piece_at(tau)(tau)

    @property
    def affine_flags(self) -> Tuple[bool, ...]:
        return tuple(p.affine() is not None for p in self.pieces)

    @property
    def is_affine(self) -> bool:
        return all(self.affine_flags)

    def weighted_integral(self) -> Number:
        """∫(S − Ŝ)(1 + τ) dτ, zero by the choice of Ŝ."""
        return sum(
            (poly_integral(deviation_numerator(p, self.average), p.lo, p.hi) / 2 for p in self.pieces),
            0 * self.average,
        )


def deviation_numerator(piece: ScalarPiece, average: Number) -> List[Number]:
    """P − 2Ŝ(1 + τ), so that (S − Ŝ)(1 + τ) is half of it."""
    return poly_add(list(piece.numerator), [-2 * average, -2 * average])


def scalar_curvature(g: Union[GluedProfile, MomentumProfile]) -> ScalarCurve:
    """S = (−4 − N″)/(2(1 + τ)) segment by segment, −2/(1 + τ) on plateaux;
    Ŝ = ∫S(1 + τ)dτ / ∫(1 + τ)dτ."""
    glued = as_glued(g)
    pieces = tuple(ScalarPiece(s.lo, s.hi, tuple(s.scalar_numerator())) for s in glued.segments)
    total = sum((poly_integral(list(p.numerator), p.lo, p.hi) / 2 for p in pieces), 0 * glued.lo)
    volume = poly_integral([1, 1], glued.lo, glued.hi)
    return ScalarCurve(pieces=pieces, average=total / volume)


@dataclass(frozen=True)
class CalabiNorm:
    tau_integral: Number
    full_norm_squared: Number
    scale: Number
    notes: Tuple[str, ...] = CONVENTION_NOTES

    @property
    def full_norm(self) -> float:
        return float(mpmath.sqrt(to_mpf(self.full_norm_squared)))


def _quad(f, lo, hi) -> mpmath.mpf:
    tol = get_config().momentum.quadrature_tolerance
    value, error = mpmath.quad(f, [to_mpf(lo), to_mpf(hi)], method="gauss-legendre", error=True)
    if error > tol:
        raise ToleranceError("quadrature did not reach the tolerance", {"error": float(error), "tolerance": tol})
    return value


def _squared_deviation_integral(piece: ScalarPiece, average: Number) -> Number:
    """∫(S − Ŝ)²(1 + τ) dτ = ∫ D²/(4(1 + τ)) dτ with D = P − 2Ŝ(1 + τ)."""
    dev = deviation_numerator(piece, average)
    square = poly_mul(dev, dev)
    # D² = (1 + τ)·Q + r
    quotient, remainder = _divide_by_shifted(square)
    poly_part = poly_integral(quotient, piece.lo, piece.hi) / 4
    if close_enough(remainder, 0):
        return poly_part
    log_part = _quad(lambda t: 1 / (1 + t), piece.lo, piece.hi)
    return to_mpf(poly_part) + to_mpf(remainder) * log_part / 4


def _divide_by_shifted(p: Sequence[Number]) -> Tuple[List[Number], Number]:
    """Synthetic division by τ + 1."""
    p = list(p)
    if not p:
        return [], 0
    out = [p[-1]]
    for c in reversed(p[:-1]):
        out.append(c - out[-1])
    remainder = out.pop()
    return list(reversed(out)), remainder


def calabi_norm(g: Union[GluedProfile, MomentumProfile]) -> CalabiNorm:
    """∫(S − Ŝ)²(1 + τ) dτ and (2π)² times it.

    Exact when the data is rational and every piece is affine; plateau pieces
    contribute a logarithm evaluated by quadrature.
    """
    curve = scalar_curvature(g)
    with working_precision():
        tau_integral = sum(
            (_squared_deviation_integral(p, curve.average) for p in curve.pieces),
            0 * curve.average,
        )
        scale = (2 * mpmath.pi) ** 2
        full = scale * to_mpf(tau_integral)
    logger.bind(component="calabi").debug("calabi_norm", tau_integral=float(tau_integral))
    return CalabiNorm(tau_integral=tau_integral, full_norm_squared=full, scale=scale)


def sample_profile(g: Union[GluedProfile, MomentumProfile], n_samples: int) -> List[Tuple[float, float, float]]:
    """(τ, φ, S) at n uniformly spaced points, plus every junction, in increasing τ."""
    if n_samples < 2:
        raise DomainError("at least two samples are needed", {"n_samples": n_samples})
    glued = as_glued(g)
    curve = scalar_curvature(glued)
    with working_precision():
        lo, hi = to_mpf(glued.lo), to_mpf(glued.hi)
        points = [lo + (hi - lo) * i / (n_samples - 1) for i in range(n_samples)]
        points += [to_mpf(j) for j in glued.junctions]
        points = sorted(set(points))
        return [(float(t), float(glued.derivatives(t)[0]), float(curve(t))) for t in points]
