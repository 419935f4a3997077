"""Futaki invariant of the deformation to the normal cone of a curve on a
surface, from intersection numbers, and the Calabi lower bounds."""
from fractions import Fraction
from typing import Any, Dict, Optional

import mpmath
import structlog
from pydantic import model_validator

from ..core.errors import DomainError, PreconditionError
from ..core.exact import ExactModel, Rational, parse_rational, to_mpf, working_precision
from ..geometry.polynomial import PolynomialQ

logger = structlog.get_logger()


class SurfaceDivisorData(ExactModel):
    """Intersection numbers of a polarisation L, the canonical class K and a curve Z."""

    z_z: Rational
    l_z: Rational
    l_l: Rational
    k_l: Rational
    k_z: Rational
    adjunction: Rational
    seshadri_bound: Optional[Rational] = None

    @model_validator(mode="before")
    @classmethod
    def _fill_adjunction(cls, data: Any) -> Any:
        if not isinstance(data, dict):
            return data
        data = {k: (parse_rational(v) if v is not None else None) for k, v in data.items()}
        z_z, k_z, adj = data.get("z_z"), data.get("k_z"), data.get("adjunction")
        if z_z is not None:
            if adj is None and k_z is not None:
                data["adjunction"] = k_z + z_z
            elif k_z is None and adj is not None:
                data["k_z"] = adj - z_z
            elif k_z is not None and adj is not None and adj != k_z + z_z:
                raise DomainError("(K + Z)·Z must equal K·Z + Z·Z", {"k_z": k_z, "z_z": z_z, "adjunction": adj})
        return data

    @model_validator(mode="after")
    def _ample(self):
        if self.l_l <= 0:
            raise DomainError("L·L must be positive", {"l_l": self.l_l})
        return self

    @property
    def slope(self) -> Fraction:
        """μ(X) = −n·K·L^{n−1} / (2·L^n) with n = 2."""
        return -self.k_l / self.l_l

    def alpha1(self) -> PolynomialQ:
        """α1(x) = Z·(L − xZ)."""
        return PolynomialQ.of(self.l_z, -self.z_z)

    def alpha2(self) -> PolynomialQ:
        """α2(x) = −Z·(K + Z)/2."""
        return PolynomialQ.of(-self.adjunction / 2)


def ruled_surface_data(m, divisor: str = "sinf") -> SurfaceDivisorData:
    """Intersection data of P(O ⊕ L) over a genus-2 curve with L = C + m·S0.

    C is a fibre; S0² = 1, S∞² = −1 and K·L = m − 2.
    """
    m = parse_rational(m)
    if m <= 0:
        raise DomainError("m must be positive", {"m": m})
    l_l = m * m + 2 * m
    if divisor == "sinf":
        return SurfaceDivisorData(z_z=Fraction(-1), l_z=Fraction(1), l_l=l_l, k_l=m - 2, adjunction=Fraction(2))
    if divisor == "s0":
        return SurfaceDivisorData(z_z=Fraction(1), l_z=1 + m, l_l=l_l, k_l=m - 2, adjunction=Fraction(2))
    raise DomainError("unknown section", {"divisor": divisor})


def surface_data_from_json(data: Dict[str, Any]) -> SurfaceDivisorData:
    keys = {"Z.Z": "z_z", "L.Z": "l_z", "L.L": "l_l", "K.L": "k_l", "K.Z": "k_z", "(K+Z).Z": "adjunction"}
    fields = {keys.get(k, k): v for k, v in data.items()}
    return SurfaceDivisorData(**fields)


def _weighted_integral(p: PolynomialQ, c: Fraction) -> Fraction:
    """∫_0^c (c − x)·p(x) dx."""
    return (PolynomialQ.of(c, -1) * p).integrate(0, c)


def normal_cone_futaki(d: SurfaceDivisorData, c) -> Fraction:
    """F = ∫_0^c (c−x)α2 dx + (c/2)α1(0) − μ(X)·∫_0^c (c−x)α1 dx."""
    c = parse_rational(c)
    if c <= 0:
        raise DomainError("c must be positive", {"c": c})
    if d.seshadri_bound is not None and c >= d.seshadri_bound:
        raise DomainError("c must stay below the Seshadri bound", {"c": c, "bound": d.seshadri_bound})
    a1 = d.alpha1()
    value = _weighted_integral(d.alpha2(), c) + c / 2 * a1(Fraction(0)) - d.slope * _weighted_integral(a1, c)
    logger.bind(component="normal_cone").debug("normal_cone_futaki", c=str(c), value=str(value))
    return value


def calabi_lower_bound(F, norm_alpha, norm_chi=0, relative: bool = False, n: int = 2) -> mpmath.mpf:
    """Lower bound for the Calabi functional from a destabilising direction.

    Absolute: 4(2π)^n F²/‖α‖². Relative: 2(2π)^n F_χ²/‖α‖² + ‖χ‖²; there
    F_χ = 0 is allowed and the bound is the extremal value ‖χ‖².
    """
    F = parse_rational(F) if not isinstance(F, (float, mpmath.mpf)) else F
    if norm_alpha <= 0:
        raise PreconditionError("‖α‖ must be positive", {"norm_alpha": norm_alpha})
    if F > 0 or (F == 0 and not relative):
        raise PreconditionError("the bound needs a destabilising direction", {"F": F})
    with working_precision():
        two_pi_n = (2 * mpmath.pi) ** n
        ratio = to_mpf(F) ** 2 / to_mpf(norm_alpha) ** 2
        if relative:
            return 2 * two_pi_n * ratio + to_mpf(norm_chi) ** 2
        return 4 * two_pi_n * ratio
