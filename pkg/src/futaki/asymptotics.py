"""Algebraic Futaki invariants from the asymptotics of section spaces.

For a C*-action α on the central fibre with generator A_k on the weight-k
sections,

    d_k = c0·k^n + c1·k^(n-1) + ...,   Tr(A_k) = a0·k^(n+1) + a1·k^n + ...

and F(α) = c1·a0/c0 − a1. Inner products come from the k^(n+2) coefficients
of the trace products.
"""
from fractions import Fraction
from typing import Optional

import structlog
from pydantic import model_validator

from ..core.errors import DegenerateTorusError, DomainError
from ..core.exact import ExactModel, Rational

logger = structlog.get_logger()


class CrossTraces(ExactModel):
    """Leading k^(n+2) coefficients of Tr(A_k B_k), Tr(A_k²) and Tr(B_k²)."""

    ab: Rational
    aa: Rational
    bb: Rational

    def swapped(self) -> "CrossTraces":
        return CrossTraces(ab=self.ab, aa=self.bb, bb=self.aa)


class WeightAsymptotics(ExactModel):
    n: int = 2
    c0: Rational
    c1: Rational
    a0: Rational
    a1: Rational
    cross: Optional[CrossTraces] = None

    @model_validator(mode="after")
    def _positive_volume(self):
        if self.c0 <= 0:
            raise DomainError("leading dimension coefficient must be positive", {"c0": self.c0})
        return self

    @property
    def futaki(self) -> Fraction:
        return self.c1 * self.a0 / self.c0 - self.a1

    def lifted(self, lam, partner: Optional["WeightAsymptotics"] = None) -> "WeightAsymptotics":
        """Asymptotics of A_k + k·λ·I.

        Updating Tr(A_k B_k) needs the partner's a0; without a partner the
        cross traces are dropped.
        """
        lam = Fraction(lam)
        cross = None
        if self.cross is not None and partner is not None:
            cross = CrossTraces(
                ab=self.cross.ab + lam * partner.a0,
                aa=self.cross.aa + 2 * lam * self.a0 + lam * lam * self.c0,
                bb=self.cross.bb,
            )
        return WeightAsymptotics(
            n=self.n,
            c0=self.c0,
            c1=self.c1,
            a0=self.a0 + lam * self.c0,
            a1=self.a1 + lam * self.c1,
            cross=cross,
        )


class FutakiProducts(ExactModel):
    futaki: Rational
    alpha_norm_squared: Optional[Rational] = None
    inner: Optional[Rational] = None
    beta_futaki: Optional[Rational] = None
    beta_norm_squared: Optional[Rational] = None
    relative_futaki: Optional[Rational] = None


def futaki_and_products(w: WeightAsymptotics, w2: Optional[WeightAsymptotics] = None) -> FutakiProducts:
    """F(α), and with a torus generator β the products ⟨α,β⟩, ⟨β,β⟩ and
    F_χ(α) = F(α) − ⟨α,β⟩/⟨β,β⟩·F(β).

    The cross traces live on ``w``; those on ``w2`` are not consulted.
    """
    futaki = w.futaki
    alpha_norm = w.cross.aa - w.a0 * w.a0 / w.c0 if w.cross is not None else None
    if w2 is None:
        return FutakiProducts(futaki=futaki, alpha_norm_squared=alpha_norm)

    if w.n != w2.n or w.c0 != w2.c0 or w.c1 != w2.c1:
        raise DomainError(
            "both actions must live on the same section spaces",
            {"n": (w.n, w2.n), "c0": (w.c0, w2.c0), "c1": (w.c1, w2.c1)},
        )
    if w.cross is None:
        raise DomainError("inner products need the leading trace products")
    inner = w.cross.ab - w.a0 * w2.a0 / w.c0
    beta_norm = w.cross.bb - w2.a0 * w2.a0 / w.c0
    if beta_norm == 0:
        raise DegenerateTorusError("torus generator has zero norm")
    beta_futaki = w2.futaki
    relative = futaki - inner / beta_norm * beta_futaki
    logger.bind(component="futaki").debug("relative_futaki", futaki=str(futaki), relative=str(relative))
    return FutakiProducts(
        futaki=futaki,
        alpha_norm_squared=alpha_norm,
        inner=inner,
        beta_futaki=beta_futaki,
        beta_norm_squared=beta_norm,
        relative_futaki=relative,
    )
