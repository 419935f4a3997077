"""Exact stability classification of a point under a torus action."""
from fractions import Fraction
from math import sqrt
from typing import Literal, Optional, Tuple

import structlog

from ..core.exact import ExactModel, Rational
from .action import Vector, WeightedAction, dot
from .hull import (
    affine_dimension,
    closest_point,
    linear_rank,
    project_to_affine_hull,
    relative_facets,
    relative_interior_margin,
    unique_points,
)

logger = structlog.get_logger()

StabilityClass = Literal["unstable", "semistable-not-polystable", "polystable-not-stable", "stable"]


class StabilityReport(ExactModel):
    stability_class: StabilityClass
    relative_polystable: bool
    hull_dimension: int
    # None encodes an infinite modulus: a single weight at the origin has no relative boundary
    modulus_squared: Optional[Rational] = None
    closest_point: Tuple[Rational, ...]
    inf_norm_squared: Rational
    worst_direction: Optional[Tuple[Rational, ...]] = None
    worst_weight: Optional[Rational] = None

    @property
    def semistable(self) -> bool:
        return self.stability_class != "unstable"

    @property
    def polystable(self) -> bool:
        return self.stability_class in ("polystable-not-stable", "stable")

    @property
    def stable(self) -> bool:
        return self.stability_class == "stable"

    @property
    def modulus(self) -> float:
        if not self.polystable:
            return 0.0
        if self.modulus_squared is None:
            return float("inf")
        return sqrt(self.modulus_squared)

    @property
    def inf_moment_norm(self) -> float:
        return sqrt(self.inf_norm_squared)


def extremal_vector(action: WeightedAction) -> Vector:
    """Point of the affine hull of the supported weights closest to the origin."""
    return project_to_affine_hull(unique_points(action.supported))


def _zero_face_normal(points, facets) -> Optional[Vector]:
    for facet in facets:
        if facet.offset == 0:
            return facet.normal
    return None


def classify_stability(action: WeightedAction) -> StabilityReport:
    points = unique_points(action.supported)
    origin = tuple(Fraction(0) for _ in range(action.dimension))
    p = closest_point(points)
    dist2 = dot(p, p)
    dim = affine_dimension(points)
    facets = relative_facets(points)

    chi = project_to_affine_hull(points)
    margin = relative_interior_margin(points, chi)
    relative_polystable = margin is not None and (margin > 0 or len(points) == 1)

    modulus_squared: Optional[Fraction] = Fraction(0)
    worst: Optional[Vector] = None
    worst_weight: Optional[Fraction] = None
    if dist2 > 0:
        cls: StabilityClass = "unstable"
        worst = tuple(-c for c in p)
        worst_weight = max(dot(worst, a) for a in points)
    else:
        interior = relative_interior_margin(points, origin)
        if len(points) == 1 or (interior is not None and interior > 0):
            spans = linear_rank(points) == action.dimension
            cls = "stable" if spans else "polystable-not-stable"
            modulus_squared = min((f.distance_squared(origin) for f in facets), default=None)
        else:
            cls = "semistable-not-polystable"
            worst = _zero_face_normal(points, facets)
            worst_weight = Fraction(0) if worst is not None else None

    report = StabilityReport(
        stability_class=cls,
        relative_polystable=relative_polystable,
        hull_dimension=dim,
        modulus_squared=modulus_squared,
        closest_point=p,
        inf_norm_squared=dist2,
        worst_direction=worst,
        worst_weight=worst_weight,
    )
    logger.bind(component="torus").debug(
        "stability_classified",
        stability_class=cls,
        weights=len(points),
        hull_dimension=dim,
    )
    return report


def modulus_and_worst_direction(action: WeightedAction) -> Tuple[float, Optional[Vector], float]:
    """(modulus λ, worst direction ξ, inf ‖μ‖) in display form."""
    report = classify_stability(action)
    return report.modulus, report.worst_direction, report.inf_moment_norm
