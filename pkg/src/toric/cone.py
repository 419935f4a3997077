"""Exact minimisation of the toric functional over grid convex functions,
and sampled estimates of the uniform and boundary-L² constants."""
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, sqrt
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..core.config import get_config
from ..core.errors import ResolutionError, SamplingError
from ..core.exact import ExactModel, Rational
from ..core.lp import LinearProgram
from ..geometry.grid import PLFunction, PolygonGrid, build_grid
from ..geometry.integration import integrate
from ..geometry.polygon import RationalPolygon
from .functional import (
    ExtremalAffine,
    donaldson_functional,
    extremal_affine,
    pi_norm_squared,
    weighted_interior_masses,
)

logger = structlog.get_logger()


@dataclass(frozen=True)
class ConeMinimum:
    value: Fraction
    resolution: int
    witness: PLFunction
    anchor: int
    relative: bool
    status: Literal["grid-certified", "destabilizer"]

    @property
    def destabilized(self) -> bool:
        return self.value < 0


def minimize_convex_cone(
    polygon: RationalPolygon,
    resolution: int,
    A: Optional[ExtremalAffine] = None,
) -> ConeMinimum:
    """min L (or L_A) over convex grid functions with f ≥ 0, f(v₀) = 0 and ∫_∂ f dσ = 1.

    v₀ is the grid node nearest the centroid. A nonnegative minimum certifies
    stability at this resolution only.
    """
    if resolution < 2:
        raise ResolutionError("the cone minimisation needs resolution at least 2", {"resolution": resolution})
    log = logger.bind(component="convex_cone", resolution=resolution)
    grid = build_grid(polygon, resolution)
    n = len(grid.nodes)
    anchor = grid.nearest_node(polygon.centroid)

    boundary = grid.boundary_masses()
    interior = weighted_interior_masses(grid, A)
    objective = {v: boundary[v] - interior[v] for v in range(n)}

    lp = LinearProgram(n)
    for row in grid.convexity_rows:
        lp.add_ge(dict(row.coefficients), 0)
    lp.add_eq({anchor: 1}, 0)
    lp.add_eq({v: m for v, m in enumerate(boundary) if m}, 1)
    result = lp.minimize(objective)
    if result.status == "infeasible":
        raise ResolutionError("normalisation is infeasible on this grid", {"resolution": resolution})
    if result.status == "unbounded":
        raise ResolutionError("functional is unbounded below on the normalised cone", {"resolution": resolution})

    witness = PLFunction(grid, result.x[:n])
    status = "destabilizer" if result.value < 0 else "grid-certified"
    log.info("cone_minimised", value=str(result.value), status=status, iterations=result.iterations)
    return ConeMinimum(
        value=result.value,
        resolution=resolution,
        witness=witness,
        anchor=anchor,
        relative=A is not None,
        status=status,
    )


def hinge_directions(grid: PolygonGrid) -> List[Tuple[int, int, Fraction]]:
    """Grid lines a·x + b·y = c along which the triangulation has edges."""
    n = grid.resolution
    x0, y0, x1, y1 = grid.polygon.bounding_box
    lines = []
    for k in range(floor(x0 * n) + 1, ceil(x1 * n)):
        lines.append((1, 0, Fraction(k, n)))
    for k in range(floor(y0 * n) + 1, ceil(y1 * n)):
        lines.append((0, 1, Fraction(k, n)))
    for k in range(floor((x0 + y0) * n) + 1, ceil((x1 + y1) * n)):
        lines.append((1, 1, Fraction(k, n)))
    return lines


def random_convex_function(
    grid: PolygonGrid,
    rng: np.random.Generator,
    terms: int = 3,
    offset: bool = False,
) -> PLFunction:
    """Positive combination of hinges max(±(a·x + b·y − c), 0) along grid lines,
    optionally plus a positive constant; never the zero function."""
    lines = hinge_directions(grid)
    if not lines:
        raise SamplingError("no interior grid lines to place hinges on", {"resolution": grid.resolution})
    chosen = []
    for _ in range(terms):
        a, b, c = lines[int(rng.integers(len(lines)))]
        sign = 1 if rng.integers(2) else -1
        weight = Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4)))
        chosen.append((a, b, c, sign, weight))
    const = Fraction(int(rng.integers(1, 4)), 4) if offset else Fraction(0)

    def value(x, y):
        total = const
        for a, b, c, sign, weight in chosen:
            total += weight * max(sign * (a * x + b * y - c), Fraction(0))
        return total

    f = PLFunction.from_callable(grid, value)
    if all(v == 0 for v in f.values):
        return PLFunction.from_callable(grid, lambda x, y: Fraction(1))
    return f


class RatioSample(ExactModel):
    numerator: Rational
    denominator_squared: Rational

    @property
    def ratio(self) -> float:
        return float(self.numerator) / sqrt(self.denominator_squared)


class UniformRatioEstimate(ExactModel):
    resolution: int
    estimate: float
    best: RatioSample
    samples: int
    lp_value: Rational
    kind: Literal["estimate"] = "estimate"


def uniform_ratio(polygon: RationalPolygon, f: PLFunction, A: Optional[ExtremalAffine] = None) -> Optional[RatioSample]:
    """L_A(f) / ‖π f‖_{L²}, or None when f is affine."""
    A = A or extremal_affine(polygon)
    denom = pi_norm_squared(polygon, f)
    if denom == 0:
        return None
    return RatioSample(numerator=donaldson_functional(polygon, f, A), denominator_squared=denom)


def uniform_ratio_estimate(
    polygon: RationalPolygon,
    resolution: int,
    samples: Optional[int] = None,
    seed: int = 0,
) -> UniformRatioEstimate:
    """Smallest sampled L_A(f)/‖π f‖ over the LP witness and random convex functions.

    This bounds the uniform constant from above only.
    """
    samples = samples if samples is not None else get_config().toric.uniform_samples
    A = extremal_affine(polygon)
    cone = minimize_convex_cone(polygon, resolution, A)
    grid = build_grid(polygon, resolution)
    rng = np.random.default_rng(seed)
    candidates = [cone.witness] + [random_convex_function(grid, rng) for _ in range(samples)]
    ratios = [r for r in (uniform_ratio(polygon, f, A) for f in candidates) if r is not None]
    if not ratios:
        raise SamplingError("every sample was affine", {"samples": len(candidates)})
    best = min(ratios, key=lambda r: r.ratio)
    logger.bind(component="uniform_ratio").info("uniform_ratio_estimated", estimate=best.ratio, samples=len(ratios))
    return UniformRatioEstimate(
        resolution=resolution,
        estimate=best.ratio,
        best=best,
        samples=len(ratios),
        lp_value=cone.value,
    )


class L2ConstantLevel(ExactModel):
    resolution: int
    max_ratio_squared: Rational

    @property
    def max_ratio(self) -> float:
        return sqrt(self.max_ratio_squared)


class L2ConstantCheck(ExactModel):
    levels: Tuple[L2ConstantLevel, ...]
    constant: float
    kind: Literal["estimate"] = "estimate"


def boundary_l2_ratio_squared(polygon: RationalPolygon, f: PLFunction) -> Fraction:
    """(‖f‖_{L²(P)} / ∫_∂P f dσ)²."""
    edge = integrate(polygon, f, "boundary")
    if edge == 0:
        raise SamplingError("boundary integral vanishes")
    return integrate(polygon, f, "interior", power=2) / (edge * edge)


def boundary_l2_constant_check(
    polygon: RationalPolygon,
    samples: Optional[int] = None,
    resolutions: Optional[Sequence[int]] = None,
    seed: int = 0,
) -> L2ConstantCheck:
    """Running maximum of ‖f‖_{L²}/∫_∂ f dσ over random nonnegative convex functions,
    one level per resolution."""
    cfg = get_config().toric
    samples = samples if samples is not None else cfg.l2_samples
    if samples < 1:
        raise SamplingError("at least one sample is needed")
    resolutions = list(resolutions or cfg.l2_resolutions)
    rng = np.random.default_rng(seed)
    levels = []
    running = Fraction(0)
    for n in resolutions:
        grid = build_grid(polygon, n)
        for k in range(samples):
            f = random_convex_function(grid, rng, offset=bool(k % 2))
            running = max(running, boundary_l2_ratio_squared(polygon, f))
        levels.append(L2ConstantLevel(resolution=n, max_ratio_squared=running))
    return L2ConstantCheck(levels=tuple(levels), constant=sqrt(running))
