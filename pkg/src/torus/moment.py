"""Moment map of a torus orbit and Kempf–Ness minimisation in floating point."""
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy.linalg import orth
from scipy.special import logsumexp, softmax

from ..core.config import get_config
from ..core.errors import NonConvergenceError, PreconditionError
from ..core.exact import ExactModel, Rational
from .action import WeightedAction, dot, hm_weight
from .hull import unique_points
from .stability import classify_stability, extremal_vector

logger = structlog.get_logger()


def _weights(action: WeightedAction) -> np.ndarray:
    return np.array([[float(c) for c in w] for w in action.supported], dtype=float)


def norm_functional(action: WeightedAction, xi: Sequence[float]) -> float:
    """(1/2)·log Σ e^{2⟨ξ,α⟩}; its gradient is the moment map."""
    w = _weights(action)
    return 0.5 * float(logsumexp(2.0 * w @ np.asarray(xi, dtype=float)))


def moment_map(action: WeightedAction, xi: Sequence[float]) -> np.ndarray:
    w = _weights(action)
    p = softmax(2.0 * w @ np.asarray(xi, dtype=float))
    return p @ w


def moment_hessian(action: WeightedAction, xi: Sequence[float]) -> np.ndarray:
    """Derivative of the moment map: 2(Σ p αα^T − μμ^T)."""
    w = _weights(action)
    p = softmax(2.0 * w @ np.asarray(xi, dtype=float))
    mu = p @ w
    return 2.0 * ((w * p[:, None]).T @ w - np.outer(mu, mu))


class KempfNessResult(ExactModel):
    xi: Tuple[float, ...]
    moment: Tuple[float, ...]
    moment_norm: float
    converged: bool
    diverged: bool
    iterations: int
    recession_direction: Optional[Tuple[float, ...]] = None


def _hull_directions(action: WeightedAction) -> np.ndarray:
    points = unique_points(action.supported)
    base = np.array([float(c) for c in points[0]])
    diffs = np.array([[float(c) for c in p] for p in points[1:]]) - base if len(points) > 1 else np.zeros((0, action.dimension))
    if diffs.size == 0:
        return np.zeros((action.dimension, 0))
    return orth(diffs.T)


def minimize_norm_functional(action: WeightedAction, tol: Optional[float] = None) -> KempfNessResult:
    """Damped Newton on the norm functional restricted to the affine-hull directions.

    Stops when the hull component of μ is below ``tol``, or declares divergence
    once the iterate leaves the configured ball while ‖μ‖ stays at least half
    the certified distance from the origin.
    """
    cfg = get_config().torus
    tol = tol if tol is not None else cfg.tolerance
    if tol <= 0:
        raise PreconditionError("tolerance must be positive", {"tol": tol})
    log = logger.bind(component="kempf_ness")
    report = classify_stability(action)
    distance = report.inf_moment_norm
    q = _hull_directions(action)
    eta = np.zeros(q.shape[1])

    def f(e: np.ndarray) -> float:
        return norm_functional(action, q @ e)

    iterations = 0
    while True:
        xi = q @ eta
        mu = moment_map(action, xi)
        grad = q.T @ mu
        if np.linalg.norm(grad) <= tol:
            log.debug("kempf_ness_converged", iterations=iterations, moment_norm=float(np.linalg.norm(mu)))
            return KempfNessResult(
                xi=tuple(xi), moment=tuple(mu), moment_norm=float(np.linalg.norm(mu)),
                converged=True, diverged=False, iterations=iterations,
            )
        if np.linalg.norm(xi) > cfg.divergence_bound and report.stability_class == "unstable":
            if np.linalg.norm(mu) >= distance / 2:
                direction = -mu / np.linalg.norm(mu)
                log.debug("kempf_ness_diverged", iterations=iterations, moment_norm=float(np.linalg.norm(mu)))
                return KempfNessResult(
                    xi=tuple(xi), moment=tuple(mu), moment_norm=float(np.linalg.norm(mu)),
                    converged=False, diverged=True, iterations=iterations,
                    recession_direction=tuple(direction),
                )
        if iterations >= cfg.max_iterations:
            raise NonConvergenceError(
                "Kempf-Ness iteration cap reached without convergence or divergence",
                {"iterations": iterations, "gradient_norm": float(np.linalg.norm(grad))},
            )
        hess = q.T @ moment_hessian(action, xi) @ q
        step = -np.linalg.solve(hess + cfg.regularization * np.eye(len(eta)), grad)
        cap = max(1.0, float(np.linalg.norm(eta)))
        norm = float(np.linalg.norm(step))
        if norm > cap:
            step *= cap / norm
        f0 = f(eta)
        slope = float(grad @ step)
        t = 1.0
        while f(eta + t * step) > f0 + 1e-4 * t * slope and t > 1e-12:
            t *= 0.5
        eta = eta + t * step
        iterations += 1


class EigenvalueBound(ExactModel):
    min_eigenvalue: float
    modulus_squared: Rational
    n_weights: int
    bound: float
    holds: bool


def eigenvalue_bound_check(action: WeightedAction) -> EigenvalueBound:
    """Smallest eigenvalue of dμ at the moment zero against 2λ²/n."""
    report = classify_stability(action)
    if not report.polystable:
        raise PreconditionError("eigenvalue bound needs a polystable point", {"class": report.stability_class})
    if report.modulus_squared is None:
        raise PreconditionError("trivial weight polytope has no modulus")
    result = minimize_norm_functional(action)
    q = _hull_directions(action)
    d_mu = q.T @ moment_hessian(action, result.xi) @ q
    min_eig = float(np.linalg.eigvalsh(d_mu).min())
    n = len(action.supported)
    bound = 2.0 * float(report.modulus_squared) / n
    return EigenvalueBound(
        min_eigenvalue=min_eig,
        modulus_squared=report.modulus_squared,
        n_weights=n,
        bound=bound,
        holds=min_eig >= bound - 1e-9,
    )


class LowerBoundCheck(ExactModel):
    applicable: bool
    weight: Rational
    chi: Tuple[Rational, ...]
    lhs: Rational
    rhs: Optional[Rational] = None
    holds: Optional[bool] = None


def moment_lower_bound_check(
    action: WeightedAction, alpha: Sequence[int], chi: Optional[Sequence[Fraction]] = None
) -> LowerBoundCheck:
    """inf ‖μ‖² ≥ ‖χ‖² + F²/‖α‖² for a direction α with F(α) − ⟨α,χ⟩ < 0.

    inf ‖μ‖² is the squared distance from the origin to the weight polytope.
    """
    alpha = tuple(Fraction(a) for a in alpha)
    chi = tuple(Fraction(c) for c in chi) if chi is not None else extremal_vector(action)
    weight = hm_weight(action, alpha) - dot(alpha, chi)
    lhs = classify_stability(action).inf_norm_squared
    if weight >= 0:
        logger.bind(component="torus").info("lower_bound_skipped", weight=str(weight))
        return LowerBoundCheck(applicable=False, weight=weight, chi=chi, lhs=lhs)
    rhs = dot(chi, chi) + weight * weight / dot(alpha, alpha)
    return LowerBoundCheck(applicable=True, weight=weight, chi=chi, lhs=lhs, rhs=rhs, holds=lhs >= rhs)


def grid_inf_norm(action: WeightedAction, radius: float, steps: int) -> float:
    """min ‖μ(ξ)‖ over a uniform grid of ξ in [−radius, radius]^d."""
    axes: List[np.ndarray] = [np.linspace(-radius, radius, steps)] * action.dimension
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, action.dimension)
    w = _weights(action)
    p = softmax(2.0 * mesh @ w.T, axis=1)
    return float(np.linalg.norm(p @ w, axis=1).min())
