from typing import Any, Dict

import structlog

from ..core.exact import exact_value, exact_vector, parse_rational
from ..core.workflow import BaseWorkflow, WorkflowConfig
from ..torus.action import WeightedAction, action_from_json, load_action, parse_vector
from ..torus.moment import eigenvalue_bound_check, minimize_norm_functional, moment_lower_bound_check
from ..torus.stability import classify_stability, extremal_vector

logger = structlog.get_logger()


def load_action_input(data: Dict[str, Any]) -> WeightedAction:
    """From ``weights`` (a list, optionally with ``support``) or an ``action`` file."""
    if data.get("weights") is not None:
        return WeightedAction.from_weights(data["weights"], data.get("support"))
    source = data["action_file"]
    return action_from_json(source) if isinstance(source, dict) else load_action(str(source))


class GitTorusWorkflow(BaseWorkflow):
    """Stability of a point under a torus action from its weights."""

    command = "git-torus"
    actions = ("classify", "minimize", "check-bounds")

    def __init__(self, config: WorkflowConfig, processor=None):
        super().__init__(config, processor)
        self._logger = logger.bind(workflow="git_torus")

    async def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        with self.phase("load"):
            action = load_action_input(data)
        if data["action"] == "classify":
            return self._classify(action)
        if data["action"] == "minimize":
            return self._minimize(action, data)
        return self._bounds(action, data)

    def _classify(self, action: WeightedAction) -> Dict[str, Any]:
        with self.phase("classify"):
            report = classify_stability(action)
        self.destabilized = not report.semistable
        return {
            "class": report.stability_class,
            "relative_polystable": report.relative_polystable,
            "hull_dimension": report.hull_dimension,
            "modulus_squared": exact_value(report.modulus_squared),
            "modulus": report.modulus,
            "closest_point": exact_vector(report.closest_point),
            "inf_moment_norm_squared": exact_value(report.inf_norm_squared),
            "worst_direction": exact_vector(report.worst_direction) if report.worst_direction else None,
            "worst_weight": exact_value(report.worst_weight),
        }

    def _minimize(self, action: WeightedAction, data: Dict[str, Any]) -> Dict[str, Any]:
        tol = data.get("tol")
        with self.phase("newton"):
            result = minimize_norm_functional(action, float(tol) if tol is not None else None)
        self.notes.append("Kempf-Ness minimisation runs in double precision")
        return result.model_dump(mode="json")

    def _bounds(self, action: WeightedAction, data: Dict[str, Any]) -> Dict[str, Any]:
        with self.phase("classify"):
            report = classify_stability(action)
        out: Dict[str, Any] = {"class": report.stability_class}
        if report.polystable and report.modulus_squared is not None:
            with self.phase("eigenvalue"):
                bound = eigenvalue_bound_check(action)
            out["eigenvalue_bound"] = {
                "min_eigenvalue": bound.min_eigenvalue,
                "bound": bound.bound,
                "modulus_squared": exact_value(bound.modulus_squared),
                "holds": bound.holds,
            }
        alpha = data.get("alpha")
        if alpha is None and report.worst_direction is not None:
            alpha = [str(c) for c in report.worst_direction]
        if alpha is not None:
            alpha = parse_vector(alpha) if isinstance(alpha, str) else tuple(parse_rational(str(a)) for a in alpha)
            chi = data.get("chi")
            chi = parse_vector(chi) if isinstance(chi, str) else (extremal_vector(action) if chi is None else chi)
            with self.phase("lower_bound"):
                check = moment_lower_bound_check(action, alpha, chi)
            out["lower_bound"] = {
                "applicable": check.applicable,
                "weight": exact_value(check.weight),
                "chi": exact_vector(check.chi),
                "lhs": exact_value(check.lhs),
                "rhs": exact_value(check.rhs),
                "holds": check.holds,
            }
        self._logger.info("bounds_checked", checks=len(out) - 1)
        return out
