from typing import Any, Dict, Sequence

import structlog

from ..core.config import get_config
from ..core.exact import exact_value, parse_rational
from ..core.workflow import BaseWorkflow, WorkflowConfig
from ..geometry.grid import PLFunction, build_grid
from ..geometry.polynomial import PolynomialQ
from ..toric.bundle import IntervalFunction, toric_bundle_futaki
from .polygon import load_polygon_input

logger = structlog.get_logger()


def interval_function(data: Dict[str, Any], lo, hi) -> IntervalFunction:
    """Knot values, or the hinge max(τ − crease, 0)."""
    if data.get("knots") is not None:
        return IntervalFunction(
            tuple(parse_rational(k) for k in data["knots"]),
            tuple(parse_rational(v) for v in data["values"]),
        )
    return IntervalFunction.hinge(lo, hi, parse_rational(data["crease"]))


def univariate(coefficients: Sequence[Any]) -> PolynomialQ:
    return PolynomialQ(tuple(parse_rational(c) for c in coefficients))


class BundleWorkflow(BaseWorkflow):
    """Futaki invariant of a toric test-configuration of a toric bundle."""

    command = "bundle"
    actions = ("futaki",)

    def __init__(self, config: WorkflowConfig, processor=None):
        super().__init__(config, processor)
        self._logger = logger.bind(workflow="bundle")

    async def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        with self.phase("futaki"):
            if data.get("polygon") is not None:
                polygon = load_polygon_input(data["polygon"])
                grid = build_grid(polygon, int(data.get("resolution") or get_config().toric.default_resolution))
                a0, a1, a2 = (parse_rational(c) for c in data["hinge"])
                f = PLFunction.from_callable(grid, lambda x, y: max(a0 + a1 * x + a2 * y, 0))
                result = toric_bundle_futaki(polygon, data.get("q1"), data.get("q2"), f)
            else:
                lo, hi = (parse_rational(x) for x in data["interval"])
                f = interval_function(data, lo, hi)
                q1 = univariate(data.get("q1") or ["1"])
                q2 = univariate(data.get("q2") or ["0"])
                result = toric_bundle_futaki((lo, hi), q1, q2, f)
        self.destabilized = result.futaki < 0
        self._logger.info("bundle_futaki", futaki=str(result.futaki))
        return {name: exact_value(getattr(result, name)) for name in type(result).model_fields}
