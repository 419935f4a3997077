import json
from typing import Any, Dict

import structlog

from ..core.exact import exact_value, parse_rational
from ..core.workflow import BaseWorkflow, WorkflowConfig
from ..futaki.surface import SurfaceDivisorData, calabi_lower_bound, normal_cone_futaki, ruled_surface_data, surface_data_from_json

logger = structlog.get_logger()


def load_surface_input(data: Dict[str, Any]) -> SurfaceDivisorData:
    """Intersection data from a file, a parsed document, or the ruled surface."""
    source = data.get("data")
    if source is None:
        return ruled_surface_data(data["m"], data.get("divisor", "sinf"))
    if isinstance(source, dict):
        return surface_data_from_json(source)
    with open(str(source), "r") as f:
        return surface_data_from_json(json.load(f))


class SurfaceWorkflow(BaseWorkflow):
    """Deformation to the normal cone of a curve on a polarised surface."""

    command = "surface"
    actions = ("normal-cone",)

    def __init__(self, config: WorkflowConfig, processor=None):
        super().__init__(config, processor)
        self._logger = logger.bind(workflow="surface")

    async def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        with self.phase("load"):
            surface = load_surface_input(data)
        c = parse_rational(data["c"])
        with self.phase("futaki"):
            futaki = normal_cone_futaki(surface, c)
        self.destabilized = futaki < 0
        out: Dict[str, Any] = {
            "futaki": exact_value(futaki),
            "slope": exact_value(surface.slope),
            "alpha1": [str(a) for a in surface.alpha1().coefficients],
            "alpha2": [str(a) for a in surface.alpha2().coefficients],
        }
        norm = data.get("norm")
        if norm is not None and futaki < 0:
            out["calabi_lower_bound"] = exact_value(calabi_lower_bound(futaki, parse_rational(norm)))
        return out
