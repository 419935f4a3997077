from typing import Any, Dict, List, Tuple

import structlog

from ..core.artifacts import write_json
from ..core.config import get_config
from ..core.exact import exact_value, exact_vector
from ..core.workflow import BaseWorkflow, WorkflowConfig
from ..geometry.polygon import RationalPolygon, edge_measure_density, load_polygon, polygon_from_json
from ..toric.cone import ConeMinimum, boundary_l2_constant_check, minimize_convex_cone, uniform_ratio_estimate
from ..toric.creases import semistable_decomposition
from ..toric.functional import affine_futaki, extremal_affine

logger = structlog.get_logger()

GRID_NOTE = "a nonnegative cone minimum certifies stability at the stated grid resolution only"


def load_polygon_input(source: Any) -> RationalPolygon:
    """A polygon from a path, a parsed document or a polygon."""
    if isinstance(source, RationalPolygon):
        return source
    if isinstance(source, dict):
        return polygon_from_json(source)
    return load_polygon(str(source))


def cone_at(task: Tuple[RationalPolygon, int, bool]) -> ConeMinimum:
    polygon, resolution, relative = task
    A = extremal_affine(polygon) if relative else None
    return minimize_convex_cone(polygon, resolution, A)


def witness_document(polygon: RationalPolygon, cone: ConeMinimum) -> Dict[str, Any]:
    return {
        "polygon": polygon.to_json(),
        "resolution": cone.resolution,
        "value": str(cone.value),
        "nodes": [[str(x), str(y)] for x, y in cone.witness.grid.nodes],
        "values": [str(v) for v in cone.witness.values],
    }


class PolygonWorkflow(BaseWorkflow):
    """Toric stability of a rational polygon: cone minimum, decomposition, estimates."""

    command = "polygon"
    actions = ("check", "decompose", "uniform", "extremal-affine")

    def __init__(self, config: WorkflowConfig, processor=None):
        super().__init__(config, processor)
        self._logger = logger.bind(workflow="polygon")

    async def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        with self.phase("load"):
            polygon = load_polygon_input(data["polygon"])
        action = data["action"]
        if action == "check":
            return self._check(polygon, data)
        if action == "decompose":
            return self._decompose(polygon, data)
        if action == "uniform":
            return self._uniform(polygon, data)
        return self._extremal(polygon)

    def _resolutions(self, data: Dict[str, Any]) -> List[int]:
        resolutions = data.get("resolutions") or [get_config().toric.default_resolution]
        return [int(n) for n in resolutions]

    def _check(self, polygon: RationalPolygon, data: Dict[str, Any]) -> Dict[str, Any]:
        relative = bool(data.get("relative"))
        resolutions = self._resolutions(data)
        with self.phase("lp"):
            cones = self.map(cone_at, [(polygon, n, relative) for n in resolutions])
        levels = []
        for cone in cones:
            levels.append({
                "resolution": cone.resolution,
                "minimum": exact_value(cone.value),
                "status": cone.status,
                "witness_convex": cone.witness.is_convex,
            })
        worst = min(cones, key=lambda c: c.value)
        self.destabilized = worst.destabilized
        witness_path = data.get("witness_out")
        if worst.destabilized and witness_path:
            with self.phase("witness"):
                write_json(witness_path, witness_document(polygon, worst))
        self.notes.append(GRID_NOTE)
        self._logger.info("polygon_checked", destabilized=self.destabilized, levels=len(levels))
        return {
            "relative": relative,
            "levels": levels,
            "minimum": exact_value(worst.value),
            "status": worst.status,
            "witness_file": witness_path if worst.destabilized else None,
        }

    def _decompose(self, polygon: RationalPolygon, data: Dict[str, Any]) -> Dict[str, Any]:
        resolution = self._resolutions(data)[0]
        with self.phase("decompose"):
            result = semistable_decomposition(polygon, resolution)
        self.notes.append(GRID_NOTE)
        return {
            "resolution": result.resolution,
            "pieces": [p.to_json() for p in result.pieces],
            "creases": [c.to_json() for c in result.creases],
            "families": [f.to_json() for f in result.families],
            "total_area": exact_value(result.total_area),
            "area": exact_value(polygon.area),
        }

    def _uniform(self, polygon: RationalPolygon, data: Dict[str, Any]) -> Dict[str, Any]:
        resolution = self._resolutions(data)[0]
        seed = int(data.get("seed", 0))
        samples = data.get("samples")
        with self.phase("uniform"):
            ratio = uniform_ratio_estimate(polygon, resolution, samples=samples, seed=seed)
        with self.phase("l2"):
            l2 = boundary_l2_constant_check(polygon, samples=samples, seed=seed)
        self.notes.append("uniform ratio and L2 constant are sampled estimates, not bounds")
        return {
            "uniform_ratio": {
                "resolution": ratio.resolution,
                "estimate": ratio.estimate,
                "numerator": exact_value(ratio.best.numerator),
                "denominator_squared": exact_value(ratio.best.denominator_squared),
                "samples": ratio.samples,
                "lp_value": exact_value(ratio.lp_value),
                "kind": ratio.kind,
            },
            "l2_constant": {
                "levels": [
                    {"resolution": lv.resolution, "max_ratio_squared": exact_value(lv.max_ratio_squared)}
                    for lv in l2.levels
                ],
                "constant": l2.constant,
                "kind": l2.kind,
            },
        }

    def _extremal(self, polygon: RationalPolygon) -> Dict[str, Any]:
        with self.phase("extremal"):
            A = extremal_affine(polygon)
            futaki = affine_futaki(polygon)
            edges = edge_measure_density(polygon)
        return {
            "A": exact_vector([A.a0, A.a1, A.a2]),
            "constant": A.is_constant,
            "affine_futaki": exact_vector(futaki),
            "edges": [
                {
                    "edge": e.edge,
                    "normal": list(e.normal),
                    "density_squared": exact_value(e.density_squared),
                    "lattice_length": exact_value(e.lattice_length),
                    "sigma_length": exact_value(e.sigma_length),
                }
                for e in edges
            ],
        }
