from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Dict, Iterable, List, Optional, Type

import structlog

from .config import get_config
from .errors import DomainError
from .workflow import BaseWorkflow, WorkflowConfig, WorkflowResult

logger = structlog.get_logger()


class WorkflowProcessor:
    """Routes commands to registered workflows and fans sub-tasks out to worker processes."""

    def __init__(self, jobs: Optional[int] = None):
        self.jobs = jobs if jobs is not None else get_config().runner.jobs
        if self.jobs < 1:
            raise DomainError("jobs must be at least 1", {"jobs": self.jobs})
        self.workflows: Dict[str, Type[BaseWorkflow]] = {}
        self._logger = logger.bind(component="workflow_processor")

    def register_workflow(self, workflow_class: Type[BaseWorkflow]) -> None:
        """Register a workflow class under its command name."""
        name = workflow_class.command or workflow_class.__name__
        self.workflows[name] = workflow_class
        self._logger.debug("workflow_registered", workflow=name)

    def create(self, command: str, options: Optional[Dict[str, Any]] = None) -> BaseWorkflow:
        if command not in self.workflows:
            raise DomainError("unknown command", {"command": command, "known": ", ".join(sorted(self.workflows))})
        config = WorkflowConfig(name=command, options=options or {})
        return self.workflows[command](config, processor=self)

    async def run(self, command: str, data: Dict[str, Any], options: Optional[Dict[str, Any]] = None) -> WorkflowResult:
        workflow = self.create(command, options)
        return await workflow.execute(data)

    def map(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
        """Apply ``fn`` to every item, results in input order.

        ``fn`` must be a module-level function when ``jobs > 1``.
        """
        items = list(items)
        if self.jobs == 1 or len(items) < 2:
            return [fn(item) for item in items]
        self._logger.debug("map_started", jobs=self.jobs, items=len(items))
        with ProcessPoolExecutor(max_workers=min(self.jobs, len(items))) as pool:
            return list(pool.map(fn, items))


def default_processor(jobs: Optional[int] = None) -> WorkflowProcessor:
    """A processor with every command family registered."""
    from ..workflows.bundle import BundleWorkflow
    from ..workflows.polygon import PolygonWorkflow
    from ..workflows.ruled import RuledWorkflow
    from ..workflows.surface import SurfaceWorkflow
    from ..workflows.torus import GitTorusWorkflow

    processor = WorkflowProcessor(jobs)
    for workflow_class in (PolygonWorkflow, GitTorusWorkflow, RuledWorkflow, SurfaceWorkflow, BundleWorkflow):
        processor.register_workflow(workflow_class)
    return processor
