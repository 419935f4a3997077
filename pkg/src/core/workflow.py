import json
import time
from abc import ABC, abstractmethod
from contextlib import contextmanager
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, TYPE_CHECKING

import structlog
from pydantic import BaseModel

from .errors import DomainError, KStabError

if TYPE_CHECKING:
    from .processor import WorkflowProcessor

logger = structlog.get_logger()


class WorkflowConfig(BaseModel):
    """Configuration for a workflow instance."""
    name: str
    max_retries: int = 0
    enabled: bool = True
    options: Dict[str, Any] = {}


class WorkflowResult(BaseModel):
    """Result of a workflow execution."""
    success: bool
    data: Optional[Dict[str, Any]] = None
    error: Optional[Dict[str, Any]] = None
    execution_time: float = 0.0
    timings: Dict[str, float] = {}
    destabilized: bool = False
    notes: List[str] = []


class RunReport(BaseModel):
    """What the CLI prints: the command, its parsed inputs and the results."""
    command: str
    inputs: Dict[str, Any]
    results: Dict[str, Any]
    timings: Optional[Dict[str, float]] = None
    convention_notes: List[str] = []

    @classmethod
    def from_result(
        cls,
        command: str,
        inputs: Dict[str, Any],
        result: WorkflowResult,
    ) -> "RunReport":
        results = result.data if result.success else {"error": result.error}
        return cls(
            command=command,
            inputs=inputs,
            results=results or {},
            timings=result.timings,
            convention_notes=list(result.notes),
        )

    def to_json(self, include_timings: bool = True) -> str:
        payload = self.model_dump(mode="json")
        if not include_timings:
            payload.pop("timings", None)
        return json.dumps(payload, sort_keys=True, indent=2, default=str)


class BaseWorkflow(ABC):
    """Base class for all workflows."""

    command: str = ""
    actions: tuple = ()

    def __init__(self, config: WorkflowConfig, processor: Optional["WorkflowProcessor"] = None):
        self.config = config
        self.processor = processor
        self.retry_count = 0
        self.timings: Dict[str, float] = {}
        self.destabilized = False
        self.notes: List[str] = []
        self._logger = logger.bind(workflow_name=config.name)

    @contextmanager
    def phase(self, name: str) -> Iterator[None]:
        """Time a block in milliseconds under ``name``."""
        start = time.perf_counter()
        try:
            yield
        finally:
            self.timings[name] = self.timings.get(name, 0.0) + (time.perf_counter() - start) * 1000.0

    def map(self, fn: Callable[[Any], Any], items: Iterable[Any]) -> List[Any]:
        """Independent sub-tasks, fanned out when the processor has workers."""
        if self.processor is None:
            return [fn(item) for item in items]
        return self.processor.map(fn, items)

    async def execute(self, data: Dict[str, Any]) -> WorkflowResult:
        """Execute the workflow with the given data."""
        self._logger.info("workflow_started", action=data.get("action"))
        start = time.perf_counter()

        try:
            if not await self.validate(data):
                raise DomainError("unknown action", {"action": data.get("action")})
            result = await self.process(data)
            self._logger.info("workflow_finished", destabilized=self.destabilized)
            return WorkflowResult(
                success=True,
                data=result,
                execution_time=time.perf_counter() - start,
                timings=dict(self.timings),
                destabilized=self.destabilized,
                notes=list(self.notes),
            )

        except KStabError as e:
            self._logger.warning("workflow_rejected", error=e.code, message=e.message)
            return WorkflowResult(
                success=False,
                error=e.to_dict(),
                execution_time=time.perf_counter() - start,
                timings=dict(self.timings),
            )

        except Exception as e:
            self._logger.error("workflow_failed", error=str(e))

            if self.retry_count < self.config.max_retries:
                self.retry_count += 1
                self._logger.info("retrying_workflow", attempt=self.retry_count)
                return await self.execute(data)

            return WorkflowResult(
                success=False,
                error={"error": "internal_error", "message": str(e), "details": {}},
                execution_time=time.perf_counter() - start,
                timings=dict(self.timings),
            )

        finally:
            await self.cleanup()

    @abstractmethod
    async def process(self, data: Dict[str, Any]) -> Dict[str, Any]:
        """Process the workflow data. Must be implemented by subclasses."""
        pass

    async def validate(self, data: Dict[str, Any]) -> bool:
        """Known action for this command family."""
        return not self.actions or data.get("action") in self.actions

    async def cleanup(self) -> None:
        """Cleanup resources after workflow execution. Can be overridden by subclasses."""
        pass
