import json

import pytest

from src.core.errors import DomainError
from src.core.processor import WorkflowProcessor, default_processor
from src.core.workflow import BaseWorkflow, RunReport, WorkflowConfig


class FlakyWorkflow(BaseWorkflow):
    """Fails with an unexpected error until ``fail_times`` attempts have passed."""

    command = "flaky"
    actions = ("go",)
    fail_times = 2

    async def process(self, data):
        if self.retry_count < self.fail_times:
            raise ValueError("Simulated failure")
        with self.phase("work"):
            values = self.map(abs, [-1, 2, -3])
        self.notes.append("ran")
        return {"values": values}


class RejectingWorkflow(BaseWorkflow):
    command = "rejecting"

    async def process(self, data):
        raise DomainError("bad input", {"x": 1})


@pytest.fixture
def processor():
    return default_processor(jobs=1)


@pytest.mark.asyncio
async def test_workflow_retry():
    """Unexpected errors are retried up to max_retries."""
    workflow = FlakyWorkflow(WorkflowConfig(name="flaky", max_retries=3))
    result = await workflow.execute({"action": "go"})
    assert result.success
    assert workflow.retry_count == 2
    assert result.data == {"values": [1, 2, 3]}
    assert "work" in result.timings
    assert result.notes == ["ran"]


@pytest.mark.asyncio
async def test_workflow_without_retries_fails():
    """The default is not to retry."""
    result = await FlakyWorkflow(WorkflowConfig(name="flaky")).execute({"action": "go"})
    assert not result.success
    assert result.error["error"] == "internal_error"


@pytest.mark.asyncio
async def test_library_errors_are_not_retried():
    """A KStabError is reported with its code and never retried."""
    workflow = RejectingWorkflow(WorkflowConfig(name="rejecting", max_retries=3))
    result = await workflow.execute({})
    assert not result.success
    assert workflow.retry_count == 0
    assert result.error == {"error": "domain_error", "message": "bad input", "details": {"x": "1"}}


@pytest.mark.asyncio
async def test_unknown_action_rejected():
    """Actions outside the family are domain errors."""
    result = await FlakyWorkflow(WorkflowConfig(name="flaky")).execute({"action": "stop"})
    assert not result.success
    assert result.error["error"] == "domain_error"


@pytest.mark.asyncio
async def test_processor_runs_registered_command(processor):
    """Commands route to their family workflow."""
    result = await processor.run("git-torus", {"action": "classify", "weights": [[1], [2]]})
    assert result.success
    assert result.destabilized
    assert result.data["class"] == "unstable"
    assert result.data["worst_weight"]["exact"] == "-1"


def test_processor_rejects_unknown_command(processor):
    """Only registered families can be created."""
    with pytest.raises(DomainError):
        processor.create("nonexistent")


def test_processor_needs_a_worker():
    """jobs must be positive."""
    with pytest.raises(DomainError):
        WorkflowProcessor(jobs=0)


def test_processor_map_keeps_order():
    """Worker processes return results in input order."""
    assert WorkflowProcessor(jobs=2).map(abs, [-3, 1, -2, 4]) == [3, 1, 2, 4]


@pytest.mark.asyncio
async def test_run_report_json(processor):
    """Reports serialise with sorted keys and can drop timings."""
    result = await processor.run("ruled", {"action": "futaki", "m": "3", "c": "1"})
    report = RunReport.from_result("ruled futaki", {"m": "3", "c": "1"}, result)
    payload = json.loads(report.to_json(include_timings=False))
    assert "timings" not in payload
    assert payload["command"] == "ruled futaki"
    assert payload["results"]["relative_futaki"]["exact"] == "125/33"
    assert payload["convention_notes"]
    assert "timings" in json.loads(report.to_json())
