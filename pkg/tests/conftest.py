import pytest
import structlog


@pytest.fixture(autouse=True)
def _restore_structlog_config():
    """Undo per-test logging configuration so no test logs into a closed capture stream."""
    saved = structlog.get_config()
    yield
    structlog.configure(**saved)
