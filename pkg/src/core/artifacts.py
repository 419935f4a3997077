"""Files written next to a report: witnesses and sample tables."""
import csv
import io
import json
import os
import tempfile
from typing import Any, Iterable, Sequence

import structlog

logger = structlog.get_logger()

FLOAT_FORMAT = ".17g"


def format_float(x: Any) -> str:
    return format(float(x), FLOAT_FORMAT)


def write_atomic(path: str, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".kstab-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.bind(component="artifacts").debug("artifact_written", path=path, size=len(text))


def write_json(path: str, payload: Any) -> None:
    write_atomic(path, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Floats at 17 significant digits; returns the number of data rows."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    count = 0
    for row in rows:
        writer.writerow([format_float(v) for v in row])
        count += 1
    write_atomic(path, buffer.getvalue())
    return count
