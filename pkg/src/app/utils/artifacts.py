"""
CSV and JSON writers for run artifacts.

Both formats open with the generation timestamp and the resolved run config;
everything after the timestamp is a deterministic function of the config, so
two runs with the same config differ only in that first line (CSV) or field (JSON).
Floats are written in shortest round-trip form.
"""
import csv
import io
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

logger = logging.getLogger(__name__)


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {path}")


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], config: dict) -> str:
    buffer = io.StringIO()
    buffer.write(f"# generated_at: {_timestamp()}\n")
    buffer.write(f"# config: {json.dumps(config, sort_keys=True)}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buffer.getvalue()


def render_json(payload: dict, config: dict) -> str:
    document = {"generated_at": _timestamp(), "config": config, **payload}
    return json.dumps(document, indent=2) + "\n"


def write_csv(path: Path | None, header: Sequence[str], rows: Iterable[Sequence[Any]], config: dict) -> None:
    """Writes to `path`, or to stdout when `path` is None."""
    _emit(render_csv(header, rows, config), path)


def write_json(path: Path | None, payload: dict, config: dict) -> None:
    _emit(render_json(payload, config), path)


def body(text: str) -> str:
    """Artifact text without its timestamp, for reproducibility checks."""
    return "".join(line for line in text.splitlines(keepends=True) if "generated_at" not in line)
