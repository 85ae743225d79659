"""Result persistence and the per-trial work queue.

Primary outputs (CSV and JSON lines) are byte-reproducible from the config
and seed. Wall-clock information lives only under the ``timing`` key: a
column of JSON records, or the ``<out>.meta.json`` sidecar for CSV outputs.
"""

from __future__ import annotations

import csv
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence, TextIO

from .config import ExperimentConfig

TIMING_KEY = "timing"


def artifact_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:  # pragma: no cover - running from a source tree
        return "0+unknown"


def write_csv(
    path: str | Path | None, rows: Sequence[dict[str, Any]], fieldnames: Sequence[str] | None = None
) -> Path | None:
    """Header row plus one line per row; standard output when ``path`` is None."""
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    if path is None:
        _write_rows(sys.stdout, rows, fieldnames)
        return None
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        _write_rows(fh, rows, fieldnames)
    return path


def _write_rows(fh: TextIO, rows: Sequence[dict[str, Any]], fieldnames: Sequence[str]) -> None:
    writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    writer.writeheader()
    writer.writerows(rows)


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def write_jsonl(path: str | Path, records: Iterable[dict[str, Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return path


def read_jsonl(path: str | Path) -> list[dict[str, Any]]:
    return [json.loads(line) for line in Path(path).read_text().splitlines() if line.strip()]


def strip_timing(record: dict[str, Any]) -> dict[str, Any]:
    return {k: v for k, v in record.items() if k != TIMING_KEY}


def write_meta(out: str | Path, cfg: ExperimentConfig, command: str, seconds: float, summary: dict[str, Any]) -> Path:
    """Sidecar run record: config snapshot, version, summary and wall-clock timing."""
    record = {
        "command": command,
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in cfg.as_dict().items()},
        "version": artifact_version(),
        "summary": summary,
        TIMING_KEY: {"seconds": seconds, "finished": datetime.now(timezone.utc).isoformat()},
    }
    path = Path(str(out) + ".meta.json")
    path.write_text(json.dumps(record, sort_keys=True, indent=1) + "\n")
    return path


def parallel_map(fn: Callable[[Any], Any], items: Sequence[Any], workers: int) -> list[Any]:
    """``[fn(x) for x in items]`` in order; a process pool when ``workers > 1``.

    Each item carries its own seed material, so results do not depend on the
    schedule.
    """
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


class Stopwatch:
    def __enter__(self) -> Stopwatch:
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc: object) -> None:
        self.seconds = time.perf_counter() - self.start
