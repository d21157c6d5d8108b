"""Artifact storage.

This module owns the output directory of a job and every file written
into it. Files are written whole, flushed and synced; nothing carries a
timestamp, so identical jobs leave identical trees.
"""

import csv
import json
import logging
import math
import os
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

from amenable_pressure.config import get_output_root
from amenable_pressure.types import Cell

# Get module logger
logger = logging.getLogger(__name__)

FLOAT_FORMAT = ".12g"


def format_cell(value: Cell) -> str:
    """Render one CSV cell: 12 significant digits, ``""`` for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, FLOAT_FORMAT)
    return str(value)


def round_floats(value: Any) -> Any:
    """Round every float in a JSON value to 12 significant digits."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return str(value)
        return float(format(value, FLOAT_FORMAT))
    if isinstance(value, Mapping):
        return {str(k): round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v) for v in value]
    if hasattr(value, "tolist"):
        return round_floats(value.tolist())
    return value


class ArtifactStore:
    """Writes the artifacts of one job under ``<root>/<job>``."""

    def __init__(
        self,
        root: Optional[Path] = None,
        job: Optional[str] = None,
    ) -> None:
        """Initialize the ArtifactStore.

        Args:
            root: Output root; resolved by ``get_output_root`` when omitted
            job: Optional job name, appended to ``root`` as a subdirectory
        """
        self.root = root or get_output_root()
        self.job_dir = self.root / job if job else self.root
        logger.debug("Artifact directory: %s", self.job_dir)

    def setup(self) -> None:
        """Create the job directory."""
        try:
            self.job_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error("Error creating %s: %s", self.job_dir, str(e))
            raise
        logger.info("Writing artifacts to %s", self.job_dir)

    def get_output_path(self, filename: str) -> Path:
        """Get the path of an artifact in the job directory."""
        return self.job_dir / filename

    def _write(self, filename: str, content: str) -> Path:
        path = self.get_output_path(filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(content)
            f.flush()
            os.fsync(f.fileno())
        logger.debug("Wrote %s (%d bytes)", path, len(content))
        return path

    def write_text(self, filename: str, content: str) -> Path:
        return self._write(filename, content)

    def write_json(self, filename: str, data: Any) -> Path:
        """Write one JSON document, indented, keys sorted."""
        text = json.dumps(round_floats(data), indent=2, sort_keys=True)
        return self._write(filename, text + "\n")

    def write_jsonl(
        self, filename: str, records: Iterable[Mapping[str, Any]]
    ) -> Path:
        """Write one JSON record per line, keys sorted."""
        lines = [
            json.dumps(round_floats(r), sort_keys=True) + "\n"
            for r in records
        ]
        return self._write(filename, "".join(lines))

    def write_csv(
        self,
        filename: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Cell]],
    ) -> Path:
        """Write a header row and formatted rows."""
        path = self.get_output_path(filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                if len(row) != len(columns):
                    raise ValueError(
                        f"row has {len(row)} cells for {len(columns)} "
                        "columns"
                    )
                writer.writerow([format_cell(c) for c in row])
            f.flush()
            os.fsync(f.fileno())
        logger.debug("Wrote %s", path)
        return path
