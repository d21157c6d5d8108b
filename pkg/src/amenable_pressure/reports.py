"""Convergence tables and the markdown run summary."""

import logging
import os
from pathlib import Path
from typing import List, TypedDict

from amenable_pressure.exceptions import InputError
from amenable_pressure.storage import ArtifactStore, format_cell
from amenable_pressure.types import Cell, ConvergenceReport

logger = logging.getLogger(__name__)


class HeadlineRow(TypedDict):
    """One headline number of a run."""

    subject: str
    quantity: str
    value: Cell


class SummaryData(TypedDict):
    """Everything ``SUMMARY.md`` shows."""

    command: str
    system: str
    settings: List[HeadlineRow]
    headlines: List[HeadlineRow]
    artifacts: List[str]
    notes: List[str]


def emit_convergence_table(report: ConvergenceReport, path: Path) -> Path:
    """Write a convergence table as CSV.

    Args:
        report: A pressure, entropy, Lyapunov or normalized-value report
        path: Destination file

    Returns:
        Path: ``path``

    Raises:
        InputError: If the report has no rows
    """
    rows = report.table_rows()
    if not rows:
        raise InputError("refusing to write an empty report")
    store = ArtifactStore(path.parent)
    written = store.write_csv(path.name, report.table_columns(), rows)
    logger.info("Wrote %d rows to %s", len(rows), written)
    return written


def _table(rows: List[HeadlineRow]) -> str:
    lines = [
        "| Subject | Quantity | Value |",
        "|---------|----------|-------|",
    ]
    for row in rows:
        lines.append(
            f"| {row['subject']} | {row['quantity']} | "
            f"{format_cell(row['value'])} |"
        )
    return "\n".join(lines) + "\n"


def generate_markdown_summary(data: SummaryData, output_path: Path) -> None:
    """Write ``SUMMARY.md`` for a run.

    Args:
        data: Headline numbers and artifact names
        output_path: Where to save the summary
    """
    with output_path.open("w", encoding="utf-8") as f:
        f.write(f"# Run Summary: {data['command']}\n\n")
        f.write(f"System: `{data['system']}`\n\n")

        f.write("## Settings\n\n")
        f.write(_table(data["settings"]))

        f.write("\n## Results\n\n")
        if data["headlines"]:
            f.write(_table(data["headlines"]))
        else:
            f.write("No results.\n")

        f.write("\n## Artifacts\n\n")
        for name in sorted(data["artifacts"]):
            f.write(f"- `{name}`\n")

        if data["notes"]:
            f.write("\n## Notes\n\n")
            for note in data["notes"]:
                f.write(f"- {note}\n")
        f.flush()
        os.fsync(f.fileno())
    logger.debug("Wrote summary to %s", output_path)
