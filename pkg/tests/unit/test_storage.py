"""Unit tests for the ArtifactStore class."""

import json
import math
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest

from amenable_pressure.storage import (
    ArtifactStore,
    format_cell,
    round_floats,
)


@pytest.fixture
def store(temp_dir: Path) -> ArtifactStore:
    """Create an ArtifactStore instance for testing."""
    store = ArtifactStore(temp_dir, "job")
    store.setup()
    return store


def test_init_with_job(temp_dir: Path) -> None:
    """Test that the job name becomes a subdirectory."""
    store = ArtifactStore(temp_dir, "golden-pressure")
    assert store.job_dir == temp_dir / "golden-pressure"
    assert ArtifactStore(temp_dir).job_dir == temp_dir


def test_init_uses_environment(output_root: Path) -> None:
    """Test the default root from the environment variable."""
    assert ArtifactStore(job="x").job_dir == output_root / "x"


def test_setup_creates_directories(store: ArtifactStore) -> None:
    assert store.job_dir.is_dir()


def test_setup_reports_errors(
    temp_dir: Path, caplog: pytest.LogCaptureFixture
) -> None:
    """Test that a failing mkdir is logged and re-raised."""
    store = ArtifactStore(temp_dir, "job")
    with patch.object(Path, "mkdir", side_effect=OSError("Permission denied")):
        with pytest.raises(OSError):
            store.setup()
    assert "Permission denied" in caplog.text


def test_get_output_path(store: ArtifactStore) -> None:
    assert store.get_output_path("a.csv") == store.job_dir / "a.csv"


@pytest.mark.parametrize(
    "value,expected",
    [
        (None, ""),
        (True, "true"),
        (False, "false"),
        (3, "3"),
        (0.1 + 0.2, "0.3"),
        (math.log(2.0), "0.69314718056"),
        ("text", "text"),
    ],
)
def test_format_cell(value: object, expected: str) -> None:
    """Test CSV cell rendering."""
    assert format_cell(value) == expected  # type: ignore[arg-type]


def test_round_floats() -> None:
    """Test rounding inside nested values and arrays."""
    data = {
        "a": [0.1 + 0.2, math.inf],
        "b": np.array([1.0 / 3.0]),
        "c": (True, None, 2),
    }
    assert round_floats(data) == {
        "a": [0.3, "inf"],
        "b": [0.333333333333],
        "c": [True, None, 2],
    }


def test_write_csv(store: ArtifactStore) -> None:
    """Test header, formatting and line endings."""
    path = store.write_csv(
        "table.csv", ["n", "value", "increment"], [(1, 0.5, None)]
    )
    assert path.read_bytes() == b"n,value,increment\n1,0.5,\n"


def test_write_csv_rejects_ragged_rows(store: ArtifactStore) -> None:
    with pytest.raises(ValueError):
        store.write_csv("bad.csv", ["a", "b"], [(1,)])


def test_write_json_is_sorted_and_rounded(store: ArtifactStore) -> None:
    path = store.write_json("out.json", {"z": 1, "a": 0.1 + 0.2})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"z"')
    assert json.loads(text) == {"a": 0.3, "z": 1}


def test_write_jsonl(store: ArtifactStore) -> None:
    path = store.write_jsonl("r.jsonl", [{"b": 1, "a": 2}, {"c": 3}])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == ['{"a": 2, "b": 1}', '{"c": 3}']


def test_identical_writes_are_identical(temp_dir: Path) -> None:
    """Test that artifacts carry nothing run-specific."""
    contents = []
    for job in ("one", "two"):
        store = ArtifactStore(temp_dir, job)
        store.setup()
        contents.append(
            store.write_json("x.json", {"v": math.pi}).read_bytes()
        )
    assert contents[0] == contents[1]


def test_write_text_creates_parents(store: ArtifactStore) -> None:
    path = store.write_text("nested/dir/note.txt", "hello")
    assert path.read_text(encoding="utf-8") == "hello"
