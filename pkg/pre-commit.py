#!/usr/bin/env python3
"""Pre-commit script for running code quality checks.

Formatting runs first so that a reformat does not hide test failures.
Pass ``--fast`` to skip tests marked ``slow`` or ``integration``.
"""

import os
import subprocess
import sys
from pathlib import Path
from typing import List, NamedTuple, Tuple

PACKAGE = "amenable_pressure"

# Tools that exit non-zero when they rewrite files
FORMATTERS = ("black", "isort")


def get_python_path() -> str:
    """Get the path to the Python interpreter from virtual environment."""
    for candidate in (
        ".venv/bin/python",
        "venv/bin/python",
        ".venv/Scripts/python.exe",
        "venv/Scripts/python.exe",
    ):
        if Path(candidate).exists():
            return candidate
    return sys.executable or "python"


class Check(NamedTuple):
    """A pre-commit check with its command and description."""

    tool: str
    command: List[str]
    description: str


def run_command(command: List[str], description: str) -> Tuple[bool, str]:
    """Run a command and return success status and output."""
    print(f"\n{description}...")
    try:
        result = subprocess.run(
            command,
            check=False,
            env={**os.environ, "FORCE_COLOR": "1", "PY_COLORS": "1"},
        )
        return result.returncode == 0, ""
    except OSError as e:
        return False, f"Failed to run command: {e}"


def build_checks(python_path: str, fast: bool) -> List[Check]:
    pytest_command = [
        python_path,
        "-m",
        "pytest",
        f"--cov={PACKAGE}",
        "--cov-report=term-missing",
    ]
    if fast:
        pytest_command += ["-m", "not slow and not integration"]
    return [
        Check(
            "black",
            [python_path, "-m", "black", "."],
            "Formatting code with black",
        ),
        Check(
            "isort",
            [python_path, "-m", "isort", "."],
            "Sorting imports with isort",
        ),
        Check(
            "flake8",
            [python_path, "-m", "flake8", "src", "tests"],
            "Checking code style with flake8",
        ),
        Check(
            "mypy",
            [python_path, "-m", "mypy", f"src/{PACKAGE}", "tests"],
            "Checking types with mypy",
        ),
        Check("pytest", pytest_command, "Running tests with coverage"),
    ]


def main(argv: List[str]) -> int:
    """Run all pre-commit checks."""
    fast = "--fast" in argv
    failed: List[Tuple[str, str]] = []
    reformatted = False

    for check in build_checks(get_python_path(), fast):
        success, error = run_command(check.command, check.description)
        if success:
            continue
        if check.tool in FORMATTERS:
            reformatted = True
        else:
            failed.append((check.description, error))

    if reformatted:
        print("\n⚠️  Some files were reformatted.")
        print("Please review and stage the changes.")
        return 1

    if failed:
        print("\n❌ Some checks failed:")
        for description, error in failed:
            print(f"\n{description}:")
            if error:
                print(error)
        return 1

    print("\n✨ All checks passed successfully! ✨")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
