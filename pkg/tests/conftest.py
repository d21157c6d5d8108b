"""Common test fixtures and configuration."""

import json
import math
from pathlib import Path
from typing import Any, Callable, Dict, Generator

import pytest

from amenable_pressure.lattice import FiniteSubset
from amenable_pressure.measures import InvariantMeasure
from amenable_pressure.potentials import Potential
from amenable_pressure.symbolic import ClopenSet, Cover, ShiftSpace

LOG3 = math.log(3.0)
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@pytest.fixture
def temp_dir(tmp_path: Path) -> Generator[Path, None, None]:
    """Create a temporary directory for tests.

    Args:
        tmp_path: pytest's temporary directory fixture

    Returns:
        Path: Path to temporary directory
    """
    yield tmp_path


@pytest.fixture
def output_root(
    temp_dir: Path, monkeypatch: pytest.MonkeyPatch
) -> Generator[Path, None, None]:
    """Point the default output directory at a temporary directory."""
    out = temp_dir / "out"
    monkeypatch.setenv("AMENABLE_PRESSURE_OUT", str(out))
    yield out


@pytest.fixture
def full_two_shift() -> ShiftSpace:
    return ShiftSpace.full_shift(1, 2)


@pytest.fixture
def full_three_shift() -> ShiftSpace:
    return ShiftSpace.full_shift(1, 3)


@pytest.fixture
def golden_mean() -> ShiftSpace:
    return ShiftSpace.golden_mean()


@pytest.fixture
def gibbs_potential(full_two_shift: ShiftSpace) -> Potential:
    """The single-site potential with weights ``(log 3, 0)``."""
    return Potential.site(full_two_shift, [LOG3, 0.0])


@pytest.fixture
def overlapping_cover(full_three_shift: ShiftSpace) -> Cover:
    """The cover ``{x_0 in {0, 1}}, {x_0 in {1, 2}}``."""
    origin = FiniteSubset.of([0])
    return Cover(
        full_three_shift,
        origin,
        (
            ClopenSet.from_symbol_sets(full_three_shift, origin, [[0, 1]]),
            ClopenSet.from_symbol_sets(full_three_shift, origin, [[1, 2]]),
        ),
    )


@pytest.fixture
def parry_markov() -> InvariantMeasure:
    return InvariantMeasure.markov(
        [[1.0 / GOLDEN, 1.0 / GOLDEN**2], [1.0, 0.0]]
    )


@pytest.fixture
def write_system(
    temp_dir: Path,
) -> Callable[..., Path]:
    """Write a system document to a file and return its path."""

    def write(data: Dict[str, Any], name: str = "system.json") -> Path:
        path = temp_dir / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return write
