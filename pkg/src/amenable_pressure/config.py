"""Budgets and environment configuration.

Every exponential computation in the toolkit is guarded by one of the
budgets below. Defaults are part of the public interface and stay stable
across releases; override them per job through ``Budgets(...)`` or
``dataclasses.replace``.
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path

from amenable_pressure.exceptions import InputError

logger = logging.getLogger(__name__)

OUTPUT_ENV_VAR = "AMENABLE_PRESSURE_OUT"
DEFAULT_OUTPUT_DIR = "pressure-out"


@dataclass(frozen=True)
class Budgets:
    """Resource caps for enumerations and searches.

    Attributes:
        pattern_budget: Locally admissible patterns enumerated per window
        join_budget: Pattern/element incidences materialised by a join
        exact_atom_cap: Atoms admitted to exact assignment search
        exact_cover_cap: Cover elements admitted to exact search
        node_budget: Branch-and-bound nodes before giving up on optimality
        entropy_atom_cap: Atoms admitted to exact cover entropy
        entropy_element_cap: Cover elements admitted to exact cover entropy
        matrix_distinct_cap: Distinct matrices in a product search
        matrix_front_cap: Pareto front size in a product search
        u_star_cap: Partitions enumerated from the assignments of a cover
        monte_carlo_samples: Samples when exact expectations are too large
    """

    pattern_budget: int = 2**20
    join_budget: int = 2**20
    exact_atom_cap: int = 2**12
    exact_cover_cap: int = 16
    node_budget: int = 200_000
    entropy_atom_cap: int = 24
    entropy_element_cap: int = 8
    matrix_distinct_cap: int = 8
    matrix_front_cap: int = 4096
    u_star_cap: int = 4096
    monte_carlo_samples: int = 20_000

    def __post_init__(self) -> None:
        for name, value in vars(self).items():
            if not isinstance(value, int) or value < 1:
                raise InputError(
                    f"must be a positive integer, got {value!r}",
                    field=f"budgets.{name}",
                )


DEFAULT_BUDGETS = Budgets()


def get_output_root(explicit: str | None = None) -> Path:
    """Resolve the output directory for artifacts.

    Args:
        explicit: Directory given on the command line, if any

    Returns:
        Path: Explicit directory, else ``$AMENABLE_PRESSURE_OUT``, else
        ``./pressure-out``
    """
    if explicit:
        return Path(explicit)
    from_env = os.environ.get(OUTPUT_ENV_VAR)
    if from_env:
        logger.debug("Using output directory from %s", OUTPUT_ENV_VAR)
        return Path(from_env)
    return Path.cwd() / DEFAULT_OUTPUT_DIR
