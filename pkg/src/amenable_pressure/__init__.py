"""Cover-relative topological pressure for symbolic systems over Z^d."""

from amenable_pressure.config import DEFAULT_BUDGETS, Budgets
from amenable_pressure.lattice import FiniteSubset, FolnerBoxSequence
from amenable_pressure.measures import InvariantMeasure
from amenable_pressure.potentials import Potential
from amenable_pressure.pressure import pressure_limit, topological_entropy
from amenable_pressure.runner import JobSpec, run
from amenable_pressure.symbolic import Cover, ShiftSpace
from amenable_pressure.system import load_system

__all__ = [
    "Budgets",
    "Cover",
    "DEFAULT_BUDGETS",
    "FiniteSubset",
    "FolnerBoxSequence",
    "InvariantMeasure",
    "JobSpec",
    "Potential",
    "ShiftSpace",
    "load_system",
    "pressure_limit",
    "run",
    "topological_entropy",
]
