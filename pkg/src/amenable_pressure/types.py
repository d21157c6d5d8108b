"""Type definitions shared across the toolkit."""

from typing import (
    TYPE_CHECKING,
    Any,
    Dict,
    List,
    Mapping,
    Optional,
    Protocol,
    Sequence,
    Tuple,
    TypedDict,
    Union,
    runtime_checkable,
)

from typing_extensions import NotRequired

if TYPE_CHECKING:
    from amenable_pressure.lattice import FiniteSubset

GroupElement = Tuple[int, ...]
Pattern = Tuple[int, ...]
Configuration = Mapping[GroupElement, int]

# Values written to CSV cells
Cell = Union[int, float, str, bool, None]


class Evaluator(Protocol):
    """A real-valued function on finite subsets of the lattice."""

    def __call__(self, subset: "FiniteSubset") -> float:
        """Evaluate the function on a subset."""
        ...


@runtime_checkable
class ConvergenceReport(Protocol):
    """Anything that can be written as a convergence table."""

    def table_columns(self) -> Sequence[str]:
        """Column names in output order."""
        ...

    def table_rows(self) -> List[Sequence[Cell]]:
        """Rows aligned with ``table_columns``."""
        ...


class PropertyRecord(TypedDict):
    """Outcome of one sampled set-function property check."""

    property: str
    verdict: str
    seed: int
    samples: int
    witness: NotRequired[Dict[str, Any]]


class ConditionRecord(TypedDict):
    """Outcome of one sampled potential condition check."""

    condition: str
    verdict: str
    seed: int
    samples: int
    empirical: Optional[float]
    bound: Optional[float]
    reference_bound: NotRequired[Optional[float]]
    witness: NotRequired[Dict[str, Any]]


class PressureRow(TypedDict):
    """One box of a pressure convergence table."""

    n: int
    box_size: int
    log_p: float
    normalized: float
    increment: Optional[float]
    certified: bool


class EntropyRow(TypedDict):
    """One box of an entropy-rate convergence table."""

    n: int
    box_size: int
    entropy: float
    normalized: float
    increment: Optional[float]
    inf_to_date: float


class ForbiddenJSON(TypedDict):
    """A forbidden pattern as written in a system file."""

    window: List[Any]
    pattern: List[int]


class CoverJSON(TypedDict):
    """A cover as written in a system file."""

    window: List[Any]
    elements: List[List[List[int]]]


class PotentialJSON(TypedDict, total=False):
    """A potential as written in a system file."""

    kind: str
    window: List[Any]
    table: List[float]
    matrices: List[List[List[float]]]
    offset: float


class MeasureJSON(TypedDict, total=False):
    """An invariant measure as written in a system file."""

    kind: str
    p: List[float]
    P: List[List[float]]
    pi: List[float]


class SystemJSON(TypedDict, total=False):
    """Top level of a system-description file."""

    dimension: int
    alphabet: int
    forbidden: List[ForbiddenJSON]
    covers: Dict[str, CoverJSON]
    potential: PotentialJSON
    measures: Dict[str, MeasureJSON]
