"""Set functions on finite subsets of the lattice.

A ``SetFunction`` wraps an evaluator together with the properties it is
declared to have. Declarations are never trusted blindly: they can be
checked by randomized counterexample search with ``check_properties``.
"""

import logging
import math
import threading
from dataclasses import dataclass
from enum import Enum
from typing import (
    Any,
    Dict,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np
from scipy.special import entr, logsumexp, softmax

from amenable_pressure.exceptions import (
    EvaluationError,
    InputError,
    InvariantViolation,
    PropertyDeclarationError,
)
from amenable_pressure.lattice import (
    FiniteSubset,
    FolnerBoxSequence,
    interior_core,
)
from amenable_pressure.types import Cell, Evaluator, PropertyRecord

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9


class Property(str, Enum):
    """Properties a set function may be declared to have."""

    MONOTONE = "monotone"
    NONNEGATIVE = "nonnegative"
    INVARIANT = "invariant"
    SUBADDITIVE = "subadditive"
    STRONGLY_SUBADDITIVE = "strongly_subadditive"


OW_REQUIRED = (
    Property.MONOTONE,
    Property.NONNEGATIVE,
    Property.INVARIANT,
    Property.SUBADDITIVE,
)


class SetFunction:
    """A real-valued function on finite subsets with a memo table.

    The value on the empty set is 0 by convention and the evaluator is
    never called for it. When the function is declared invariant the memo
    key is the canonical translate, so all translates share one entry.

    Thread Safety:
        - The memo table is guarded by a lock
        - Concurrent evaluations of the same set may both run; the
          second insert stores an equal value
    """

    def __init__(
        self,
        evaluator: Evaluator,
        properties: Iterable[Property | str] = (),
        name: str = "f",
    ) -> None:
        """Initialize the set function.

        Args:
            evaluator: Pure function of a FiniteSubset
            properties: Declared properties
            name: Label used in reports
        """
        self.evaluator = evaluator
        self.properties = frozenset(Property(p) for p in properties)
        self.name = name
        self._cache: Dict[FiniteSubset, float] = {}
        self._lock = threading.Lock()

    def declares(self, prop: Property) -> bool:
        return prop in self.properties

    @property
    def cache_size(self) -> int:
        with self._lock:
            return len(self._cache)

    def _key(self, subset: FiniteSubset) -> FiniteSubset:
        if self.declares(Property.INVARIANT):
            return subset.canonical()
        return subset

    def evaluate_uncached(self, subset: FiniteSubset) -> float:
        """Call the evaluator directly, bypassing the memo table."""
        if subset.is_empty:
            return 0.0
        try:
            return float(self.evaluator(subset))
        except Exception as e:
            raise EvaluationError(
                f"{self.name} failed on {subset.to_json()}: {e}",
                subset=subset,
            ) from e

    def __call__(self, subset: FiniteSubset) -> float:
        if subset.is_empty:
            return 0.0
        key = self._key(subset)
        with self._lock:
            cached = self._cache.get(key)
        if cached is not None:
            return cached
        value = self.evaluate_uncached(key)
        with self._lock:
            self._cache.setdefault(key, value)
        return value

    @classmethod
    def cardinality(cls, weight: float = 1.0) -> "SetFunction":
        """The modular function ``F -> weight * |F|``."""
        props = [
            Property.INVARIANT,
            Property.SUBADDITIVE,
            Property.STRONGLY_SUBADDITIVE,
        ]
        if weight >= 0:
            props += [Property.MONOTONE, Property.NONNEGATIVE]
        return cls(
            lambda subset: weight * len(subset),
            props,
            name=f"{weight:g}*|F|",
        )


def _random_subset(
    rng: np.random.Generator, dimension: int, max_box: int, max_size: int
) -> FiniteSubset:
    size = int(rng.integers(1, max_size + 1))
    coords = rng.integers(0, max_box, size=(size, dimension))
    return FiniteSubset(
        dimension, tuple(tuple(int(c) for c in row) for row in coords)
    )


def _exceeds(lhs: float, rhs: float) -> bool:
    return lhs > rhs + TOLERANCE * max(1.0, abs(rhs))


def _witness(**sets: Any) -> Dict[str, Any]:
    return {
        k: v.to_json() if isinstance(v, FiniteSubset) else v
        for k, v in sets.items()
    }


def check_properties(
    f: SetFunction,
    dimension: int,
    sample_count: int,
    max_box: int,
    seed: int,
    max_size: int = 6,
    properties: Optional[Sequence[Property]] = None,
) -> List[PropertyRecord]:
    """Search for counterexamples to set-function properties.

    Pairs are drawn inside ``[0, max_box)^d``. The first pair tried for the
    pair properties is two distinct singletons, so a function failing on
    the smallest instance reports the smallest witness.

    Args:
        f: Function under test
        dimension: Lattice dimension
        sample_count: Random samples per property
        max_box: Side of the sampling box
        seed: Seed for ``numpy.random.default_rng``
        max_size: Largest random subset drawn
        properties: Properties to test; all five by default

    Returns:
        List[PropertyRecord]: One record per property, with a witness on
        failure
    """
    if sample_count < 1:
        raise InputError("must be >= 1", field="sample_count")
    if max_box < 2:
        raise InputError("must be >= 2", field="max_box")
    rng = np.random.default_rng(seed)
    origin = (0,) * dimension
    unit = (1,) + (0,) * (dimension - 1)
    first_pair = (
        FiniteSubset(dimension, (origin,)),
        FiniteSubset(dimension, (unit,)),
    )
    records: List[PropertyRecord] = []

    for prop in properties or list(Property):
        witness: Optional[Dict[str, Any]] = None
        for i in range(sample_count):
            if i == 0:
                E, F = first_pair
            else:
                E = _random_subset(rng, dimension, max_box, max_size)
                F = _random_subset(rng, dimension, max_box, max_size)

            if prop is Property.MONOTONE:
                sub = E & F if not (E & F).is_empty else E
                sup = sub | F
                lhs, rhs = f(sub), f(sup)
                if _exceeds(lhs, rhs):
                    witness = _witness(E=sub, F=sup, lhs=lhs, rhs=rhs)
            elif prop is Property.NONNEGATIVE:
                value = f(F)
                if value < -TOLERANCE:
                    witness = _witness(F=F, value=value)
            elif prop is Property.INVARIANT:
                offset = rng.integers(-max_box, max_box + 1, size=dimension)
                g = tuple(int(c) for c in offset)
                a = f.evaluate_uncached(F)
                b = f.evaluate_uncached(F.translate(g))
                if abs(a - b) > TOLERANCE * max(1.0, abs(a)):
                    witness = _witness(F=F, g=list(g), lhs=b, rhs=a)
            elif prop is Property.SUBADDITIVE:
                lhs = f(E | F)
                rhs = f(E) + f(F)
                if _exceeds(lhs, rhs):
                    witness = _witness(E=E, F=F, lhs=lhs, rhs=rhs)
            else:
                lhs = f(E | F) + f(E & F)
                rhs = f(E) + f(F)
                if _exceeds(lhs, rhs):
                    witness = _witness(E=E, F=F, lhs=lhs, rhs=rhs)
            if witness is not None:
                break

        record: PropertyRecord = {
            "property": prop.value,
            "verdict": "pass" if witness is None else "fail",
            "seed": seed,
            "samples": sample_count,
        }
        if witness is not None:
            record["witness"] = witness
            logger.info("%s is not %s: %s", f.name, prop.value, witness)
        records.append(record)
    return records


@dataclass
class OwEstimate:
    """Normalized values ``f(F_n)/|F_n|`` along boxes.

    ``increment_estimate`` is only set in dimension 1, where it is the
    last difference quotient ``(f(F_n) - f(F_{n-1}))``.
    """

    dimension: int
    samples: List[Tuple[int, float]]
    values: List[float]
    increments: List[Optional[float]]
    limit_estimate: float
    inf_estimate: float
    gap: float
    increment_estimate: Optional[float] = None

    def table_columns(self) -> Sequence[str]:
        return (
            "n",
            "box_size",
            "value",
            "normalized",
            "increment",
            "inf_to_date",
        )

    def table_rows(self) -> List[Sequence[Cell]]:
        rows: List[Sequence[Cell]] = []
        running = math.inf
        for (n, normalized), value, inc in zip(
            self.samples, self.values, self.increments
        ):
            running = min(running, normalized)
            rows.append(
                (n, n**self.dimension, value, normalized, inc, running)
            )
        return rows


def ow_limit(
    f: SetFunction, d: int, n_max: int, n_min: int = 1
) -> OwEstimate:
    """Estimate ``lim f(F_n)/|F_n|`` along the boxes ``[0, n)^d``.

    Args:
        f: Declared monotone, nonnegative, invariant and subadditive
        d: Lattice dimension
        n_max: Largest box side
        n_min: Smallest box side

    Returns:
        OwEstimate: Raw normalized values with the last value, the
        infimum to date and their gap
    """
    missing = [p.value for p in OW_REQUIRED if not f.declares(p)]
    if missing:
        raise PropertyDeclarationError(
            f"{f.name} is not declared {', '.join(missing)}",
            field="properties",
        )
    samples: List[Tuple[int, float]] = []
    values: List[float] = []
    increments: List[Optional[float]] = []
    previous: Optional[Tuple[int, float]] = None
    for n, box in FolnerBoxSequence.up_to(d, n_max, n_min):
        value = f(box)
        samples.append((n, value / len(box)))
        values.append(value)
        if d == 1 and previous is not None:
            increments.append(
                (value - previous[1]) / (len(box) - previous[0])
            )
        else:
            increments.append(None)
        previous = (len(box), value)
        logger.debug("n=%d f/|F|=%.12g", n, samples[-1][1])

    normalized = [s[1] for s in samples]
    limit = normalized[-1]
    inf = min(normalized)
    gap = limit - inf
    if f.declares(Property.STRONGLY_SUBADDITIVE) and gap < -TOLERANCE:
        raise InvariantViolation(
            f"limit estimate {limit} is below the infimum {inf}"
        )
    return OwEstimate(
        dimension=d,
        samples=samples,
        values=values,
        increments=increments,
        limit_estimate=limit,
        inf_estimate=inf,
        gap=gap,
        increment_estimate=increments[-1] if d == 1 else None,
    )


class CoveringCheck(NamedTuple):
    """Both sides of ``f(E) <= (1/m) sum f(E_i)``."""

    passed: bool
    slack: float
    lhs: float
    rhs: float


def covering_inequality_check(
    f: SetFunction,
    E: FiniteSubset,
    parts: Sequence[FiniteSubset],
    m: int,
) -> CoveringCheck:
    """Check the fractional covering inequality for ``f``.

    The parts must cover every point of ``E`` exactly ``m`` times and
    nothing outside ``E``.
    """
    if m < 1:
        raise InputError("must be >= 1", field="m")
    if not parts:
        raise InputError("no parts given", field="parts")
    counts: Dict[Tuple[int, ...], int] = {}
    for part in parts:
        E.check_dimension(part)
        for point in part:
            counts[point] = counts.get(point, 0) + 1
    for point in set(counts) | set(E.points):
        expected = m if point in E else 0
        if counts.get(point, 0) != expected:
            raise InputError(
                f"point {list(point)} is covered {counts.get(point, 0)} "
                f"times, expected {expected}",
                field="parts",
            )
    lhs = f(E)
    rhs = math.fsum(f(part) for part in parts) / m
    return CoveringCheck(not _exceeds(lhs, rhs), rhs - lhs, lhs, rhs)


class BlockBound(NamedTuple):
    """Both sides of the block decomposition bound."""

    passed: bool
    lhs: float
    rhs: float
    boundary: int


def block_bound(
    f: SetFunction, F: FiniteSubset, B: FiniteSubset, K_bound: float
) -> BlockBound:
    """Compare ``f(F)`` with its average over translates of ``B``.

    The right side is ``sum_{g in F} f(B + g)/|B| + K |F minus A_{F,B}|``.
    """
    core = interior_core(F, B)
    boundary = len(F - core)
    lhs = f(F)
    rhs = (
        math.fsum(f(B.translate(g)) for g in F) / len(B)
        + K_bound * boundary
    )
    return BlockBound(not _exceeds(lhs, rhs), lhs, rhs, boundary)


def gibbs_distribution(a: Sequence[float] | np.ndarray) -> np.ndarray:
    """Return ``e^{a_i} / sum_j e^{a_j}``."""
    weights = np.asarray(a, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        raise InputError("expected a non-empty vector", field="a")
    if not np.all(np.isfinite(weights)):
        raise InputError("weights must be finite", field="a")
    return np.asarray(softmax(weights), dtype=float)


class GibbsCheck(NamedTuple):
    """Both sides of the Gibbs inequality and the equality flag."""

    lhs: float
    rhs: float
    equality: bool


def gibbs_inequality(
    a: Sequence[float] | np.ndarray,
    p: Sequence[float] | np.ndarray,
    tolerance: float = 1e-12,
) -> GibbsCheck:
    """Evaluate ``sum p_i (a_i - log p_i) <= log sum e^{a_i}``.

    Both sides are computed relative to ``max(a)``.

    Args:
        a: Finite weights
        p: Probability vector of the same length
        tolerance: Absolute tolerance of the equality flag

    Returns:
        GibbsCheck: Left side, right side and whether ``p`` is the Gibbs
        vector of ``a``
    """
    weights = np.asarray(a, dtype=float)
    probs = np.asarray(p, dtype=float)
    gibbs = gibbs_distribution(weights)
    if probs.shape != weights.shape:
        raise InputError(
            f"length {probs.size} differs from {weights.size}", field="p"
        )
    if np.any(probs < 0):
        raise InputError("negative probability", field="p")
    if abs(math.fsum(probs) - 1.0) > 1e-9:
        raise InputError(
            f"probabilities sum to {math.fsum(probs)}", field="p"
        )
    top = float(weights.max())
    shifted = np.where(probs > 0, weights - top, 0.0)
    lhs = top + math.fsum(probs * shifted) + math.fsum(entr(probs))
    rhs = float(logsumexp(weights))
    if _exceeds(lhs, rhs):
        raise InvariantViolation(f"Gibbs inequality fails: {lhs} > {rhs}")
    equality = bool(np.allclose(probs, gibbs, rtol=0.0, atol=tolerance))
    return GibbsCheck(lhs, rhs, equality)

