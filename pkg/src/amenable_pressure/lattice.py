"""Finite-subset combinatorics of the lattice group Z^d.

The group is written additively: the right translate ``Fg`` of a finite set
becomes ``F + g``. Følner sets are the boxes ``[0, n)^d``, which are tiles
of the lattice, so tiling centers can be chosen on the grid ``tZ^d``.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, List, NamedTuple, Sequence, Tuple

from amenable_pressure.exceptions import (
    DimensionMismatchError,
    InputError,
    InvariantViolation,
)
from amenable_pressure.types import GroupElement

logger = logging.getLogger(__name__)

__all__ = [
    "FiniteSubset",
    "FolnerBoxSequence",
    "Tiling",
    "box",
    "folner_box",
    "interior_core",
    "invariance_defect",
    "tile_centers",
]


def _add(a: GroupElement, b: GroupElement) -> GroupElement:
    return tuple(x + y for x, y in zip(a, b))


def _sub(a: GroupElement, b: GroupElement) -> GroupElement:
    return tuple(x - y for x, y in zip(a, b))


@dataclass(frozen=True)
class FiniteSubset:
    """A finite set of lattice points of one dimension.

    Points are stored once, in lexicographic order, so that equal sets
    compare and hash equal and every enumeration over a set is
    deterministic. The empty set is representable but most operations
    refuse it.
    """

    dimension: int
    points: Tuple[GroupElement, ...]

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InputError(
                f"dimension must be >= 1, got {self.dimension}",
                field="dimension",
            )
        canonical = tuple(sorted(set(self.points)))
        for point in canonical:
            if len(point) != self.dimension:
                raise DimensionMismatchError(
                    f"point {point} does not have dimension {self.dimension}"
                )
        object.__setattr__(self, "points", canonical)

    @classmethod
    def of(
        cls,
        points: Iterable[Sequence[int] | int],
        dimension: int | None = None,
    ) -> "FiniteSubset":
        """Build a subset from any iterable of points.

        Bare integers are accepted as one-dimensional points.

        Args:
            points: Lattice points
            dimension: Ambient dimension; inferred from the first point
                when omitted

        Returns:
            FiniteSubset: The canonical subset
        """
        normalized: List[GroupElement] = []
        for point in points:
            if isinstance(point, int):
                normalized.append((point,))
            else:
                normalized.append(tuple(int(c) for c in point))
        if dimension is None:
            if not normalized:
                raise InputError("cannot infer the dimension of an empty set")
            dimension = len(normalized[0])
        return cls(dimension, tuple(normalized))

    @classmethod
    def empty(cls, dimension: int) -> "FiniteSubset":
        """The empty subset of Z^dimension."""
        return cls(dimension, ())

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[GroupElement]:
        return iter(self.points)

    def __contains__(self, point: object) -> bool:
        return point in self._point_set

    @property
    def _point_set(self) -> frozenset[GroupElement]:
        cached = self.__dict__.get("_cached_point_set")
        if cached is None:
            cached = frozenset(self.points)
            object.__setattr__(self, "_cached_point_set", cached)
        return cached

    @property
    def is_empty(self) -> bool:
        return not self.points

    def check_dimension(self, other: "FiniteSubset") -> None:
        """Raise unless ``other`` lives in the same lattice."""
        if other.dimension != self.dimension:
            raise DimensionMismatchError(
                f"dimension {self.dimension} vs {other.dimension}"
            )

    def translate(self, g: GroupElement) -> "FiniteSubset":
        """Return ``F + g``."""
        if len(g) != self.dimension:
            raise DimensionMismatchError(
                f"translate {g} does not have dimension {self.dimension}"
            )
        return FiniteSubset(
            self.dimension, tuple(_add(p, g) for p in self.points)
        )

    def union(self, other: "FiniteSubset") -> "FiniteSubset":
        self.check_dimension(other)
        return FiniteSubset(self.dimension, self.points + other.points)

    def intersection(self, other: "FiniteSubset") -> "FiniteSubset":
        self.check_dimension(other)
        return FiniteSubset(
            self.dimension, tuple(p for p in self.points if p in other)
        )

    def difference(self, other: "FiniteSubset") -> "FiniteSubset":
        self.check_dimension(other)
        return FiniteSubset(
            self.dimension, tuple(p for p in self.points if p not in other)
        )

    def symmetric_difference(self, other: "FiniteSubset") -> "FiniteSubset":
        return self.difference(other).union(other.difference(self))

    __or__ = union
    __and__ = intersection
    __sub__ = difference
    __xor__ = symmetric_difference

    def issubset(self, other: "FiniteSubset") -> bool:
        self.check_dimension(other)
        return all(p in other for p in self.points)

    def minkowski_sum(self, other: "FiniteSubset") -> "FiniteSubset":
        """Return ``{a + b : a in self, b in other}``."""
        self.check_dimension(other)
        return FiniteSubset(
            self.dimension,
            tuple(
                _add(a, b)
                for a, b in itertools.product(self.points, other.points)
            ),
        )

    def corner(self) -> GroupElement:
        """Coordinate-wise minimum of the points."""
        if self.is_empty:
            raise InputError("the empty set has no corner")
        return tuple(min(c) for c in zip(*self.points))

    def canonical(self) -> "FiniteSubset":
        """The translate whose minimal corner sits at the origin.

        Two subsets are translates of each other exactly when their
        canonical forms coincide.
        """
        if self.is_empty:
            return self
        corner = self.corner()
        return self.translate(tuple(-c for c in corner))

    def bounding_box(self) -> Tuple[GroupElement, GroupElement]:
        """Inclusive lower and upper corners."""
        if self.is_empty:
            raise InputError("the empty set has no bounding box")
        return (
            tuple(min(c) for c in zip(*self.points)),
            tuple(max(c) for c in zip(*self.points)),
        )

    def is_box(self) -> bool:
        """True if the set is a full axis-aligned box."""
        if self.is_empty:
            return False
        lo, hi = self.bounding_box()
        return len(self) == math.prod(h - l + 1 for l, h in zip(lo, hi))

    def to_json(self) -> List[List[int]]:
        return [list(p) for p in self.points]


def box(lo: GroupElement, hi: GroupElement) -> FiniteSubset:
    """The box ``[lo, hi)`` (upper bound exclusive in every coordinate)."""
    if len(lo) != len(hi):
        raise DimensionMismatchError(f"corners {lo} and {hi} differ")
    ranges = [range(a, b) for a, b in zip(lo, hi)]
    return FiniteSubset(len(lo), tuple(itertools.product(*ranges)))


def folner_box(d: int, n: int) -> FiniteSubset:
    """Return the Følner box ``[0, n)^d`` with ``n**d`` points.

    Args:
        d: Dimension, at least 1
        n: Side length, at least 1

    Returns:
        FiniteSubset: The box
    """
    if d < 1:
        raise InputError(f"dimension must be >= 1, got {d}", field="d")
    if n < 1:
        raise InputError(f"side must be >= 1, got {n}", field="n")
    return box((0,) * d, (n,) * d)


def invariance_defect(F: FiniteSubset, K: FiniteSubset) -> float:
    """Return ``|KF Δ F| / |F|`` where ``KF = {k + f}``."""
    if F.is_empty or K.is_empty:
        raise InputError("invariance defect needs non-empty F and K")
    F.check_dimension(K)
    KF = K.minkowski_sum(F)
    return len(KF ^ F) / len(F)


@dataclass(frozen=True)
class FolnerBoxSequence:
    """Boxes ``[0, n)^d`` for strictly increasing side lengths."""

    dimension: int
    sides: Tuple[int, ...]

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InputError("dimension must be >= 1", field="dimension")
        if not self.sides or self.sides[0] < 1:
            raise InputError("sides must be positive", field="sides")
        if any(b <= a for a, b in zip(self.sides, self.sides[1:])):
            raise InputError(
                "sides must be strictly increasing", field="sides"
            )

    @classmethod
    def up_to(
        cls, dimension: int, n_max: int, n_min: int = 1
    ) -> "FolnerBoxSequence":
        if n_max < n_min:
            raise InputError(
                f"n_max={n_max} is below n_min={n_min}", field="n_max"
            )
        return cls(dimension, tuple(range(n_min, n_max + 1)))

    def __len__(self) -> int:
        return len(self.sides)

    def __iter__(self) -> Iterator[Tuple[int, FiniteSubset]]:
        for n in self.sides:
            yield n, folner_box(self.dimension, n)


class Tiling(NamedTuple):
    """Tiling centers ``C`` of a box relative to a box tile ``T``."""

    centers: FiniteSubset
    covering: FiniteSubset
    ratio: float


def tile_centers(F_n: FiniteSubset, T: FiniteSubset) -> Tiling:
    """Cover a box by disjoint grid translates of a box tile.

    Centers are taken on the grid ``tZ^d`` so that every translate
    ``T + c`` meets ``F_n``.

    Args:
        F_n: An axis-aligned box
        T: The tile ``[0, t)^d``

    Returns:
        Tiling: Centers, the union ``TC`` and the ratio ``|TC| / |F_n|``
    """
    F_n.check_dimension(T)
    d = T.dimension
    if T.is_empty or not T.is_box() or T.corner() != (0,) * d:
        raise InputError("tile must be a box [0, t)^d", field="T")
    lo_t, hi_t = T.bounding_box()
    t = hi_t[0] + 1
    if any(h + 1 != t for h in hi_t):
        raise InputError("tile must be a cube [0, t)^d", field="T")
    if not F_n.is_box():
        raise InputError("F_n must be an axis-aligned box", field="F_n")

    lo, hi = F_n.bounding_box()
    axes = []
    for a, b in zip(lo, hi):
        start = (a // t) * t
        axes.append(range(start, b + 1, t))
    centers = FiniteSubset(d, tuple(itertools.product(*axes)))
    covering_lo = tuple(ax[0] for ax in axes)
    covering_hi = tuple(ax[-1] + t for ax in axes)
    covering = box(covering_lo, covering_hi)

    if len(centers) * len(T) != len(covering):
        raise InvariantViolation("tile translates are not disjoint")
    if not F_n.issubset(covering):
        raise InvariantViolation("tile translates do not cover F_n")
    for c in centers:
        if (T.translate(c) & F_n).is_empty:
            raise InvariantViolation(f"translate at {c} misses F_n")

    ratio = len(covering) / len(F_n)
    logger.debug(
        "Tiled %d points with %d centers, ratio %.6f",
        len(F_n),
        len(centers),
        ratio,
    )
    return Tiling(centers, covering, ratio)


def interior_core(F: FiniteSubset, B: FiniteSubset) -> FiniteSubset:
    """Return ``{g : g - b in F for every b in B}``.

    This is the set of translates ``B`` may be placed at (reflected) while
    staying inside ``F``; it is contained in ``F`` whenever ``0 in B``.
    """
    if F.is_empty or B.is_empty:
        raise InputError("interior core needs non-empty F and B")
    F.check_dimension(B)
    anchor = B.points[0]
    candidates = F.translate(anchor)
    return FiniteSubset(
        F.dimension,
        tuple(
            g
            for g in candidates
            if all(_sub(g, b) in F for b in B.points)
        ),
    )
