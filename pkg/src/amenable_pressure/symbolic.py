"""Shift spaces over Z^d, clopen sets and covers.

Configurations are maps ``Z^d -> {0, ..., k-1}`` and the group acts by
``(g.x)(h) = x(h + g)``. Clopen sets, covers and partitions are finite
lists of patterns on a window. Every enumeration runs over locally
admissible patterns (no forbidden pattern occurs inside the window) in
lexicographic order of the window's sorted points.
"""

import functools
import itertools
import logging
import math
from dataclasses import dataclass
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
)

import numpy as np

from amenable_pressure.config import DEFAULT_BUDGETS, Budgets
from amenable_pressure.exceptions import (
    BudgetExceededError,
    DimensionMismatchError,
    InputError,
)
from amenable_pressure.lattice import FiniteSubset, folner_box
from amenable_pressure.types import GroupElement, Pattern

logger = logging.getLogger(__name__)

MAX_ALPHABET = 255
MAX_COVER_BITS = 62


def encode(arr: np.ndarray, k: int) -> np.ndarray:
    """Base-``k`` integer code of every row of a pattern array."""
    width = arr.shape[1]
    if width == 0:
        return np.zeros(len(arr), dtype=np.int64)
    if width * math.log2(max(k, 2)) > 62:
        raise BudgetExceededError(
            f"patterns of width {width} over {k} symbols do not fit a code"
        )
    powers = k ** np.arange(width - 1, -1, -1, dtype=np.int64)
    return arr.astype(np.int64) @ powers


def encode_patterns(patterns: Iterable[Pattern], k: int) -> np.ndarray:
    rows = sorted(patterns)
    if not rows:
        return np.zeros(0, dtype=np.int64)
    width = len(rows[0])
    return encode(np.array(rows, dtype=np.int64).reshape(len(rows), width), k)


def column_index(domain: FiniteSubset, window: FiniteSubset) -> np.ndarray:
    """Positions of the points of ``window`` inside ``domain``."""
    positions = {p: i for i, p in enumerate(domain.points)}
    try:
        return np.array(
            [positions[p] for p in window.points], dtype=np.intp
        )
    except KeyError as e:
        raise InputError(
            f"point {list(e.args[0])} lies outside the pattern domain"
        ) from e


@dataclass(frozen=True)
class ForbiddenPattern:
    """A pattern that may not occur anywhere in a configuration."""

    window: FiniteSubset
    pattern: Pattern

    def __post_init__(self) -> None:
        if self.window.is_empty:
            raise InputError("forbidden window is empty", field="window")
        if len(self.pattern) != len(self.window):
            raise InputError(
                f"pattern has {len(self.pattern)} symbols for "
                f"{len(self.window)} sites",
                field="pattern",
            )
        object.__setattr__(
            self, "pattern", tuple(int(s) for s in self.pattern)
        )
        object.__setattr__(self, "window", self.window.canonical())


@dataclass(frozen=True)
class ShiftSpace:
    """A full shift or a shift of finite type over ``Z^d``.

    Attributes:
        dimension: Lattice dimension d
        alphabet_size: Number of symbols k
        forbidden: Forbidden patterns; empty for the full shift
    """

    dimension: int
    alphabet_size: int
    forbidden: Tuple[ForbiddenPattern, ...] = ()

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise InputError("must be >= 1", field="dimension")
        if not 1 <= self.alphabet_size <= MAX_ALPHABET:
            raise InputError(
                f"must be in [1, {MAX_ALPHABET}]", field="alphabet"
            )
        object.__setattr__(self, "forbidden", tuple(self.forbidden))
        for i, fp in enumerate(self.forbidden):
            if fp.window.dimension != self.dimension:
                raise DimensionMismatchError(
                    f"forbidden[{i}] has dimension {fp.window.dimension}"
                )
            if any(not 0 <= s < self.alphabet_size for s in fp.pattern):
                raise InputError(
                    "symbol outside the alphabet",
                    field=f"forbidden[{i}].pattern",
                )

    @classmethod
    def full_shift(cls, dimension: int, alphabet_size: int) -> "ShiftSpace":
        return cls(dimension, alphabet_size)

    @classmethod
    def golden_mean(cls) -> "ShiftSpace":
        """Binary sequences with no two adjacent ones."""
        return cls(
            1, 2, (ForbiddenPattern(FiniteSubset.of([0, 1]), (1, 1)),)
        )

    @property
    def is_full_shift(self) -> bool:
        return not self.forbidden

    def admissible_array(
        self,
        window: FiniteSubset,
        budget: int = DEFAULT_BUDGETS.pattern_budget,
    ) -> np.ndarray:
        """Locally admissible patterns on ``window``, one per row.

        Rows are in lexicographic order and the array is read-only.
        """
        if window.dimension != self.dimension:
            raise DimensionMismatchError(
                f"window has dimension {window.dimension}, "
                f"space has {self.dimension}"
            )
        return _admissible(self, window, budget)

    def count_admissible(
        self,
        window: FiniteSubset,
        budget: int = DEFAULT_BUDGETS.pattern_budget,
    ) -> int:
        return len(self.admissible_array(window, budget))

    def is_admissible(self, window: FiniteSubset, pattern: Pattern) -> bool:
        positions = {p: i for i, p in enumerate(window.points)}
        for fp in self.forbidden:
            anchor = fp.window.points[0]
            for w in window.points:
                h = tuple(a - b for a, b in zip(w, anchor))
                idx = [
                    positions.get(tuple(a + b for a, b in zip(q, h)))
                    for q in fp.window.points
                ]
                if None in idx:
                    continue
                if all(pattern[i] == s for i, s in zip(idx, fp.pattern)):
                    return False
        return True

    def transfer_matrix(self) -> np.ndarray:
        """0/1 matrix of allowed transitions of a nearest-neighbour shift.

        Raises:
            InputError: If the shift is not one-dimensional with forbidden
                windows of at most two adjacent sites
        """
        k = self.alphabet_size
        single = FiniteSubset.of([0])
        pair = FiniteSubset.of([0, 1])
        if self.dimension != 1 or any(
            fp.window not in (single, pair) for fp in self.forbidden
        ):
            raise InputError(
                "transfer matrix needs a one-dimensional nearest-neighbour "
                "shift",
                field="forbidden",
            )
        A = np.ones((k, k))
        for fp in self.forbidden:
            if fp.window == single:
                A[fp.pattern[0], :] = 0.0
                A[:, fp.pattern[0]] = 0.0
            else:
                A[fp.pattern[0], fp.pattern[1]] = 0.0
        return A

    def transfer_entropy(self) -> float:
        """Topological entropy ``log`` of the Perron root."""
        root = float(np.max(np.linalg.eigvals(self.transfer_matrix()).real))
        if root <= 0:
            raise InputError("the shift space is empty", field="forbidden")
        return math.log(root)

    def random_pattern(
        self,
        window: FiniteSubset,
        rng: np.random.Generator,
        budget: int = DEFAULT_BUDGETS.pattern_budget,
    ) -> np.ndarray:
        """A uniformly random admissible pattern on ``window``."""
        if self.is_full_shift:
            return rng.integers(
                0, self.alphabet_size, size=len(window)
            ).astype(np.uint8)
        arr = self.admissible_array(window, budget)
        if len(arr) == 0:
            raise InputError("no admissible pattern on the window")
        return np.array(arr[int(rng.integers(len(arr)))])


def _occurrence_checks(
    space: ShiftSpace, window: FiniteSubset
) -> List[List[Tuple[np.ndarray, np.ndarray]]]:
    # Forbidden occurrences grouped by the last window column they touch.
    positions = {p: i for i, p in enumerate(window.points)}
    checks: List[List[Tuple[np.ndarray, np.ndarray]]] = [
        [] for _ in window.points
    ]
    for fp in space.forbidden:
        anchor = fp.window.points[0]
        for w in window.points:
            h = tuple(a - b for a, b in zip(w, anchor))
            idx = [
                positions.get(tuple(a + b for a, b in zip(q, h)))
                for q in fp.window.points
            ]
            if None in idx:
                continue
            cols = np.array(idx, dtype=np.intp)
            checks[int(cols.max())].append(
                (cols, np.array(fp.pattern, dtype=np.uint8))
            )
    return checks


@functools.lru_cache(maxsize=128)
def _admissible(
    space: ShiftSpace, window: FiniteSubset, budget: int
) -> np.ndarray:
    k = space.alphabet_size
    width = len(window)
    if space.is_full_shift:
        if k**width > budget:
            raise BudgetExceededError(
                f"{k}^{width} patterns exceed the pattern budget {budget}"
            )
        codes = np.arange(k**width, dtype=np.int64)
        powers = k ** np.arange(width - 1, -1, -1, dtype=np.int64)
        arr = ((codes[:, None] // powers) % k).astype(np.uint8)
    else:
        checks = _occurrence_checks(space, window)
        symbols = np.arange(k, dtype=np.uint8)
        arr = np.zeros((1, 0), dtype=np.uint8)
        for j in range(width):
            if len(arr) * k > 4 * budget:
                raise BudgetExceededError(
                    f"pattern enumeration on {width} sites exceeds the "
                    f"pattern budget {budget}"
                )
            arr = np.column_stack(
                [np.repeat(arr, k, axis=0), np.tile(symbols, len(arr))]
            ).astype(np.uint8)
            for cols, pattern in checks[j]:
                arr = arr[~np.all(arr[:, cols] == pattern, axis=1)]
        if len(arr) > budget:
            raise BudgetExceededError(
                f"{len(arr)} patterns exceed the pattern budget {budget}"
            )
    arr.flags.writeable = False
    logger.debug("Enumerated %d patterns on %d sites", len(arr), width)
    return arr


@dataclass(frozen=True)
class ClopenSet:
    """Configurations whose restriction to ``window`` is in ``patterns``.

    Pattern symbols are aligned with the sorted points of the window.
    """

    window: FiniteSubset
    patterns: FrozenSet[Pattern]

    def __post_init__(self) -> None:
        normalized = frozenset(
            tuple(int(s) for s in p) for p in self.patterns
        )
        for p in normalized:
            if len(p) != len(self.window):
                raise InputError(
                    f"pattern {list(p)} does not match a window of "
                    f"{len(self.window)} sites"
                )
        object.__setattr__(self, "patterns", normalized)

    @classmethod
    def whole(cls, dimension: int) -> "ClopenSet":
        """The whole space, as the single empty pattern on no sites."""
        return cls(FiniteSubset.empty(dimension), frozenset({()}))

    @classmethod
    def cylinder(cls, window: FiniteSubset, pattern: Pattern) -> "ClopenSet":
        return cls(window, frozenset({tuple(pattern)}))

    @classmethod
    def from_symbol_sets(
        cls,
        space: ShiftSpace,
        window: FiniteSubset,
        symbol_sets: Sequence[Iterable[int]],
    ) -> "ClopenSet":
        """Product of per-site symbol sets, cut down to admissible patterns.

        Args:
            space: Ambient shift space
            window: Sites, in sorted order
            symbol_sets: One symbol set per site of ``window``

        Returns:
            ClopenSet: The admissible part of the product set
        """
        if len(symbol_sets) != len(window):
            raise InputError(
                f"{len(symbol_sets)} symbol sets for {len(window)} sites"
            )
        allowed = [frozenset(int(s) for s in sites) for sites in symbol_sets]
        arr = space.admissible_array(window)
        keep = np.ones(len(arr), dtype=bool)
        for j, sites in enumerate(allowed):
            keep &= np.isin(arr[:, j], sorted(sites))
        return cls(window, frozenset(map(tuple, arr[keep].tolist())))

    @property
    def is_empty(self) -> bool:
        return not self.patterns

    def __len__(self) -> int:
        return len(self.patterns)

    def translate(self, g: GroupElement) -> "ClopenSet":
        """Shift the window by ``g``; translation keeps the point order."""
        return ClopenSet(self.window.translate(g), self.patterns)

    def codes(self, k: int) -> np.ndarray:
        return encode_patterns(self.patterns, k)

    def mask(
        self, domain: FiniteSubset, arr: np.ndarray, k: int
    ) -> np.ndarray:
        """Rows of ``arr`` (patterns on ``domain``) lying in this set."""
        cols = column_index(domain, self.window)
        return np.isin(encode(arr[:, cols], k), self.codes(k))

    def rewindow(
        self,
        space: ShiftSpace,
        window: FiniteSubset,
        budget: int = DEFAULT_BUDGETS.pattern_budget,
    ) -> "ClopenSet":
        """The same set described on a larger window."""
        if not self.window.issubset(window):
            raise InputError("the new window must contain the old one")
        arr = space.admissible_array(window, budget)
        keep = self.mask(window, arr, space.alphabet_size)
        return ClopenSet(window, frozenset(map(tuple, arr[keep].tolist())))

    def contains(self, configuration: Mapping[GroupElement, int]) -> bool:
        try:
            restricted = tuple(configuration[p] for p in self.window)
        except KeyError as e:
            raise InputError(
                f"configuration is undefined at {list(e.args[0])}"
            ) from e
        return restricted in self.patterns


@dataclass(frozen=True)
class Cover:
    """A finite family of clopen sets on a common window.

    Construction does not enumerate; call ``validate`` to check that the
    elements cover every admissible pattern of the window.
    """

    space: ShiftSpace
    window: FiniteSubset
    elements: Tuple[ClopenSet, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", tuple(self.elements))
        if not self.elements:
            raise InputError("a cover needs at least one element")
        if self.window.dimension != self.space.dimension:
            raise DimensionMismatchError(
                f"cover window has dimension {self.window.dimension}"
            )
        for i, element in enumerate(self.elements):
            if element.window != self.window:
                raise InputError(
                    "element window differs from the cover window",
                    field=f"elements[{i}]",
                )

    def __len__(self) -> int:
        return len(self.elements)

    @functools.cached_property
    def _element_codes(self) -> Tuple[np.ndarray, ...]:
        k = self.space.alphabet_size
        return tuple(e.codes(k) for e in self.elements)

    def membership(
        self,
        domain: FiniteSubset,
        arr: np.ndarray,
        g: Optional[GroupElement] = None,
    ) -> np.ndarray:
        """Boolean matrix: row ``x`` of ``arr`` lies in element ``i``.

        With ``g`` the elements of the pulled-back cover are used instead.
        """
        window = self.window if g is None else self.window.translate(g)
        cols = column_index(domain, window)
        codes = encode(arr[:, cols], self.space.alphabet_size)
        return np.column_stack(
            [np.isin(codes, ec) for ec in self._element_codes]
        ).reshape(len(arr), len(self.elements))

    def bitmasks(
        self,
        domain: FiniteSubset,
        arr: np.ndarray,
        g: Optional[GroupElement] = None,
    ) -> np.ndarray:
        """Membership rows packed into integers, one bit per element."""
        if len(self.elements) > MAX_COVER_BITS:
            raise InputError(
                f"covers are limited to {MAX_COVER_BITS} elements"
            )
        member = self.membership(domain, arr, g).astype(np.int64)
        weights = np.left_shift(
            np.int64(1), np.arange(len(self.elements), dtype=np.int64)
        )
        return np.asarray(member @ weights, dtype=np.int64)

    def validate(self, budget: int = DEFAULT_BUDGETS.pattern_budget) -> None:
        """Raise unless every admissible pattern of the window is covered."""
        arr = self.space.admissible_array(self.window, budget)
        covered = self.membership(self.window, arr).any(axis=1)
        if not covered.all():
            missing = arr[~covered][0].tolist()
            raise InputError(
                f"pattern {missing} on {self.window.to_json()} is not covered"
            )

    def to_partition(self) -> "Partition":
        return Partition(self.space, self.window, self.elements)


@dataclass(frozen=True)
class Partition(Cover):
    """A cover whose elements are pairwise disjoint."""

    def __post_init__(self) -> None:
        super().__post_init__()
        seen: Dict[Pattern, int] = {}
        for i, element in enumerate(self.elements):
            for p in element.patterns:
                if p in seen:
                    raise InputError(
                        f"pattern {list(p)} lies in elements {seen[p]} "
                        f"and {i}",
                        field="elements",
                    )
                seen[p] = i


def standard_partition(space: ShiftSpace) -> Partition:
    """The partition by the symbol at the origin."""
    window = FiniteSubset(space.dimension, ((0,) * space.dimension,))
    symbols = space.admissible_array(window)[:, 0].tolist()
    return Partition(
        space,
        window,
        tuple(ClopenSet.cylinder(window, (s,)) for s in symbols),
    )


def block_partition(space: ShiftSpace, side: int) -> Partition:
    """The partition by the pattern on the box ``[0, side)^d``."""
    window = folner_box(space.dimension, side)
    arr = space.admissible_array(window)
    return Partition(
        space,
        window,
        tuple(ClopenSet.cylinder(window, tuple(row)) for row in arr.tolist()),
    )


def trivial_cover(space: ShiftSpace) -> Partition:
    """The cover ``{X}``."""
    return Partition(
        space,
        FiniteSubset.empty(space.dimension),
        (ClopenSet.whole(space.dimension),),
    )


def pull_back(U: Cover, g: GroupElement) -> Cover:
    """Return ``g^{-1} U``: every window shifted by ``g``.

    ``x`` lies in the pulled-back element iff ``g.x`` lies in the original
    one, since ``(g.x)`` restricted to ``W`` is ``x`` restricted to
    ``W + g``.
    """
    return type(U)(
        U.space,
        U.window.translate(g),
        tuple(e.translate(g) for e in U.elements),
    )


def join_over(
    U: Cover, F: FiniteSubset, budgets: Budgets = DEFAULT_BUDGETS
) -> Cover:
    """Return the join ``U_F`` of the pull-backs of ``U`` by ``F``.

    Elements are indexed by one element of ``U`` per translate, listed in
    lexicographic order of those indices; empty intersections are dropped.

    Raises:
        BudgetExceededError: If the patterns or the pattern/element
            incidences exceed their budgets
    """
    if F.is_empty:
        return trivial_cover(U.space)
    U.window.check_dimension(F)
    domain = U.window.minkowski_sum(F)
    arr = U.space.admissible_array(domain, budgets.pattern_budget)
    member = [U.membership(domain, arr, g) for g in F]
    counts = np.ones(len(arr))
    for m in member:
        counts *= m.sum(axis=1)
    if np.any(counts == 0):
        raise InputError("the cover does not cover every admissible pattern")
    if counts.sum() > budgets.join_budget:
        raise BudgetExceededError(
            f"join over {len(F)} translates has {int(counts.sum())} "
            f"incidences, budget {budgets.join_budget}"
        )

    rows_by_key: Dict[Tuple[int, ...], List[int]] = {}
    for r in range(len(arr)):
        options = [np.flatnonzero(m[r]).tolist() for m in member]
        for key in itertools.product(*options):
            rows_by_key.setdefault(key, []).append(r)

    elements = tuple(
        ClopenSet(domain, frozenset(map(tuple, arr[rows].tolist())))
        for _, rows in sorted(rows_by_key.items())
    )
    logger.debug(
        "Join over %d translates has %d elements", len(F), len(elements)
    )
    return type(U)(U.space, domain, elements)


@dataclass(frozen=True, eq=False)
class GeneratedPartition:
    """The partition generated by a cover.

    ``membership[a, i]`` tells whether atom ``a`` lies in element ``i``.
    """

    partition: Partition
    membership: np.ndarray


def generated_partition(
    V: Cover, budget: int = DEFAULT_BUDGETS.pattern_budget
) -> GeneratedPartition:
    """Group window patterns by the set of cover elements containing them.

    Atoms are listed in the order their first pattern appears.
    """
    arr = V.space.admissible_array(V.window, budget)
    member = V.membership(V.window, arr)
    if not member.any(axis=1).all():
        raise InputError("the cover does not cover every admissible pattern")
    vectors, first, inverse = np.unique(
        member, axis=0, return_index=True, return_inverse=True
    )
    inverse = inverse.reshape(-1)
    order = np.argsort(first, kind="stable")
    atoms = []
    for a in order:
        rows = arr[inverse == a]
        atoms.append(ClopenSet(V.window, frozenset(map(tuple, rows.tolist()))))
    partition = Partition(V.space, V.window, tuple(atoms))
    return GeneratedPartition(partition, vectors[order].astype(bool))


def refines(
    U: Cover, V: Cover, budget: int = DEFAULT_BUDGETS.pattern_budget
) -> bool:
    """True iff every element of ``U`` lies inside some element of ``V``."""
    if U.space != V.space:
        raise InputError("covers live on different shift spaces")
    domain = U.window | V.window
    arr = U.space.admissible_array(domain, budget)
    mu = U.membership(domain, arr)
    mv = V.membership(domain, arr)
    outside = mu[:, :, None] & ~mv[:, None, :]
    contained = ~outside.any(axis=0)
    return bool(contained.any(axis=1).all())


def u_star_partitions(
    V: Cover, cap: int = DEFAULT_BUDGETS.u_star_cap
) -> List[Partition]:
    """Partitions obtained by assigning each generated atom to an element.

    Blocks are unions of the atoms assigned to one element. Duplicate
    partitions are listed once, in the order of first assignment.
    """
    generated = generated_partition(V)
    choices = [np.flatnonzero(row).tolist() for row in generated.membership]
    total = math.prod(len(c) for c in choices)
    if total > cap:
        raise BudgetExceededError(
            f"{total} assignments exceed the partition cap {cap}"
        )
    atoms = generated.partition.elements
    seen = set()
    partitions: List[Partition] = []
    for assignment in itertools.product(*choices):
        blocks: Dict[int, List[int]] = {}
        for atom, element in enumerate(assignment):
            blocks.setdefault(element, []).append(atom)
        key = frozenset(frozenset(b) for b in blocks.values())
        if key in seen:
            continue
        seen.add(key)
        ordered = sorted(blocks.values(), key=min)
        partitions.append(
            Partition(
                V.space,
                V.window,
                tuple(
                    ClopenSet(
                        V.window,
                        frozenset().union(*(atoms[a].patterns for a in b)),
                    )
                    for b in ordered
                ),
            )
        )
    return partitions


@dataclass(frozen=True, eq=False)
class JoinedAtoms:
    """Atoms of the partition generated by a join ``U_E``.

    Attributes:
        domain: Sites of the enumerated patterns
        patterns: Admissible patterns on ``domain``, one per row
        atom_of_row: Atom index of every row
        keys: Per atom and per translate ``g``, the bitmask of elements of
            ``U`` containing the atom's ``W + g`` restriction. Atoms can
            share an element of ``U_E`` iff every column of their keys
            intersects.
    """

    domain: FiniteSubset
    patterns: np.ndarray
    atom_of_row: np.ndarray
    keys: np.ndarray

    @property
    def atom_count(self) -> int:
        return int(self.keys.shape[0])

    @property
    def pairwise_disjoint(self) -> bool:
        """True if no two atoms can share an element of ``U_E``."""
        keys = self.keys
        return bool(np.all((keys & (keys - 1)) == 0))


def joined_atoms(
    U: Cover,
    E: FiniteSubset,
    extra: Optional[FiniteSubset] = None,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> JoinedAtoms:
    """Enumerate patterns on ``W + E`` (and ``extra``) grouped into atoms.

    Args:
        U: The cover being joined
        E: Translates of the join
        extra: Further sites every pattern must be defined on
        budgets: Enumeration budgets

    Returns:
        JoinedAtoms: Patterns, their atoms and the atom keys, atoms in
        lexicographic key order
    """
    d = U.space.dimension
    domain = FiniteSubset.empty(d)
    if not E.is_empty:
        domain = U.window.minkowski_sum(E)
    if extra is not None:
        domain = domain | extra
    arr = U.space.admissible_array(domain, budgets.pattern_budget)
    if len(arr) * max(len(E), 1) * len(U) > budgets.join_budget:
        raise BudgetExceededError(
            f"{len(arr)} patterns x {len(E)} translates x {len(U)} elements "
            f"exceed the join budget {budgets.join_budget}"
        )
    if E.is_empty:
        return JoinedAtoms(
            domain,
            arr,
            np.zeros(len(arr), dtype=np.intp),
            np.zeros((1, 0), dtype=np.int64),
        )
    masks = np.column_stack([U.bitmasks(domain, arr, g) for g in E])
    if np.any(masks == 0):
        raise InputError("the cover does not cover every admissible pattern")
    keys, inverse = np.unique(masks, axis=0, return_inverse=True)
    logger.debug(
        "Join over %d translates: %d patterns in %d atoms",
        len(E),
        len(arr),
        len(keys),
    )
    return JoinedAtoms(domain, arr, inverse.reshape(-1), keys)
