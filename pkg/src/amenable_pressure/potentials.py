"""Sub-additive potential families ``{f_E}`` on shift spaces.

A potential is generated by locally constant data on a window ``W``;
``f_E`` depends on a configuration only through its restriction to
``D(E) = W + E``. Three kinds are supported:

- additive: ``f_E = sum_{g in E} phi(g.x)`` with ``phi`` a table indexed by
  the patterns on ``W`` in lexicographic order;
- matrix: ``f_E(x) = min`` over words ``g_1 ... g_m`` in ``E`` (letters may
  repeat, ``m <= |E|``) of ``log ||M(g_1.x) ... M(g_m.x)||`` with the
  entry-sum norm;
- custom: any callable of ``(E, configuration)``.

Every kind carries an ``offset`` ``c`` realising the family
``f_E + c|E|``.
"""

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import (
    Any,
    Callable,
    Dict,
    List,
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
from amenable_pressure.lattice import FiniteSubset, FolnerBoxSequence
from amenable_pressure.measures import InvariantMeasure
from amenable_pressure.subadditive import TOLERANCE
from amenable_pressure.symbolic import (
    ClopenSet,
    ShiftSpace,
    column_index,
    encode,
)
from amenable_pressure.types import (
    Cell,
    ConditionRecord,
    Configuration,
    GroupElement,
    PotentialJSON,
)

logger = logging.getLogger(__name__)

CustomFunction = Callable[[FiniteSubset, Configuration], float]


class PotentialKind(str, Enum):
    ADDITIVE = "additive"
    MATRIX = "matrix"
    CUSTOM = "custom"


@dataclass(frozen=True)
class PotentialConstants:
    """Analytic constants of a potential family.

    Attributes:
        c3_bound: Bound on ``f_E - f_{E + {g}}`` used for checking
        reference_bound: The product bound ``log(1/(K1^2 K2))`` of the
            matrix family, reported alongside
        k_bound: Bound on ``|f_E| / |E|``
        k1: Smallest over largest matrix entry
        k2: Smallest matrix entry
        certified: Whether ``c3_bound`` is proven for this family
    """

    c3_bound: float
    reference_bound: Optional[float]
    k_bound: float
    k1: Optional[float] = None
    k2: Optional[float] = None
    certified: bool = True


def _pareto_minimal(vectors: np.ndarray) -> np.ndarray:
    unique = np.unique(vectors, axis=0)
    order = np.argsort(unique.sum(axis=1), kind="stable")
    kept: List[np.ndarray] = []
    for v in unique[order]:
        if any(np.all(u <= v) for u in kept):
            continue
        kept.append(v)
    return np.array(kept)


def _min_product_log_norm(
    matrices: Sequence[np.ndarray],
    length: int,
    front_cap: int = DEFAULT_BUDGETS.matrix_front_cap,
) -> float:
    """Least ``log ||M_1 ... M_m||`` over words of length ``1..length``.

    Row vectors ``1^T M_1 ... M_m`` are kept on a Pareto front: with
    nonnegative matrices a componentwise smaller vector stays smaller
    after any further product. The front is rescaled every step and the
    scale is tracked in log form.
    """
    stack = np.stack([np.asarray(m, dtype=float) for m in matrices])
    ones = np.ones(stack.shape[1])
    front = _pareto_minimal(np.stack([ones @ m for m in stack]))
    log_scale = 0.0
    best = math.inf
    for m in range(1, length + 1):
        sums = front.sum(axis=1)
        if np.any(sums <= 0):
            return -math.inf
        best = min(best, log_scale + math.log(float(sums.min())))
        if m == length:
            break
        top = float(front.max())
        log_scale += math.log(top)
        front = front / top
        front = _pareto_minimal(
            np.concatenate([front @ mat for mat in stack])
        )
        if len(front) > front_cap:
            raise BudgetExceededError(
                f"product search front of {len(front)} vectors exceeds "
                f"{front_cap}"
            )
    return best


@dataclass(frozen=True, eq=False)
class Potential:
    """A sub-additive potential family generated by local data.

    Use the ``additive``, ``matrix`` and ``custom`` constructors.
    """

    kind: PotentialKind
    dimension: int
    alphabet_size: int
    window: FiniteSubset
    table: Optional[np.ndarray] = None
    matrices: Optional[np.ndarray] = None
    function: Optional[CustomFunction] = None
    offset: float = 0.0
    _memo: Dict[Tuple[Tuple[int, ...], int], float] = field(
        default_factory=dict, repr=False
    )

    @classmethod
    def additive(
        cls,
        space: ShiftSpace,
        window: FiniteSubset,
        table: Sequence[float] | np.ndarray,
        offset: float = 0.0,
    ) -> "Potential":
        """``f_E = sum_{g in E} phi(g.x) + c|E|``.

        Args:
            space: Shift space the potential lives on
            window: Sites ``phi`` reads, in sorted order
            table: ``phi`` on every pattern of ``window``, lexicographic
            offset: The constant ``c``

        Returns:
            Potential: The additive family
        """
        _check_window(space, window)
        values = np.asarray(table, dtype=float)
        expected = space.alphabet_size ** len(window)
        if values.shape != (expected,):
            raise InputError(
                f"expected {expected} values, got {values.size}",
                field="table",
            )
        if not np.all(np.isfinite(values)):
            raise InputError("values must be finite", field="table")
        values.flags.writeable = False
        return cls(
            PotentialKind.ADDITIVE,
            space.dimension,
            space.alphabet_size,
            window,
            table=values,
            offset=_finite_offset(offset),
        )

    @classmethod
    def site(
        cls, space: ShiftSpace, a: Sequence[float], offset: float = 0.0
    ) -> "Potential":
        """The single-site additive potential ``phi(x) = a[x_0]``."""
        origin = FiniteSubset(space.dimension, ((0,) * space.dimension,))
        return cls.additive(space, origin, a, offset)

    @classmethod
    def zero(cls, space: ShiftSpace) -> "Potential":
        return cls.site(space, [0.0] * space.alphabet_size)

    @classmethod
    def matrix(
        cls,
        space: ShiftSpace,
        window: FiniteSubset,
        matrices: Sequence[Any] | np.ndarray,
        offset: float = 0.0,
    ) -> "Potential":
        """The matrix-product family, one ``n x n`` matrix per pattern.

        Raises:
            InputError: On shape mismatch, negative or non-finite entries
        """
        _check_window(space, window)
        stack = np.asarray(matrices, dtype=float)
        expected = space.alphabet_size ** len(window)
        if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
            raise InputError(
                "expected a list of square matrices", field="matrices"
            )
        if stack.shape[0] != expected or stack.shape[1] == 0:
            raise InputError(
                f"expected {expected} matrices, got {stack.shape[0]}",
                field="matrices",
            )
        for i, m in enumerate(stack):
            if not np.all(np.isfinite(m)):
                raise InputError(
                    "entries must be finite", field=f"matrices[{i}]"
                )
            if np.any(m < 0):
                raise InputError(
                    "entries must be >= 0", field=f"matrices[{i}]"
                )
        stack.flags.writeable = False
        return cls(
            PotentialKind.MATRIX,
            space.dimension,
            space.alphabet_size,
            window,
            matrices=stack,
            offset=_finite_offset(offset),
        )

    @classmethod
    def constant_matrix(
        cls, space: ShiftSpace, matrix: Sequence[Any] | np.ndarray
    ) -> "Potential":
        """A matrix family whose matrix does not depend on ``x``."""
        origin = FiniteSubset(space.dimension, ((0,) * space.dimension,))
        m = np.asarray(matrix, dtype=float)
        return cls.matrix(
            space, origin, np.stack([m] * space.alphabet_size)
        )

    @classmethod
    def custom(
        cls,
        space: ShiftSpace,
        window: FiniteSubset,
        function: CustomFunction,
        offset: float = 0.0,
    ) -> "Potential":
        """Wrap a callable; ``f_E`` may only read ``x`` on ``W + E``."""
        _check_window(space, window)
        return cls(
            PotentialKind.CUSTOM,
            space.dimension,
            space.alphabet_size,
            window,
            function=function,
            offset=_finite_offset(offset),
        )

    def shifted(self, c: float) -> "Potential":
        """The family ``f_E + c|E|``."""
        return dataclasses.replace(
            self, offset=self.offset + c, _memo={}
        )

    def dependence(self, E: FiniteSubset) -> FiniteSubset:
        """``D(E)``, the sites ``f_E`` reads."""
        if E.is_empty:
            return E
        return self.window.minkowski_sum(E)

    def evaluate(
        self, E: FiniteSubset, configuration: Configuration
    ) -> float:
        """``f_E`` on a configuration given at least on ``D(E)``."""
        domain = self.dependence(E)
        try:
            row = [configuration[p] for p in domain]
        except KeyError as e:
            raise InputError(
                f"pattern domain too small: no symbol at {list(e.args[0])}"
            ) from e
        arr = np.array([row], dtype=np.uint8).reshape(1, len(domain))
        return float(self.evaluate_patterns(E, domain, arr)[0])

    def evaluate_patterns(
        self, E: FiniteSubset, domain: FiniteSubset, arr: np.ndarray
    ) -> np.ndarray:
        """``f_E`` on every row of ``arr``, patterns on ``domain``.

        Raises:
            InputError: If ``domain`` does not contain ``D(E)``
        """
        if E.dimension != self.dimension:
            raise DimensionMismatchError(
                f"E has dimension {E.dimension}, potential {self.dimension}"
            )
        if E.is_empty:
            return np.zeros(len(arr))
        try:
            cols = [
                column_index(domain, self.window.translate(g)) for g in E
            ]
        except InputError as e:
            raise InputError(f"pattern domain too small: {e}") from e
        if self.kind is PotentialKind.ADDITIVE:
            values = self._additive(cols, arr)
        elif self.kind is PotentialKind.MATRIX:
            values = self._matrix(cols, arr, len(E))
        else:
            values = self._custom(E, domain, arr)
        return values + self.offset * len(E)

    def _codes(
        self, cols: Sequence[np.ndarray], arr: np.ndarray
    ) -> np.ndarray:
        return np.column_stack(
            [encode(arr[:, c], self.alphabet_size) for c in cols]
        ).reshape(len(arr), len(cols))

    def _additive(
        self, cols: Sequence[np.ndarray], arr: np.ndarray
    ) -> np.ndarray:
        assert self.table is not None
        return np.asarray(self.table[self._codes(cols, arr)].sum(axis=1))

    def _matrix(
        self,
        cols: Sequence[np.ndarray],
        arr: np.ndarray,
        size: int,
        budgets: Budgets = DEFAULT_BUDGETS,
    ) -> np.ndarray:
        assert self.matrices is not None
        codes = np.sort(self._codes(cols, arr), axis=1)
        distinct, inverse = np.unique(codes, axis=0, return_inverse=True)
        values = np.empty(len(distinct))
        for i, row in enumerate(distinct):
            letters = tuple(sorted(set(int(c) for c in row)))
            if len(letters) > budgets.matrix_distinct_cap:
                raise BudgetExceededError(
                    f"{len(letters)} distinct matrices exceed the product "
                    f"cap {budgets.matrix_distinct_cap}"
                )
            key = (letters, size)
            if key not in self._memo:
                self._memo[key] = _min_product_log_norm(
                    [self.matrices[c] for c in letters],
                    size,
                    budgets.matrix_front_cap,
                )
            values[i] = self._memo[key]
        return values[inverse.reshape(-1)]

    def _custom(
        self, E: FiniteSubset, domain: FiniteSubset, arr: np.ndarray
    ) -> np.ndarray:
        assert self.function is not None
        points = domain.points
        return np.array(
            [
                float(
                    self.function(
                        E, dict(zip(points, (int(s) for s in row)))
                    )
                )
                for row in arr
            ]
        )

    def constants(self) -> PotentialConstants:
        """Insertion bound ``C``, growth bound ``K`` and matrix constants.

        For matrices with ``n * min_entry >= 1`` products never shrink, so
        the minimum sits at words of length one and ``log(1/K1)`` bounds
        the insertion defect. Otherwise no bound is certified and the
        product bound is reported for reference.
        """
        c = self.offset
        if self.kind is PotentialKind.ADDITIVE:
            assert self.table is not None
            shifted = self.table + c
            return PotentialConstants(
                c3_bound=max(0.0, float(-shifted.min())),
                reference_bound=None,
                k_bound=float(np.abs(shifted).max()),
            )
        if self.kind is PotentialKind.CUSTOM:
            return PotentialConstants(
                math.inf, None, math.inf, certified=False
            )
        assert self.matrices is not None
        n = self.matrices.shape[1]
        low = float(self.matrices.min())
        high = float(self.matrices.max())
        if low <= 0:
            logger.warning("A matrix entry is zero: C3 is not certified")
            return PotentialConstants(
                math.inf, math.inf, math.inf, 0.0, 0.0, certified=False
            )
        k1, k2 = low / high, low
        reference = max(0.0, math.log(1.0 / (k1 * k1 * k2)) - c)
        k_bound = (
            2 * math.log(n) + max(abs(math.log(low)), abs(math.log(high)))
        ) + abs(c)
        if n * low >= 1.0:
            return PotentialConstants(
                max(0.0, math.log(1.0 / k1) - c), reference, k_bound, k1, k2
            )
        return PotentialConstants(
            reference, reference, k_bound, k1, k2, certified=False
        )

    def site_weights(self) -> Optional[np.ndarray]:
        """Per-symbol values when the potential reads one site only."""
        if self.kind is not PotentialKind.ADDITIVE or len(self.window) != 1:
            return None
        assert self.table is not None
        return np.asarray(self.table + self.offset)

    def integral(self, mu: InvariantMeasure) -> float:
        """``int phi dmu + c`` for an additive potential."""
        if self.kind is not PotentialKind.ADDITIVE:
            raise InputError("integral needs an additive potential")
        assert self.table is not None
        space = ShiftSpace.full_shift(self.dimension, self.alphabet_size)
        arr = space.admissible_array(self.window)
        probs = mu.pattern_probabilities(self.window, arr)
        codes = encode(arr, self.alphabet_size)
        return math.fsum(probs * self.table[codes]) + self.offset

    def to_json(self) -> PotentialJSON:
        data: PotentialJSON = {
            "kind": self.kind.value,
            "window": self.window.to_json(),
            "offset": self.offset,
        }
        if self.kind is PotentialKind.ADDITIVE:
            assert self.table is not None
            data["table"] = self.table.tolist()
        elif self.kind is PotentialKind.MATRIX:
            assert self.matrices is not None
            data["matrices"] = self.matrices.tolist()
        else:
            raise InputError("custom potentials cannot be written to JSON")
        return data


def _check_window(space: ShiftSpace, window: FiniteSubset) -> None:
    if window.is_empty:
        raise InputError("the potential window is empty", field="window")
    if window.dimension != space.dimension:
        raise DimensionMismatchError(
            f"window has dimension {window.dimension}, space has "
            f"{space.dimension}"
        )


def _finite_offset(offset: float) -> float:
    if not math.isfinite(offset):
        raise InputError("must be finite", field="offset")
    return float(offset)


def _require_kind(P: Potential, kind: PotentialKind) -> None:
    if P.kind is not kind:
        raise InputError(
            f"expected a {kind.value} potential, got {P.kind.value}",
            field="kind",
        )


def eval_additive(
    P: Potential, E: FiniteSubset, configuration: Configuration
) -> float:
    """``sum_{g in E} phi(g.x) + c|E|``."""
    _require_kind(P, PotentialKind.ADDITIVE)
    return P.evaluate(E, configuration)


def eval_matrix(
    P: Potential, E: FiniteSubset, configuration: Configuration
) -> float:
    """Least log-norm of a product of at most ``|E|`` matrices from ``E``."""
    _require_kind(P, PotentialKind.MATRIX)
    return P.evaluate(E, configuration)


def _random_subset(
    rng: np.random.Generator, d: int, max_box: int, max_size: int
) -> FiniteSubset:
    size = int(rng.integers(1, max_size + 1))
    coords = rng.integers(0, max_box, size=(size, d))
    return FiniteSubset(d, tuple(tuple(int(c) for c in r) for r in coords))


def _random_element(
    rng: np.random.Generator, d: int, max_box: int
) -> GroupElement:
    return tuple(int(c) for c in rng.integers(-max_box, max_box + 1, d))


def _single(
    P: Potential, E: FiniteSubset, domain: FiniteSubset, row: np.ndarray
) -> float:
    return float(P.evaluate_patterns(E, domain, row.reshape(1, -1))[0])


def _record(
    condition: str,
    verdict: str,
    seed: int,
    samples: int,
    empirical: Optional[float],
    bound: Optional[float],
    witness: Optional[Dict[str, Any]],
) -> ConditionRecord:
    record: ConditionRecord = {
        "condition": condition,
        "verdict": verdict,
        "seed": seed,
        "samples": samples,
        "empirical": empirical,
        "bound": bound,
    }
    if witness is not None:
        record["witness"] = witness
    return record


def check_conditions(
    P: Potential,
    space: ShiftSpace,
    samples: int,
    seed: int,
    max_box: int = 4,
    max_size: int = 4,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> List[ConditionRecord]:
    """Randomized check of the defining conditions of a potential family.

    Conditions: sub-additivity on disjoint sets, translation equivariance
    ``f_{E+g}(x) = f_E(g.x)``, the bounded insertion defect
    ``f_E - f_{E + {g}} <= C`` and, for additive potentials, strong
    sub-additivity.

    Args:
        P: Potential under test
        space: Shift space patterns are drawn from
        samples: Random samples per condition
        seed: Seed for ``numpy.random.default_rng``
        max_box: Side of the sampling box
        max_size: Largest random subset
        budgets: Enumeration budgets

    Returns:
        List[ConditionRecord]: One record per condition; failures carry
        the first witness found
    """
    if samples < 1:
        raise InputError("must be >= 1", field="samples")
    if space.dimension != P.dimension:
        raise DimensionMismatchError("potential and space differ")
    rng = np.random.default_rng(seed)
    d = P.dimension
    records: List[ConditionRecord] = []

    def pattern(domain: FiniteSubset) -> np.ndarray:
        return space.random_pattern(domain, rng, budgets.pattern_budget)

    worst = -math.inf
    witness: Optional[Dict[str, Any]] = None
    for _ in range(samples):
        E = _random_subset(rng, d, max_box, max_size)
        F = _random_subset(rng, d, max_box, max_size) - E
        if F.is_empty:
            continue
        domain = P.dependence(E | F)
        x = pattern(domain)
        excess = (
            _single(P, E | F, domain, x)
            - _single(P, E, domain, x)
            - _single(P, F, domain, x)
        )
        worst = max(worst, excess)
        if excess > TOLERANCE and witness is None:
            witness = {
                "E": E.to_json(),
                "F": F.to_json(),
                "x": x.tolist(),
                "excess": excess,
            }
    records.append(
        _record(
            "disjoint_subadditivity",
            "fail" if witness else "pass",
            seed,
            samples,
            worst if math.isfinite(worst) else None,
            0.0,
            witness,
        )
    )

    worst = 0.0
    witness = None
    for _ in range(samples):
        E = _random_subset(rng, d, max_box, max_size)
        g = _random_element(rng, d, max_box)
        moved = E.translate(g)
        domain = P.dependence(moved)
        x = pattern(domain)
        # g.x restricted to D(E) is x restricted to D(E) + g
        a = _single(P, moved, domain, x)
        b = _single(P, E, P.dependence(E), x)
        defect = abs(a - b)
        if math.isinf(a) and a == b:
            defect = 0.0
        worst = max(worst, defect)
        if defect > 1e-12 * max(1.0, abs(b)) and witness is None:
            witness = {"E": E.to_json(), "g": list(g), "x": x.tolist()}
    records.append(
        _record(
            "translation_equivariance",
            "fail" if witness else "pass",
            seed,
            samples,
            worst,
            0.0,
            witness,
        )
    )

    constants = P.constants()
    bound = constants.c3_bound
    worst = -math.inf
    witness = None
    for _ in range(samples):
        E = _random_subset(rng, d, max_box, max_size)
        g = tuple(int(c) for c in rng.integers(0, max_box + 1, d))
        bigger = E | FiniteSubset(d, (g,))
        domain = P.dependence(bigger)
        x = pattern(domain)
        defect = _single(P, E, domain, x) - _single(P, bigger, domain, x)
        if math.isnan(defect):
            continue
        worst = max(worst, defect)
        if defect > bound + TOLERANCE and witness is None:
            witness = {
                "E": E.to_json(),
                "g": list(g),
                "x": x.tolist(),
                "defect": defect,
            }
    if not constants.certified:
        verdict = "uncertified"
    else:
        verdict = "fail" if witness else "pass"
    record = _record(
        "bounded_insertion_defect",
        verdict,
        seed,
        samples,
        worst,
        bound,
        witness,
    )
    record["reference_bound"] = constants.reference_bound
    records.append(record)

    if P.kind is PotentialKind.ADDITIVE:
        worst = -math.inf
        witness = None
        for _ in range(samples):
            E = _random_subset(rng, d, max_box, max_size)
            F = _random_subset(rng, d, max_box, max_size)
            domain = P.dependence(E | F)
            x = pattern(domain)
            lhs = _single(P, E | F, domain, x) + _single(P, E & F, domain, x)
            rhs = _single(P, E, domain, x) + _single(P, F, domain, x)
            worst = max(worst, lhs - rhs)
            if lhs - rhs > TOLERANCE * max(1.0, abs(rhs)) and not witness:
                witness = {"E": E.to_json(), "F": F.to_json()}
        records.append(
            _record(
                "strong_subadditivity",
                "fail" if witness else "pass",
                seed,
                samples,
                worst,
                0.0,
                witness,
            )
        )

    for r in records:
        logger.info(
            "%s: %s (empirical %s, bound %s)",
            r["condition"],
            r["verdict"],
            r["empirical"],
            r["bound"],
        )
    return records


def sup_over(
    P: Potential,
    E: FiniteSubset,
    B: ClopenSet,
    space: ShiftSpace,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> float:
    """``sup_{x in B} f_E(x)`` over admissible extensions of ``B``.

    Raises:
        InputError: If ``B`` has no admissible pattern
        BudgetExceededError: If the extensions exceed the pattern budget
    """
    if B.is_empty:
        raise InputError("the clopen set is empty")
    domain = P.dependence(E) | B.window
    arr = space.admissible_array(domain, budgets.pattern_budget)
    inside = arr[B.mask(domain, arr, space.alphabet_size)]
    if len(inside) == 0:
        raise InputError("the clopen set has no admissible pattern")
    return float(P.evaluate_patterns(E, domain, inside).max())


@dataclass
class LyapunovReport:
    """Normalized integrals ``(1/|F_n|) int f_{F_n} dmu`` along boxes.

    ``standard_errors`` is zero for exact rows and the Monte Carlo standard
    error of the normalized value otherwise.
    """

    dimension: int
    samples: List[Tuple[int, float]]
    integrals: List[float]
    increments: List[Optional[float]]
    standard_errors: List[float]
    estimate: float
    exact: bool

    @property
    def normalized(self) -> List[float]:
        return [s[1] for s in self.samples]

    def at(self, n: int) -> float:
        for side, value in self.samples:
            if side == n:
                return value
        raise InputError(f"no sample at n={n}", field="n")

    def table_columns(self) -> Sequence[str]:
        return (
            "n",
            "box_size",
            "integral",
            "normalized",
            "increment",
            "std_error",
        )

    def table_rows(self) -> List[Sequence[Cell]]:
        return [
            (n, n**self.dimension, integral, value, inc, err)
            for (n, value), integral, inc, err in zip(
                self.samples,
                self.integrals,
                self.increments,
                self.standard_errors,
            )
        ]


def _exact_integral(
    P: Potential,
    mu: InvariantMeasure,
    space: ShiftSpace,
    F: FiniteSubset,
    budgets: Budgets,
) -> float:
    domain = P.dependence(F)
    arr = space.admissible_array(domain, budgets.pattern_budget)
    probs = mu.pattern_probabilities(domain, arr)
    if math.fsum(probs) < 1.0 - 1e-9:
        raise InputError("the measure charges forbidden patterns")
    support = probs > 0
    values = P.evaluate_patterns(F, domain, arr[support])
    return math.fsum(probs[support] * values)


def lyapunov(
    P: Potential,
    mu: InvariantMeasure,
    n_max: int,
    space: Optional[ShiftSpace] = None,
    budgets: Budgets = DEFAULT_BUDGETS,
    seed: int = 0,
    n_min: int = 1,
) -> LyapunovReport:
    """Lyapunov exponent of the family with respect to ``mu``.

    Additive potentials give ``int phi dmu + c`` exactly at every ``n``.
    Otherwise the integral is exact over the patterns on ``D(F_n)`` while
    they fit the pattern budget, and Monte Carlo beyond.

    Args:
        P: Potential family
        mu: Invariant measure on the same lattice and alphabet
        n_max: Largest box side
        space: Support of ``mu``; the full shift by default
        budgets: Enumeration budgets and Monte Carlo sample count
        seed: Seed of the Monte Carlo sampler
        n_min: Smallest box side

    Returns:
        LyapunovReport: Per-box values; the estimate is the last
        normalized value, increments ride along in dimension 1
    """
    if mu.dimension != P.dimension or mu.alphabet_size != P.alphabet_size:
        raise InputError("measure and potential live on different spaces")
    space = space or ShiftSpace.full_shift(P.dimension, P.alphabet_size)
    rng = np.random.default_rng(seed)
    boxes = FolnerBoxSequence.up_to(P.dimension, n_max, n_min)

    if P.kind is PotentialKind.ADDITIVE:
        mean = P.integral(mu)
        sizes = [len(box) for _, box in boxes]
        steps: List[Optional[float]] = [None] * len(sizes)
        if P.dimension == 1:
            steps[1:] = [mean] * (len(sizes) - 1)
        return LyapunovReport(
            dimension=P.dimension,
            samples=[(n, mean) for n in boxes.sides],
            integrals=[mean * s for s in sizes],
            increments=steps,
            standard_errors=[0.0] * len(sizes),
            estimate=mean,
            exact=True,
        )

    samples: List[Tuple[int, float]] = []
    integrals: List[float] = []
    errors: List[float] = []
    exact = True
    for n, box in boxes:
        try:
            integral = _exact_integral(P, mu, space, box, budgets)
            error = 0.0
        except BudgetExceededError:
            domain = P.dependence(box)
            draws = mu.sample(domain, rng, budgets.monte_carlo_samples)
            values = P.evaluate_patterns(box, domain, draws)
            integral = float(values.mean())
            error = float(values.std(ddof=1)) / math.sqrt(len(values))
            error /= len(box)
            exact = False
            logger.info(
                "Lyapunov integral at n=%d by Monte Carlo (%d samples)",
                n,
                len(values),
            )
        samples.append((n, integral / len(box)))
        integrals.append(integral)
        errors.append(error)
        logger.debug("Lyapunov n=%d: %.12g", n, samples[-1][1])

    increments: List[Optional[float]] = [None]
    for i in range(1, len(samples)):
        if P.dimension == 1:
            width = samples[i][0] - samples[i - 1][0]
            increments.append((integrals[i] - integrals[i - 1]) / width)
        else:
            increments.append(None)
    return LyapunovReport(
        P.dimension,
        samples,
        integrals,
        increments,
        errors,
        samples[-1][1],
        exact,
    )

