"""Cover-relative topological pressure.

``P_E(U)`` is the least value of ``sum_{B in beta} sup_{x in B} e^{f_E(x)}``
over partitions ``beta`` finer than the join ``U_E`` whose blocks are
unions of atoms of the partition generated by ``U_E``. Each block must fit
inside one element of ``U_E``; the weight of a block is the largest weight
of its atoms. All arithmetic is in log form.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from amenable_pressure.assignment import Assignment, minimize_max_weight
from amenable_pressure.config import DEFAULT_BUDGETS, Budgets
from amenable_pressure.exceptions import InputError
from amenable_pressure.lattice import FiniteSubset, FolnerBoxSequence
from amenable_pressure.potentials import Potential, PotentialKind
from amenable_pressure.subadditive import Property, SetFunction
from amenable_pressure.symbolic import Cover, ShiftSpace, joined_atoms
from amenable_pressure.types import Cell, PressureRow

logger = logging.getLogger(__name__)


class SearchMode(str, Enum):
    EXACT = "exact"
    GREEDY = "greedy"


class TermPath(str, Enum):
    EMPTY = "empty"
    PRODUCT = "product"
    PARTITION = "partition"
    SEARCH = "search"


@dataclass
class PressureTerm:
    """One finite term ``log P_E``.

    Attributes:
        E: The finite set
        log_value: ``log P_E`` as found (an upper bound if not certified)
        lower_bound: A proven lower bound on ``log P_E``
        certified: Whether ``log_value`` is proven optimal
        atom_count: Atoms of the generated partition
        path: How the term was computed
        assignment: Blocks of atoms, when a search ran
    """

    E: FiniteSubset
    log_value: float
    lower_bound: float
    certified: bool
    atom_count: int
    path: TermPath
    assignment: Optional[Assignment] = None

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {
            "size": len(self.E),
            "log_p": self.log_value,
            "lower_bound": self.lower_bound,
            "certified": self.certified,
            "atom_count": self.atom_count,
            "path": self.path.value,
        }
        if self.assignment is not None:
            record["blocks"] = [list(b) for b in self.assignment.blocks]
        return record


def _product_eligible(
    space: ShiftSpace, potential: Potential, cover: Cover
) -> bool:
    if not space.is_full_shift or len(cover.window) > 1:
        return False
    if potential.kind is not PotentialKind.ADDITIVE:
        return False
    if len(potential.window) != 1:
        return False
    assert potential.table is not None
    constant = bool(np.all(potential.table == potential.table[0]))
    return (
        cover.window.is_empty
        or cover.window == potential.window
        or constant
    )


def _search(
    keys: np.ndarray,
    weights: np.ndarray,
    cover: Cover,
    mode: SearchMode,
    budgets: Budgets,
) -> Assignment:
    exact = mode is SearchMode.EXACT
    if exact and len(cover) > budgets.exact_cover_cap:
        logger.warning(
            "%d cover elements exceed the exact cap %d, using greedy",
            len(cover),
            budgets.exact_cover_cap,
        )
        exact = False
    return minimize_max_weight(
        keys,
        weights,
        exact=exact,
        atom_cap=budgets.exact_atom_cap,
        node_budget=budgets.node_budget,
    )


def _general_term(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    E: FiniteSubset,
    mode: SearchMode,
    budgets: Budgets,
) -> PressureTerm:
    atoms = joined_atoms(
        cover, E, extra=potential.dependence(E), budgets=budgets
    )
    values = potential.evaluate_patterns(E, atoms.domain, atoms.patterns)
    weights = np.full(atoms.atom_count, -math.inf)
    np.maximum.at(weights, atoms.atom_of_row, values)
    if atoms.pairwise_disjoint:
        total = float(logsumexp(weights))
        return PressureTerm(
            E, total, total, True, atoms.atom_count, TermPath.PARTITION
        )
    assignment = _search(atoms.keys, weights, cover, mode, budgets)
    return PressureTerm(
        E,
        assignment.value,
        assignment.lower_bound,
        assignment.certified,
        atoms.atom_count,
        TermPath.SEARCH,
        assignment,
    )


def pressure_term(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    E: FiniteSubset,
    mode: SearchMode | str = SearchMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> PressureTerm:
    """Compute ``log P_E`` for a potential and a cover.

    On a full shift with a one-site cover and a one-site additive
    potential the problem factorises over the sites of ``E``: the
    one-site optimum and its packing bound, raised to the power ``|E|``,
    bracket ``P_E`` and coincide when the one-site packing bound equals
    the one-site optimum. Otherwise the join over ``E`` is searched.
    Partitions need no search. Anything else goes through the assignment
    search of ``minimize_max_weight``.

    Args:
        space: Shift space
        potential: Potential family on ``space``
        cover: Cover of ``space``
        E: Finite set
        mode: ``exact`` or ``greedy``
        budgets: Enumeration and search budgets

    Returns:
        PressureTerm: The term with its certificate

    Raises:
        InputError: If the cover misses an admissible pattern
        BudgetExceededError: If an enumeration exceeds its budget
    """
    search = SearchMode(mode)
    if cover.space != space or potential.dimension != space.dimension:
        raise InputError("cover, potential and space do not match")
    if E.is_empty:
        return PressureTerm(E, 0.0, 0.0, True, 1, TermPath.EMPTY)
    if _product_eligible(space, potential, cover):
        origin = FiniteSubset(space.dimension, ((0,) * space.dimension,))
        single = _general_term(
            space, potential, cover, origin, search, budgets
        )
        if single.assignment is None or single.assignment.packing_tight:
            size = len(E)
            return PressureTerm(
                E,
                size * single.log_value,
                size * single.lower_bound,
                True,
                single.atom_count**size,
                TermPath.PRODUCT,
                single.assignment,
            )
        logger.debug("One-site packing bound not tight, joining over E")
    return _general_term(space, potential, cover, E, search, budgets)


@dataclass
class PressureReport:
    """Normalized ``(1/|F_n|) log P_{F_n}`` along boxes.

    The headline ``estimate`` is the last increment in dimension 1 and the
    last normalized value otherwise.
    """

    dimension: int
    rows: List[PressureRow]
    estimate: float
    terms: List[PressureTerm] = field(default_factory=list, repr=False)

    @property
    def normalized(self) -> List[float]:
        return [r["normalized"] for r in self.rows]

    @property
    def increments(self) -> List[Optional[float]]:
        return [r["increment"] for r in self.rows]

    @property
    def certified(self) -> bool:
        return all(r["certified"] for r in self.rows)

    def table_columns(self) -> Sequence[str]:
        return (
            "n",
            "box_size",
            "log_P",
            "normalized",
            "increment",
            "certified",
        )

    def table_rows(self) -> List[Sequence[Cell]]:
        return [
            (
                r["n"],
                r["box_size"],
                r["log_p"],
                r["normalized"],
                r["increment"],
                r["certified"],
            )
            for r in self.rows
        ]

    def term_records(self) -> List[Dict[str, Any]]:
        """Per-term audit records, including optimal assignments."""
        return [
            dict(term.to_record(), n=row["n"])
            for row, term in zip(self.rows, self.terms)
        ]


def pressure_limit(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    n_max: int,
    mode: SearchMode | str = SearchMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
    n_min: int = 1,
) -> PressureReport:
    """Evaluate ``log P_{F_n}`` on the boxes ``[0, n)^d``.

    Args:
        space: Shift space
        potential: Potential family
        cover: Cover of ``space``
        n_max: Largest box side
        mode: ``exact`` or ``greedy``
        budgets: Enumeration and search budgets
        n_min: Smallest box side

    Returns:
        PressureReport: Rows with normalized values and increments
    """
    d = space.dimension
    rows: List[PressureRow] = []
    terms: List[PressureTerm] = []
    previous: Optional[PressureTerm] = None
    for n, box in FolnerBoxSequence.up_to(d, n_max, n_min):
        term = pressure_term(space, potential, cover, box, mode, budgets)
        increment = None
        if d == 1 and previous is not None:
            increment = (term.log_value - previous.log_value) / (
                len(box) - len(previous.E)
            )
        rows.append(
            {
                "n": n,
                "box_size": len(box),
                "log_p": term.log_value,
                "normalized": term.log_value / len(box),
                "increment": increment,
                "certified": term.certified,
            }
        )
        terms.append(term)
        previous = term
        logger.info(
            "n=%d: log P = %.12g, normalized %.12g%s",
            n,
            term.log_value,
            rows[-1]["normalized"],
            "" if term.certified else " (not certified)",
        )
    last = rows[-1]
    estimate = last["normalized"]
    if last["increment"] is not None:
        estimate = last["increment"]
    return PressureReport(d, rows, estimate, terms)


def topological_entropy(
    space: ShiftSpace,
    cover: Cover,
    n_max: int,
    mode: SearchMode | str = SearchMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> PressureReport:
    """Pressure of the zero potential."""
    return pressure_limit(
        space, Potential.zero(space), cover, n_max, mode, budgets
    )


@dataclass
class CoverSupReport:
    """Pressure estimates over a finite list of covers.

    The maximum is a lower bound for the supremum over all open covers.
    """

    reports: Dict[str, PressureReport]
    best_cover: str
    estimate: float


def pressure_sup_over_covers(
    space: ShiftSpace,
    potential: Potential,
    covers: Mapping[str, Cover],
    n_max: int,
    mode: SearchMode | str = SearchMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> CoverSupReport:
    """Largest pressure estimate over named covers; ties go to the first."""
    if not covers:
        raise InputError("no covers given", field="covers")
    reports = {
        name: pressure_limit(space, potential, U, n_max, mode, budgets)
        for name, U in covers.items()
    }
    best = max(reports, key=lambda name: reports[name].estimate)
    for name, report in reports.items():
        logger.info("Cover %s: estimate %.12g", name, report.estimate)
    return CoverSupReport(reports, best, reports[best].estimate)


def pressure_set_function(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    mode: SearchMode | str = SearchMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> SetFunction:
    """``E -> log P_E`` as a set function.

    For a family shifted to be monotone and nonnegative this function is
    monotone, nonnegative, invariant and sub-additive; the declaration is
    what ``check_properties`` puts to the test.
    """
    return SetFunction(
        lambda E: pressure_term(
            space, potential, cover, E, mode, budgets
        ).log_value,
        [
            Property.MONOTONE,
            Property.NONNEGATIVE,
            Property.INVARIANT,
            Property.SUBADDITIVE,
        ],
        name="log P_E",
    )
