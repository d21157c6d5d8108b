"""Invariant measures and measure-theoretic entropies.

Bernoulli measures are available in every dimension, stationary Markov
measures in dimension 1. Cylinder probabilities are exact; entropies of
partitions and joins are computed from them, and cover entropies by
searching over the partitions a cover's atoms can be grouped into.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.special import entr

from amenable_pressure.assignment import Assignment, minimize_entropy
from amenable_pressure.config import DEFAULT_BUDGETS, Budgets
from amenable_pressure.exceptions import BudgetExceededError, InputError
from amenable_pressure.lattice import (
    FiniteSubset,
    FolnerBoxSequence,
    folner_box,
)
from amenable_pressure.subadditive import Property, SetFunction
from amenable_pressure.symbolic import (
    ClopenSet,
    Cover,
    Partition,
    ShiftSpace,
    joined_atoms,
    refines,
    u_star_partitions,
)
from amenable_pressure.types import Cell, EntropyRow, MeasureJSON

logger = logging.getLogger(__name__)

STATIONARY_TOLERANCE = 1e-14
STOCHASTIC_TOLERANCE = 1e-9
MAX_STATIONARY_ITERATIONS = 1_000_000


class MeasureKind(str, Enum):
    BERNOULLI = "bernoulli"
    MARKOV = "markov"


class EntropyMode(str, Enum):
    EXACT = "exact"
    GREEDY = "greedy"
    AUTO = "auto"


def _stationary(P: np.ndarray) -> np.ndarray:
    # Power iteration on the lazy chain, which is aperiodic.
    k = P.shape[0]
    lazy = 0.5 * (np.eye(k) + P)
    pi = np.full(k, 1.0 / k)
    for _ in range(MAX_STATIONARY_ITERATIONS):
        nxt = pi @ lazy
        nxt /= nxt.sum()
        if np.max(np.abs(nxt - pi)) <= STATIONARY_TOLERANCE:
            return nxt
        pi = nxt
    raise InputError("stationary vector did not converge", field="pi")


@dataclass(frozen=True, eq=False)
class InvariantMeasure:
    """A shift-invariant probability measure with exact cylinder masses.

    Attributes:
        kind: Bernoulli or Markov
        alphabet_size: Number of symbols
        dimension: Lattice dimension (always 1 for Markov)
        p: Bernoulli symbol probabilities
        P: Markov transition matrix
        pi: Markov stationary vector
    """

    kind: MeasureKind
    alphabet_size: int
    dimension: int
    p: Optional[np.ndarray] = None
    P: Optional[np.ndarray] = None
    pi: Optional[np.ndarray] = None

    @classmethod
    def bernoulli(
        cls, p: Sequence[float] | np.ndarray, dimension: int = 1
    ) -> "InvariantMeasure":
        probs = np.asarray(p, dtype=float)
        if probs.ndim != 1 or probs.size == 0:
            raise InputError("expected a non-empty vector", field="p")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InputError("probabilities must be >= 0", field="p")
        if abs(math.fsum(probs) - 1.0) > STOCHASTIC_TOLERANCE:
            raise InputError(
                f"probabilities sum to {math.fsum(probs):.12g}", field="p"
            )
        if dimension < 1:
            raise InputError("must be >= 1", field="dimension")
        probs.flags.writeable = False
        return cls(MeasureKind.BERNOULLI, probs.size, dimension, p=probs)

    @classmethod
    def uniform(
        cls, alphabet_size: int, dimension: int = 1
    ) -> "InvariantMeasure":
        return cls.bernoulli(
            np.full(alphabet_size, 1.0 / alphabet_size), dimension
        )

    @classmethod
    def markov(
        cls,
        P: Sequence[Sequence[float]] | np.ndarray,
        pi: Optional[Sequence[float] | np.ndarray] = None,
    ) -> "InvariantMeasure":
        """A stationary Markov chain on ``Z``.

        Args:
            P: Row-stochastic transition matrix
            pi: Stationary vector; computed when omitted

        Returns:
            InvariantMeasure: The Markov measure
        """
        T = np.asarray(P, dtype=float)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.size == 0:
            raise InputError("expected a square matrix", field="P")
        for i, row in enumerate(T):
            if not np.all(np.isfinite(row)) or np.any(row < 0):
                raise InputError("entries must be >= 0", field=f"P[{i}]")
            if abs(math.fsum(row) - 1.0) > STOCHASTIC_TOLERANCE:
                raise InputError(
                    f"row sums to {math.fsum(row):.12g}", field=f"P[{i}]"
                )
        if pi is None:
            stationary = _stationary(T)
        else:
            stationary = np.asarray(pi, dtype=float)
            if stationary.shape != (T.shape[0],):
                raise InputError("length differs from P", field="pi")
            if np.any(stationary < 0) or abs(
                math.fsum(stationary) - 1.0
            ) > STOCHASTIC_TOLERANCE:
                raise InputError("not a probability vector", field="pi")
            if np.max(np.abs(stationary @ T - stationary)) > (
                STOCHASTIC_TOLERANCE
            ):
                raise InputError("pi is not stationary for P", field="pi")
        T.flags.writeable = False
        stationary.flags.writeable = False
        return cls(MeasureKind.MARKOV, T.shape[0], 1, P=T, pi=stationary)

    @property
    def parameters(self) -> np.ndarray:
        """Flat parameter vector, used for reporting and tie-breaking."""
        if self.kind is MeasureKind.BERNOULLI:
            assert self.p is not None
            return np.array(self.p)
        assert self.P is not None
        return self.P.reshape(-1).copy()

    def single_site(self) -> np.ndarray:
        """Distribution of the symbol at one site."""
        if self.kind is MeasureKind.BERNOULLI:
            assert self.p is not None
            return np.array(self.p)
        assert self.pi is not None
        return np.array(self.pi)

    def pattern_probabilities(
        self, window: FiniteSubset, arr: np.ndarray
    ) -> np.ndarray:
        """Exact probability of every pattern row of ``arr`` on ``window``.

        Markov windows need not be contiguous: the gap between consecutive
        sites is bridged by a matrix power.
        """
        if window.dimension != self.dimension:
            raise InputError(
                f"{self.kind.value} measure lives in dimension "
                f"{self.dimension}, window has {window.dimension}"
            )
        rows = np.asarray(arr, dtype=np.intp).reshape(len(arr), len(window))
        if len(window) == 0:
            return np.ones(len(rows))
        if self.kind is MeasureKind.BERNOULLI:
            assert self.p is not None
            return np.asarray(np.prod(self.p[rows], axis=1), dtype=float)
        assert self.P is not None and self.pi is not None
        sites = [p[0] for p in window.points]
        probs = np.array(self.pi[rows[:, 0]], dtype=float)
        powers: Dict[int, np.ndarray] = {}
        for i in range(1, len(sites)):
            gap = sites[i] - sites[i - 1]
            if gap not in powers:
                powers[gap] = np.linalg.matrix_power(self.P, gap)
            probs *= powers[gap][rows[:, i - 1], rows[:, i]]
        return probs

    def sample(
        self, window: FiniteSubset, rng: np.random.Generator, count: int
    ) -> np.ndarray:
        """Draw ``count`` patterns on ``window``."""
        k = self.alphabet_size
        if len(window) == 0:
            return np.zeros((count, 0), dtype=np.uint8)
        if self.kind is MeasureKind.BERNOULLI:
            return rng.choice(k, size=(count, len(window)), p=self.p).astype(
                np.uint8
            )
        assert self.P is not None and self.pi is not None
        sites = [p[0] for p in window.points]
        start, stop = sites[0], sites[-1]
        chain = np.empty((count, stop - start + 1), dtype=np.intp)
        chain[:, 0] = rng.choice(k, size=count, p=self.pi)
        cumulative = np.cumsum(self.P, axis=1)
        for t in range(1, chain.shape[1]):
            u = rng.random(count)[:, None]
            chain[:, t] = np.minimum(
                (u > cumulative[chain[:, t - 1]]).sum(axis=1), k - 1
            )
        return chain[:, [s - start for s in sites]].astype(np.uint8)

    def entropy_rate_closed_form(self) -> float:
        """Entropy of the shift with respect to the one-site partition."""
        if self.kind is MeasureKind.BERNOULLI:
            assert self.p is not None
            return float(math.fsum(entr(self.p)))
        assert self.P is not None and self.pi is not None
        return float(math.fsum(self.pi * entr(self.P).sum(axis=1)))

    def check_support(
        self,
        space: ShiftSpace,
        window: FiniteSubset,
        budget: int = DEFAULT_BUDGETS.pattern_budget,
    ) -> None:
        """Raise if mass leaks onto patterns the space forbids."""
        arr = space.admissible_array(window, budget)
        mass = math.fsum(self.pattern_probabilities(window, arr))
        if mass < 1.0 - STOCHASTIC_TOLERANCE:
            raise InputError(
                f"measure gives mass {1.0 - mass:.3g} to forbidden patterns"
            )

    def to_json(self) -> MeasureJSON:
        if self.kind is MeasureKind.BERNOULLI:
            assert self.p is not None
            return {"kind": self.kind.value, "p": self.p.tolist()}
        assert self.P is not None and self.pi is not None
        return {
            "kind": self.kind.value,
            "P": self.P.tolist(),
            "pi": self.pi.tolist(),
        }


def cylinder_prob(mu: InvariantMeasure, B: ClopenSet) -> float:
    """Exact measure of a clopen set."""
    if B.is_empty:
        return 0.0
    rows = np.array(sorted(B.patterns), dtype=np.intp).reshape(
        len(B), len(B.window)
    )
    return float(math.fsum(mu.pattern_probabilities(B.window, rows)))


def partition_entropy(mu: InvariantMeasure, alpha: Partition) -> float:
    """Shannon entropy ``-sum mu(A) log mu(A)`` in nats."""
    masses = np.array([cylinder_prob(mu, atom) for atom in alpha.elements])
    return float(math.fsum(entr(masses)))


def join_entropy(
    mu: InvariantMeasure,
    alpha: Partition,
    F: FiniteSubset,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> float:
    """Entropy of the join ``alpha_F``.

    A Bernoulli measure with a one-site partition gives ``|F| H(alpha)``
    without enumeration.
    """
    if F.is_empty:
        return 0.0
    if mu.kind is MeasureKind.BERNOULLI and len(alpha.window) <= 1:
        return len(F) * partition_entropy(mu, alpha)
    atoms = joined_atoms(alpha, F, budgets=budgets)
    probs = mu.pattern_probabilities(atoms.domain, atoms.patterns)
    masses = np.bincount(
        atoms.atom_of_row, weights=probs, minlength=atoms.atom_count
    )
    return float(math.fsum(entr(masses)))


@dataclass
class EntropyReport:
    """Normalized entropies ``H(alpha_{F_n})/|F_n|`` along boxes.

    ``estimate`` is the smallest normalized value, or in dimension 1 the
    smallest increment if that is lower; both bound the rate from above.
    """

    dimension: int
    rows: List[EntropyRow]
    estimate: float
    closed_form: Optional[float] = None

    @property
    def normalized(self) -> List[float]:
        return [r["normalized"] for r in self.rows]

    @property
    def increments(self) -> List[Optional[float]]:
        return [r["increment"] for r in self.rows]

    def table_columns(self) -> Sequence[str]:
        return (
            "n",
            "box_size",
            "entropy",
            "normalized",
            "increment",
            "inf_to_date",
        )

    def table_rows(self) -> List[Sequence[Cell]]:
        return [
            (
                r["n"],
                r["box_size"],
                r["entropy"],
                r["normalized"],
                r["increment"],
                r["inf_to_date"],
            )
            for r in self.rows
        ]


def entropy_rate(
    mu: InvariantMeasure,
    alpha: Partition,
    n_max: int,
    budgets: Budgets = DEFAULT_BUDGETS,
    n_min: int = 1,
) -> EntropyReport:
    """Estimate the entropy of ``mu`` relative to ``alpha``.

    Args:
        mu: Invariant measure
        alpha: Partition on the same lattice
        n_max: Largest box side
        budgets: Enumeration budgets
        n_min: Smallest box side

    Returns:
        EntropyReport: Per-box rows, the upper estimate and, for Markov
        measures, the closed-form chain entropy for comparison
    """
    d = alpha.space.dimension
    if mu.dimension != d or mu.alphabet_size != alpha.space.alphabet_size:
        raise InputError("measure and partition live on different spaces")
    rows: List[EntropyRow] = []
    running = math.inf
    previous: Optional[tuple[int, float]] = None
    for n, box in FolnerBoxSequence.up_to(d, n_max, n_min):
        h = join_entropy(mu, alpha, box, budgets)
        normalized = h / len(box)
        running = min(running, normalized)
        increment = None
        if d == 1 and previous is not None:
            increment = (h - previous[1]) / (len(box) - previous[0])
        rows.append(
            {
                "n": n,
                "box_size": len(box),
                "entropy": h,
                "normalized": normalized,
                "increment": increment,
                "inf_to_date": running,
            }
        )
        previous = (len(box), h)
        logger.debug("H(alpha_F)/|F| at n=%d: %.12g", n, normalized)

    estimate = running
    increments = [r["increment"] for r in rows if r["increment"] is not None]
    if increments:
        estimate = min(estimate, min(increments))
    closed_form = None
    if mu.kind is MeasureKind.MARKOV:
        closed_form = mu.entropy_rate_closed_form()
    return EntropyReport(d, rows, estimate, closed_form)


def _resolve_mode(
    mode: EntropyMode | str, atoms: int, budgets: Budgets
) -> bool:
    chosen = EntropyMode(mode)
    if chosen is EntropyMode.AUTO:
        return atoms <= budgets.entropy_atom_cap
    return chosen is EntropyMode.EXACT


def joined_cover_entropy(
    mu: InvariantMeasure,
    U: Cover,
    F: FiniteSubset,
    mode: EntropyMode | str = EntropyMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> Assignment:
    """Minimize ``H(beta)`` over partitions ``beta`` refining ``U_F``.

    It suffices to group the atoms of the partition generated by ``U_F``;
    blocks are unions of atoms lying in one element of ``U_F``.
    """
    if len(U) > budgets.entropy_element_cap and (
        EntropyMode(mode) is EntropyMode.EXACT
    ):
        raise BudgetExceededError(
            f"{len(U)} cover elements exceed the exact entropy cap "
            f"{budgets.entropy_element_cap}; use greedy mode"
        )
    atoms = joined_atoms(U, F, budgets=budgets)
    probs = mu.pattern_probabilities(atoms.domain, atoms.patterns)
    masses = np.bincount(
        atoms.atom_of_row, weights=probs, minlength=atoms.atom_count
    )
    exact = _resolve_mode(mode, atoms.atom_count, budgets)
    if exact and len(U) > budgets.entropy_element_cap:
        exact = False
    return minimize_entropy(
        atoms.keys,
        masses,
        exact=exact,
        atom_cap=budgets.entropy_atom_cap,
        node_budget=budgets.node_budget,
    )


def cover_entropy(
    mu: InvariantMeasure,
    U: Cover,
    mode: EntropyMode | str = EntropyMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> float:
    """``H_mu(U)``, the least entropy of a partition refining ``U``.

    Exact mode certifies the optimum and raises ``BudgetExceededError``
    past the atom and element caps; greedy mode returns an upper bound.
    """
    origin = FiniteSubset(U.space.dimension, ((0,) * U.space.dimension,))
    return joined_cover_entropy(mu, U, origin, mode, budgets).value


@dataclass
class LocalEntropy:
    """Two-sided estimate of the entropy of ``mu`` relative to a cover.

    Attributes:
        lower: ``H(U_{F_n})/|F_n|`` at the largest box, an estimate
        upper: Least rate estimate over the candidate partitions, an upper
            bound
        certified: Whether ``upper - lower`` is within the tolerance
        candidate_rates: Rate estimate of every candidate
        lower_exact: Whether ``lower`` came from exact search
    """

    lower: float
    upper: float
    certified: bool
    candidate_rates: List[float]
    lower_exact: bool

    @property
    def gap(self) -> float:
        return self.upper - self.lower


def entropy_upper(
    mu: InvariantMeasure,
    U: Cover,
    n_max: int,
    candidates: Optional[Sequence[Partition]] = None,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> List[float]:
    """Rate estimates of partitions refining ``U``, one per candidate.

    Candidates default to the partitions obtained from the atoms of ``U``.
    """
    pool = (
        list(candidates)
        if candidates is not None
        else u_star_partitions(U, budgets.u_star_cap)
    )
    if not pool:
        raise InputError("no candidate partitions", field="candidates")
    rates = []
    for i, alpha in enumerate(pool):
        if not refines(alpha, U, budgets.pattern_budget):
            raise InputError(
                "candidate does not refine the cover",
                field=f"candidates[{i}]",
            )
        rates.append(entropy_rate(mu, alpha, n_max, budgets).estimate)
    return rates


def local_entropy(
    mu: InvariantMeasure,
    U: Cover,
    n_max: int,
    candidates: Optional[Sequence[Partition]] = None,
    tolerance: float = 1e-6,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> LocalEntropy:
    """Squeeze the entropy of ``mu`` relative to ``U``.

    Args:
        mu: Invariant measure
        U: Cover
        n_max: Largest box side
        candidates: Partitions refining ``U``
        tolerance: Gap below which the value counts as certified
        budgets: Enumeration and search budgets

    Returns:
        LocalEntropy: Lower estimate, upper bound and the certificate flag
    """
    rates = entropy_upper(mu, U, n_max, candidates, budgets)
    upper = min(rates)
    F = folner_box(U.space.dimension, n_max)
    assignment = joined_cover_entropy(mu, U, F, EntropyMode.AUTO, budgets)
    lower = assignment.value / len(F)
    certified = upper - lower <= tolerance
    logger.info(
        "Local entropy at n=%d: lower %.9f, upper %.9f%s",
        n_max,
        lower,
        upper,
        " (certified)" if certified else "",
    )
    return LocalEntropy(lower, upper, certified, rates, assignment.certified)


def gibbs_markov_measure(
    space: ShiftSpace, site_weights: Sequence[float] | np.ndarray
) -> InvariantMeasure:
    """The Markov measure maximizing entropy plus ``sum w(x_0)``.

    For a nearest-neighbour shift with transfer matrix ``A`` and weights
    ``w``, let ``B = A diag(e^w)`` with Perron root ``lam`` and right
    eigenvector ``v``; then ``P_ij = B_ij v_j / (lam v_i)``.
    """
    A = space.transfer_matrix()
    w = np.asarray(site_weights, dtype=float)
    if w.shape != (space.alphabet_size,):
        raise InputError("one weight per symbol expected", field="weights")
    B = A * np.exp(w - w.max())[None, :]
    for i, row in enumerate(B):
        if not row.any():
            raise InputError(
                f"symbol {i} has no allowed successor", field="forbidden"
            )
    values, vectors = np.linalg.eig(B)
    top = int(np.argmax(values.real))
    lam = float(values[top].real)
    v = np.abs(vectors[:, top].real)
    P = np.zeros_like(B)
    for i in range(len(B)):
        if v[i] > 0:
            P[i] = B[i] * v / (lam * v[i])
        P[i] /= P[i].sum() if P[i].sum() > 0 else 1.0
        if not P[i].any():
            P[i] = B[i] / B[i].sum()
    return InvariantMeasure.markov(P)


def parry_measure(space: ShiftSpace) -> InvariantMeasure:
    """The maximal-entropy Markov measure of a nearest-neighbour shift."""
    return gibbs_markov_measure(space, np.zeros(space.alphabet_size))


def entropy_set_function(
    mu: InvariantMeasure,
    alpha: Partition,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> SetFunction:
    """``F -> H_mu(alpha_F)``, declared with all five properties."""
    return SetFunction(
        lambda F: join_entropy(mu, alpha, F, budgets),
        list(Property),
        name="H(alpha_F)",
    )
