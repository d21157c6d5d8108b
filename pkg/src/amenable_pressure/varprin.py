"""Numerical checks of the variational principle for pressure.

The objective of a measure ``mu`` is ``h(mu, U) + F(mu)`` where ``h`` is
the certified upper entropy estimate at box side ``n`` and ``F`` the
normalized Lyapunov integral at the same ``n``. It is compared with the
normalized pressure ``(1/|F_n|) log P_{F_n}``, which dominates the
objective of every invariant measure box by box.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.special import softmax

from amenable_pressure.config import DEFAULT_BUDGETS, Budgets
from amenable_pressure.exceptions import InputError, InvariantViolation
from amenable_pressure.lattice import FiniteSubset, folner_box
from amenable_pressure.measures import (
    InvariantMeasure,
    entropy_upper,
    gibbs_markov_measure,
    parry_measure,
)
from amenable_pressure.potentials import Potential, lyapunov
from amenable_pressure.pressure import (
    PressureTerm,
    SearchMode,
    pressure_term,
)
from amenable_pressure.subadditive import TOLERANCE, gibbs_distribution
from amenable_pressure.symbolic import (
    Cover,
    Partition,
    ShiftSpace,
    column_index,
    joined_atoms,
    u_star_partitions,
)

logger = logging.getLogger(__name__)

XATOL = 1e-10
FATOL = 1e-14
MAX_ITERATIONS = 4000


@dataclass
class RestartRecord:
    """One optimizer run from one starting point."""

    restart: int
    label: str
    start: List[float]
    parameters: List[float]
    value: float
    entropy: float
    lyapunov: float
    evaluations: int

    def to_record(self) -> Dict[str, Any]:
        return {
            "restart": self.restart,
            "label": self.label,
            "start": self.start,
            "parameters": self.parameters,
            "value": self.value,
            "entropy": self.entropy,
            "lyapunov": self.lyapunov,
            "evaluations": self.evaluations,
        }


@dataclass
class VariationalResult:
    """Best objective found over a measure family, against pressure.

    Attributes:
        pressure_estimate: Normalized pressure at the same box side
        pressure_increment: Pressure increment at that side (d = 1)
        best_measure: Maximizing measure
        best_parameters: Its flat parameters
        best_value: ``entropy_part + lyapunov_part``
        entropy_part: Upper entropy estimate of the best measure
        lyapunov_part: Normalized Lyapunov integral of the best measure
        gap: ``pressure_estimate - best_value``
        n: Box side of every finite quantity
        trace: One record per restart, in restart order
    """

    pressure_estimate: float
    pressure_increment: Optional[float]
    best_measure: InvariantMeasure
    best_parameters: np.ndarray
    best_value: float
    entropy_part: float
    lyapunov_part: float
    gap: float
    n: int
    trace: List[RestartRecord] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.gap < -TOLERANCE:
            raise InvariantViolation(
                f"objective {self.best_value:.12g} exceeds pressure "
                f"{self.pressure_estimate:.12g} at n={self.n}"
            )

    def to_json(self) -> Dict[str, Any]:
        return {
            "pressure_estimate": self.pressure_estimate,
            "pressure_increment": self.pressure_increment,
            "best_measure": self.best_measure.to_json(),
            "best_value": self.best_value,
            "entropy_part": self.entropy_part,
            "lyapunov_part": self.lyapunov_part,
            "gap": self.gap,
            "n": self.n,
            "trace": [r.to_record() for r in self.trace],
        }


class _Objective:
    """``h_upper + F`` at box side ``n`` with evaluation counting."""

    def __init__(
        self,
        space: ShiftSpace,
        potential: Potential,
        cover: Cover,
        n: int,
        budgets: Budgets,
    ) -> None:
        self.space = space
        self.potential = potential
        self.cover = cover
        self.n = n
        self.budgets = budgets
        self.candidates: Sequence[Partition] = u_star_partitions(
            cover, budgets.u_star_cap
        )
        self.evaluations = 0

    def parts(self, mu: InvariantMeasure) -> Tuple[float, float]:
        self.evaluations += 1
        rates = entropy_upper(
            mu, self.cover, self.n, self.candidates, self.budgets
        )
        h = min(rates)
        f = lyapunov(
            self.potential,
            mu,
            self.n,
            self.space,
            self.budgets,
            n_min=self.n,
        ).at(self.n)
        return h, f


def _pressure_at(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    n: int,
    mode: SearchMode | str,
    budgets: Budgets,
) -> Tuple[float, Optional[float]]:
    F = folner_box(space.dimension, n)
    term = pressure_term(space, potential, cover, F, mode, budgets)
    normalized = term.log_value / len(F)
    increment = None
    if space.dimension == 1 and n > 1:
        smaller = pressure_term(
            space, potential, cover, folner_box(1, n - 1), mode, budgets
        )
        increment = term.log_value - smaller.log_value
    return normalized, increment


def _run(
    objective: _Objective,
    build: Any,
    starts: Sequence[Tuple[str, np.ndarray]],
) -> Tuple[List[RestartRecord], InvariantMeasure, np.ndarray]:
    trace: List[RestartRecord] = []
    best: Optional[Tuple[float, Tuple[float, ...], InvariantMeasure]] = None
    for i, (label, x0) in enumerate(starts):
        before = objective.evaluations

        def negative(x: np.ndarray) -> float:
            h, f = objective.parts(build(x))
            return -(h + f)

        if x0.size:
            result = minimize(
                negative,
                x0,
                method="Nelder-Mead",
                options={
                    "xatol": XATOL,
                    "fatol": FATOL,
                    "maxiter": MAX_ITERATIONS,
                },
            )
            x = np.asarray(result.x, dtype=float)
        else:
            x = x0
        mu = build(x)
        h, f = objective.parts(mu)
        record = RestartRecord(
            restart=i,
            label=label,
            start=x0.tolist(),
            parameters=mu.parameters.tolist(),
            value=h + f,
            entropy=h,
            lyapunov=f,
            evaluations=objective.evaluations - before,
        )
        trace.append(record)
        logger.info(
            "Restart %d (%s): value %.12g", i, label, record.value
        )
        key = (-record.value, tuple(record.parameters))
        if best is None or key < (-best[0], best[1]):
            best = (record.value, tuple(record.parameters), mu)
    assert best is not None
    return trace, best[2], np.array(best[1])


def _finish(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    objective: _Objective,
    trace: List[RestartRecord],
    best: InvariantMeasure,
    mode: SearchMode | str,
) -> VariationalResult:
    pressure, increment = _pressure_at(
        space, potential, cover, objective.n, mode, objective.budgets
    )
    h, f = objective.parts(best)
    return VariationalResult(
        pressure_estimate=pressure,
        pressure_increment=increment,
        best_measure=best,
        best_parameters=best.parameters,
        best_value=h + f,
        entropy_part=h,
        lyapunov_part=f,
        gap=pressure - (h + f),
        n=objective.n,
        trace=trace,
    )


def maximize_over_bernoulli(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    n_entropy: int = 4,
    restarts: int = 3,
    seed: int = 0,
    mode: SearchMode | str = SearchMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> VariationalResult:
    """Maximize the objective over Bernoulli measures.

    Probabilities are parameterized by softmax logits with the last logit
    fixed at 0. Starts: the Gibbs vector of the one-site weights when the
    potential has them, the uniform vector, then ``restarts`` random
    logit vectors drawn from ``seed``.

    Raises:
        InputError: If the space is not a full shift
    """
    if not space.is_full_shift:
        raise InputError(
            "Bernoulli measures are only searched on full shifts",
            field="forbidden",
        )
    k = space.alphabet_size
    d = space.dimension
    rng = np.random.default_rng(seed)
    objective = _Objective(space, potential, cover, n_entropy, budgets)

    def build(x: np.ndarray) -> InvariantMeasure:
        return InvariantMeasure.bernoulli(
            softmax(np.append(x, 0.0)), dimension=d
        )

    starts: List[Tuple[str, np.ndarray]] = []
    weights = potential.site_weights()
    if weights is not None:
        logits = np.log(gibbs_distribution(weights))
        starts.append(("gibbs", logits[:-1] - logits[-1]))
    starts.append(("uniform", np.zeros(k - 1)))
    for _ in range(restarts):
        starts.append(("random", rng.normal(0.0, 1.0, k - 1)))
    trace, best, _ = _run(objective, build, starts)
    return _finish(space, potential, cover, objective, trace, best, mode)


def maximize_over_markov(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    n_entropy: int = 4,
    restarts: int = 3,
    seed: int = 0,
    mode: SearchMode | str = SearchMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> VariationalResult:
    """Maximize the objective over Markov measures of a 1-d shift.

    Transitions the shift forbids are pinned to zero; each row is a softmax
    over its allowed successors. The first start is the Gibbs-Markov
    measure of the one-site weights (the Parry measure otherwise).

    Raises:
        InputError: If the shift is not one-dimensional nearest-neighbour
            or some symbol has no allowed successor
    """
    if space.dimension != 1:
        raise InputError("Markov measures need dimension 1", field="dimension")
    A = space.transfer_matrix()
    k = space.alphabet_size
    allowed = [np.flatnonzero(row) for row in A]
    for i, cols in enumerate(allowed):
        if cols.size == 0:
            raise InputError(
                f"symbol {i} has no allowed successor", field="forbidden"
            )
    sizes = [cols.size - 1 for cols in allowed]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
    rng = np.random.default_rng(seed)
    objective = _Objective(space, potential, cover, n_entropy, budgets)

    def build(x: np.ndarray) -> InvariantMeasure:
        P = np.zeros((k, k))
        for i, cols in enumerate(allowed):
            logits = np.append(x[offsets[i] : offsets[i + 1]], 0.0)
            P[i, cols] = softmax(logits)
        return InvariantMeasure.markov(P)

    def encode_rows(mu: InvariantMeasure) -> np.ndarray:
        assert mu.P is not None
        parts = []
        for i, cols in enumerate(allowed):
            row = np.clip(mu.P[i, cols], 1e-300, None)
            logs = np.log(row)
            parts.append(logs[:-1] - logs[-1])
        return np.concatenate(parts) if parts else np.zeros(0)

    weights = potential.site_weights()
    if weights is not None:
        seeded = ("gibbs", gibbs_markov_measure(space, weights))
    else:
        seeded = ("parry", parry_measure(space))
    starts: List[Tuple[str, np.ndarray]] = [
        (seeded[0], encode_rows(seeded[1]))
    ]
    total = int(offsets[-1])
    if total:
        starts.append(("uniform", np.zeros(total)))
        for _ in range(restarts):
            starts.append(("random", rng.normal(0.0, 1.0, total)))
    trace, best, _ = _run(objective, build, starts)
    return _finish(space, potential, cover, objective, trace, best, mode)


@dataclass(eq=False)
class EquilibriumCandidate:
    """The weighted point set built from the maximizers of ``f_{F_n}``.

    Attributes:
        n: Box side
        domain: Sites of the selected patterns
        selected: One maximizing pattern per atom of ``alpha_{F_n}``
        values: ``f_{F_n}`` of every selected pattern
        weights: Gibbs weights of the values
        single_site: Symbol distribution of the translate average
        pairs: Adjacent-pair distribution inside the box (d = 1)
    """

    n: int
    domain: FiniteSubset
    selected: np.ndarray
    values: np.ndarray
    weights: np.ndarray
    single_site: np.ndarray
    pairs: Optional[np.ndarray] = None


def equilibrium_candidate(
    space: ShiftSpace,
    potential: Potential,
    alpha: Partition,
    n: int,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> EquilibriumCandidate:
    """Select one maximizer of ``f_{F_n}`` per atom and average.

    Ties inside an atom go to the lexicographically smallest pattern. The
    marginals are those of ``(1/|F_n|) sum_{g in F_n} g.nu_n`` with
    ``nu_n`` the weighted point set.
    """
    F = folner_box(space.dimension, n)
    atoms = joined_atoms(
        alpha, F, extra=potential.dependence(F) | F, budgets=budgets
    )
    values = potential.evaluate_patterns(F, atoms.domain, atoms.patterns)
    rows = np.arange(len(values))
    order = np.lexsort((rows, -values, atoms.atom_of_row))
    _, first = np.unique(atoms.atom_of_row[order], return_index=True)
    chosen = order[first]
    selected = atoms.patterns[chosen]
    chosen_values = values[chosen]
    weights = gibbs_distribution(chosen_values)

    k = space.alphabet_size
    cols = column_index(atoms.domain, F)
    symbols = selected[:, cols].astype(np.intp)
    single = np.zeros(k)
    for j in range(len(cols)):
        np.add.at(single, symbols[:, j], weights)
    single /= len(F)

    pairs = None
    if space.dimension == 1 and n > 1:
        pairs = np.zeros((k, k))
        for j in range(n - 1):
            np.add.at(pairs, (symbols[:, j], symbols[:, j + 1]), weights)
        pairs /= n - 1
    logger.info(
        "Equilibrium candidate at n=%d: %d points, marginal %s",
        n,
        len(chosen),
        np.array2string(single, precision=6),
    )
    return EquilibriumCandidate(
        n, atoms.domain, selected, chosen_values, weights, single, pairs
    )


@dataclass(frozen=True)
class Step1Record:
    """Inequality ``pressure >= entropy + lyapunov`` for one measure."""

    name: str
    pressure: float
    entropy: float
    lyapunov: float
    margin: float

    @property
    def passed(self) -> bool:
        return self.margin >= -TOLERANCE

    def to_record(self) -> Dict[str, Any]:
        return {
            "measure": self.name,
            "pressure": self.pressure,
            "entropy": self.entropy,
            "lyapunov": self.lyapunov,
            "margin": self.margin,
            "passed": self.passed,
        }


@dataclass
class Step1Report:
    n: int
    pressure: PressureTerm
    records: List[Step1Record]

    @property
    def violations(self) -> List[Step1Record]:
        return [r for r in self.records if not r.passed]

    def check(self) -> None:
        """Raise ``InvariantViolation`` on the first negative margin."""
        for r in self.violations:
            raise InvariantViolation(
                f"{r.name}: entropy {r.entropy:.12g} + lyapunov "
                f"{r.lyapunov:.12g} exceeds pressure {r.pressure:.12g} "
                f"(margin {r.margin:.3g})"
            )


def verify_step1(
    space: ShiftSpace,
    potential: Potential,
    cover: Cover,
    measures: Mapping[str, InvariantMeasure],
    n: int,
    mode: SearchMode | str = SearchMode.EXACT,
    budgets: Budgets = DEFAULT_BUDGETS,
) -> Step1Report:
    """Compare normalized pressure with every measure's objective.

    Args:
        space: Shift space
        potential: Potential family
        cover: Cover of ``space``
        measures: Named invariant measures supported on ``space``
        n: Box side shared by every finite quantity
        mode: Assignment search mode
        budgets: Enumeration and search budgets

    Returns:
        Step1Report: Margins per measure; ``check`` raises on violations
    """
    if not measures:
        raise InputError("no measures given", field="measures")
    F = folner_box(space.dimension, n)
    term = pressure_term(space, potential, cover, F, mode, budgets)
    normalized = term.log_value / len(F)
    objective = _Objective(space, potential, cover, n, budgets)
    records = []
    for name, mu in measures.items():
        h, f = objective.parts(mu)
        record = Step1Record(name, normalized, h, f, normalized - (h + f))
        records.append(record)
        if not record.passed:
            logger.error(
                "Pressure inequality margin %.3g for measure %s",
                record.margin,
                name,
            )
    logger.info(
        "Checked %d measures at n=%d, %d violations",
        len(records),
        n,
        sum(not r.passed for r in records),
    )
    return Step1Report(n, term, records)


def marginal_distance(
    candidate: EquilibriumCandidate, mu: InvariantMeasure
) -> float:
    """Total-variation distance of single-site marginals."""
    return 0.5 * float(np.abs(candidate.single_site - mu.single_site()).sum())
