"""Unit tests for set functions and their checks."""

import math
from typing import List

import numpy as np
import pytest

from amenable_pressure.exceptions import (
    EvaluationError,
    InputError,
    InvariantViolation,
    PropertyDeclarationError,
)
from amenable_pressure.lattice import FiniteSubset, folner_box
from amenable_pressure.measures import InvariantMeasure, entropy_set_function
from amenable_pressure.subadditive import (
    OwEstimate,
    Property,
    SetFunction,
    block_bound,
    check_properties,
    covering_inequality_check,
    gibbs_distribution,
    gibbs_inequality,
    ow_limit,
)
from amenable_pressure.symbolic import ShiftSpace, standard_partition


def test_empty_set_is_zero() -> None:
    """Test that the evaluator is never called on the empty set."""
    calls: List[FiniteSubset] = []

    def evaluator(subset: FiniteSubset) -> float:
        calls.append(subset)
        return 1.0

    f = SetFunction(evaluator)
    assert f(FiniteSubset.empty(1)) == 0.0
    assert calls == []


def test_invariant_functions_share_cache_entries() -> None:
    """Test that translates hit one memo entry."""
    calls: List[FiniteSubset] = []

    def evaluator(subset: FiniteSubset) -> float:
        calls.append(subset)
        return float(len(subset))

    f = SetFunction(evaluator, [Property.INVARIANT])
    F = FiniteSubset.of([0, 2])
    assert f(F) == 2.0
    assert f(F.translate((7,))) == 2.0
    assert len(calls) == 1
    assert f.cache_size == 1


def test_evaluator_failure_carries_subset() -> None:
    """Test that evaluator errors are wrapped with the subset."""

    def evaluator(subset: FiniteSubset) -> float:
        raise ValueError("boom")

    f = SetFunction(evaluator, name="broken")
    F = FiniteSubset.of([1])
    with pytest.raises(EvaluationError) as exc_info:
        f(F)
    assert exc_info.value.subset == F
    assert "broken" in str(exc_info.value)


def test_cardinality_passes_every_property() -> None:
    """Test the modular function against all five properties."""
    records = check_properties(
        SetFunction.cardinality(), 2, 200, max_box=4, seed=1
    )
    assert [r["verdict"] for r in records] == ["pass"] * 5
    assert {r["property"] for r in records} == {p.value for p in Property}


def test_square_of_cardinality_is_not_subadditive() -> None:
    """Test that a counterexample is found on the first pair."""
    f = SetFunction(lambda s: float(len(s)) ** 2, name="|F|^2")
    records = check_properties(
        f, 1, 10, max_box=4, seed=0, properties=[Property.SUBADDITIVE]
    )
    assert records[0]["verdict"] == "fail"
    witness = records[0]["witness"]
    assert witness["E"] == [[0]]
    assert witness["F"] == [[1]]
    assert witness["lhs"] == 4.0


def test_negative_cardinality_is_not_monotone() -> None:
    """Test monotonicity and nonnegativity failures."""
    f = SetFunction(lambda s: -float(len(s)), name="-|F|")
    records = check_properties(
        f,
        1,
        20,
        max_box=4,
        seed=3,
        properties=[Property.MONOTONE, Property.NONNEGATIVE],
    )
    assert [r["verdict"] for r in records] == ["fail", "fail"]


def test_translation_dependent_function_is_not_invariant() -> None:
    """Test that a function reading absolute positions fails."""
    f = SetFunction(
        lambda s: float(sum(p[0] for p in s.points)), name="position"
    )
    records = check_properties(
        f, 1, 50, max_box=4, seed=2, properties=[Property.INVARIANT]
    )
    assert records[0]["verdict"] == "fail"


def test_check_properties_validates_arguments() -> None:
    """Test argument validation."""
    with pytest.raises(InputError):
        check_properties(SetFunction.cardinality(), 1, 0, 4, 0)
    with pytest.raises(InputError):
        check_properties(SetFunction.cardinality(), 1, 5, 1, 0)


@pytest.mark.parametrize("d,n_max", [(1, 6), (2, 3)])
def test_ow_limit_of_cardinality(d: int, n_max: int) -> None:
    """Test that ``|F|/|F|`` is constantly 1."""
    estimate = ow_limit(SetFunction.cardinality(), d, n_max)
    assert isinstance(estimate, OwEstimate)
    assert all(v == 1.0 for _, v in estimate.samples)
    assert estimate.limit_estimate == 1.0
    assert estimate.gap == 0.0
    rows = estimate.table_rows()
    assert [row[3] for row in rows] == [1.0] * n_max
    assert list(estimate.table_columns())[0] == "n"


def test_ow_limit_increments_in_dimension_one() -> None:
    """Test that increments are the difference quotients."""
    f = SetFunction(
        lambda s: 2.0 * len(s) + 1.0,
        [
            Property.MONOTONE,
            Property.NONNEGATIVE,
            Property.INVARIANT,
            Property.SUBADDITIVE,
        ],
    )
    estimate = ow_limit(f, 1, 5)
    assert estimate.increments[0] is None
    assert estimate.increments[1:] == [2.0, 2.0, 2.0, 2.0]
    assert estimate.increment_estimate == 2.0
    assert estimate.limit_estimate == pytest.approx(11.0 / 5.0)


def test_ow_limit_requires_declarations() -> None:
    """Test that an undeclared function is refused."""
    f = SetFunction(lambda s: float(len(s)), [Property.MONOTONE])
    with pytest.raises(PropertyDeclarationError) as exc_info:
        ow_limit(f, 1, 3)
    assert "nonnegative" in str(exc_info.value)


def test_ow_limit_of_uniform_entropy_is_constant() -> None:
    """Test ``H(alpha_F)/|F| = log k`` for uniform Bernoulli."""
    space = ShiftSpace.full_shift(1, 3)
    mu = InvariantMeasure.uniform(3)
    f = entropy_set_function(mu, standard_partition(space))
    estimate = ow_limit(f, 1, 6)
    for _, value in estimate.samples:
        assert value == pytest.approx(math.log(3.0), abs=1e-12)


def test_ow_limit_of_markov_entropy_is_monotone_on_doublings(
    golden_mean: ShiftSpace, parry_markov: InvariantMeasure
) -> None:
    """Test doubling-subsequence monotonicity for the Parry measure."""
    f = entropy_set_function(parry_markov, standard_partition(golden_mean))
    estimate = ow_limit(f, 1, 16)
    values = dict(estimate.samples)
    doubling = [values[n] for n in (1, 2, 4, 8, 16)]
    assert all(b <= a + 1e-12 for a, b in zip(doubling, doubling[1:]))
    assert estimate.increment_estimate == pytest.approx(
        parry_markov.entropy_rate_closed_form(), abs=1e-9
    )


def test_covering_inequality_is_tight_for_cardinality() -> None:
    """Test that a modular function has slack exactly 0."""
    E = folner_box(1, 6)
    parts = [FiniteSubset.of([i, (i + 1) % 6]) for i in range(6)]
    check = covering_inequality_check(SetFunction.cardinality(), E, parts, 2)
    assert check.passed
    assert check.slack == 0.0
    assert check.lhs == 6.0


def test_covering_inequality_for_markov_entropy(
    golden_mean: ShiftSpace, parry_markov: InvariantMeasure
) -> None:
    """Test the inequality for a strongly sub-additive entropy."""
    f = entropy_set_function(parry_markov, standard_partition(golden_mean))
    E = folner_box(1, 5)
    parts = [E - FiniteSubset.of([i]) for i in range(5)]
    check = covering_inequality_check(f, E, parts, 4)
    assert check.passed
    assert check.slack >= 0.0


def test_covering_inequality_rejects_bad_multiplicity() -> None:
    """Test that a non-uniform covering is refused."""
    E = folner_box(1, 3)
    parts = [FiniteSubset.of([0, 1]), FiniteSubset.of([1, 2])]
    with pytest.raises(InputError):
        covering_inequality_check(SetFunction.cardinality(), E, parts, 1)


def test_block_bound_for_cardinality() -> None:
    """Test the block bound with the boundary term."""
    bound = block_bound(
        SetFunction.cardinality(),
        folner_box(1, 8),
        FiniteSubset.of([0, 1]),
        K_bound=1.0,
    )
    assert bound.passed
    assert bound.lhs == 8.0
    assert bound.boundary == 1
    assert bound.rhs == 9.0


def test_gibbs_distribution_is_stable() -> None:
    """Test that a huge common shift does not change the vector."""
    a = np.array([math.log(3.0), 0.0])
    np.testing.assert_allclose(gibbs_distribution(a), [0.75, 0.25])
    np.testing.assert_allclose(
        gibbs_distribution(a + 1000.0), [0.75, 0.25], atol=1e-12
    )
    with pytest.raises(InputError):
        gibbs_distribution([])
    with pytest.raises(InputError):
        gibbs_distribution([math.inf, 0.0])


@pytest.mark.parametrize("shift", [0.0, 1000.0])
def test_gibbs_inequality_equality_case(shift: float) -> None:
    """Test equality exactly at the Gibbs vector on random weights."""
    rng = np.random.default_rng(42)
    for _ in range(100):
        k = int(rng.integers(2, 6))
        a = rng.uniform(-50.0, 50.0, size=k) + shift
        gibbs = gibbs_distribution(a)
        at_gibbs = gibbs_inequality(a, gibbs)
        assert at_gibbs.equality
        assert at_gibbs.lhs == pytest.approx(at_gibbs.rhs, abs=1e-9)

        other = rng.dirichlet(np.ones(k))
        away = gibbs_inequality(a, other)
        assert away.lhs <= away.rhs + 1e-9
        assert away.equality == bool(
            np.allclose(other, gibbs, rtol=0.0, atol=1e-12)
        )


def test_gibbs_inequality_validates_probabilities() -> None:
    """Test validation of the probability vector."""
    with pytest.raises(InputError):
        gibbs_inequality([0.0, 0.0], [0.5, 0.6])
    with pytest.raises(InputError):
        gibbs_inequality([0.0, 0.0], [1.0])


def test_gibbs_inequality_reports_violation(
    monkeypatch: pytest.MonkeyPatch,
) -> None:
    """Test that a computation above the bound is refused."""
    monkeypatch.setattr(
        "amenable_pressure.subadditive.logsumexp", lambda a: -1.0
    )
    with pytest.raises(InvariantViolation):
        gibbs_inequality([0.0, 0.0], [0.5, 0.5])
