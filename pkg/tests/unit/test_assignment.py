"""Unit tests for the block assignment searches."""

import math
from typing import Iterator, List, Sequence

import numpy as np
import pytest

from amenable_pressure.assignment import (
    Assignment,
    minimize_entropy,
    minimize_max_weight,
)
from amenable_pressure.exceptions import BudgetExceededError, InputError

# Three atoms, any two of which share an element but not all three
TRIANGLE = [[0b011], [0b101], [0b110]]


def _set_partitions(size: int) -> Iterator[List[List[int]]]:
    if size == 0:
        yield []
        return
    for smaller in _set_partitions(size - 1):
        for i in range(len(smaller)):
            yield smaller[:i] + [smaller[i] + [size - 1]] + smaller[i + 1 :]
        yield smaller + [[size - 1]]


def _fits(keys: Sequence[Sequence[int]], block: Sequence[int]) -> bool:
    for column in range(len(keys[0])):
        state = -1
        for atom in block:
            state &= keys[atom][column]
        if state == 0:
            return False
    return True


def _brute_force(
    keys: Sequence[Sequence[int]], weights: Sequence[float], entropy: bool
) -> float:
    best = math.inf
    for blocks in _set_partitions(len(keys)):
        if not all(_fits(keys, b) for b in blocks):
            continue
        if entropy:
            masses = [sum(weights[a] for a in b) for b in blocks]
            value = -sum(m * math.log(m) for m in masses if m > 0)
        else:
            peaks = [max(math.exp(weights[a]) for a in b) for b in blocks]
            value = math.log(sum(peaks))
        best = min(best, value)
    return best


def test_partition_keys_give_singleton_blocks() -> None:
    """Test that disjoint atoms each get their own block."""
    keys = [[0b01, 0b01], [0b01, 0b10], [0b10, 0b01], [0b10, 0b10]]
    weights = [0.0, 1.0, 2.0, 3.0]
    result = minimize_max_weight(keys, weights)
    assert result.certified
    assert result.nodes == 0
    assert len(result.blocks) == 4
    assert result.value == pytest.approx(
        math.log(sum(math.exp(w) for w in weights)), abs=1e-12
    )
    assert result.lower_bound == result.value
    assert result.packing_tight


def test_overlapping_atoms_share_a_block() -> None:
    """Test the atoms {0}, {1}, {2} of the cover {0,1}, {1,2}."""
    result = minimize_max_weight([[0b01], [0b11], [0b10]], [0.0, 0.0, 0.0])
    assert result.certified
    assert result.value == pytest.approx(math.log(2.0), abs=1e-12)
    assert result.blocks == ((0, 1), (2,))
    assert result.block_of() == [0, 0, 1]


def test_search_certifies_when_packing_bound_is_loose() -> None:
    """Test branch and bound on a pairwise compatible triple."""
    greedy = minimize_max_weight(TRIANGLE, [0.0, 0.0, 0.0], exact=False)
    assert not greedy.certified
    assert greedy.value == pytest.approx(math.log(2.0))
    assert greedy.lower_bound == pytest.approx(0.0)

    exact = minimize_max_weight(TRIANGLE, [0.0, 0.0, 0.0])
    assert exact.certified
    assert exact.nodes > 0
    assert exact.value == pytest.approx(math.log(2.0))
    assert exact.lower_bound == exact.value
    # the proven optimum stays above the packing bound
    assert exact.packing_bound == pytest.approx(0.0)
    assert not exact.packing_tight


def test_search_beyond_cap_keeps_greedy(
    caplog: pytest.LogCaptureFixture,
) -> None:
    """Test that an oversized instance falls back to greedy with a warning."""
    result = minimize_max_weight(TRIANGLE, [0.0, 0.0, 0.0], atom_cap=2)
    assert not result.certified
    assert "exceed the exact cap" in caplog.text


def test_node_budget_leaves_result_uncertified() -> None:
    """Test that an exhausted node budget is reported."""
    result = minimize_max_weight(TRIANGLE, [0.0, 0.0, 0.0], node_budget=1)
    assert not result.certified
    assert result.value == pytest.approx(math.log(2.0))


def test_weights_scale_without_overflow() -> None:
    """Test that large log-weights are handled in log space."""
    result = minimize_max_weight([[1], [2]], [5000.0, 5000.0])
    assert result.value == pytest.approx(5000.0 + math.log(2.0))


def test_minus_infinity_weights() -> None:
    """Test atoms of zero weight."""
    result = minimize_max_weight([[1], [2]], [0.0, -math.inf])
    assert result.value == pytest.approx(0.0)
    empty = minimize_max_weight([[1], [2]], [-math.inf, -math.inf])
    assert empty.value == -math.inf
    assert empty.packing_tight
    assert empty.certified


def test_invalid_inputs() -> None:
    """Test validation of keys and weights."""
    with pytest.raises(InputError):
        minimize_max_weight([[1]], [0.0, 1.0])
    with pytest.raises(InputError):
        minimize_max_weight([[1]], [math.nan])
    with pytest.raises(InputError):
        minimize_max_weight([[1]], [math.inf])
    with pytest.raises(InputError):
        minimize_max_weight([1, 2], [0.0, 0.0])
    with pytest.raises(InputError):
        minimize_entropy([[1]], [-0.5])


@pytest.mark.parametrize("seed", range(20))
def test_max_weight_matches_brute_force(seed: int) -> None:
    """Test exact search against enumeration of all set partitions."""
    rng = np.random.default_rng(seed)
    size = int(rng.integers(2, 7))
    keys = rng.integers(1, 8, size=(size, 2)).tolist()
    weights = rng.normal(size=size).tolist()
    result = minimize_max_weight(keys, weights)
    assert result.certified
    assert result.value == pytest.approx(
        _brute_force(keys, weights, entropy=False), abs=1e-9
    )
    for block in result.blocks:
        assert _fits(keys, block)


@pytest.mark.parametrize("seed", range(20))
def test_entropy_matches_brute_force(seed: int) -> None:
    """Test exact entropy search against enumeration."""
    rng = np.random.default_rng(100 + seed)
    size = int(rng.integers(2, 7))
    keys = rng.integers(1, 8, size=(size, 2)).tolist()
    masses = rng.dirichlet(np.ones(size)).tolist()
    result = minimize_entropy(keys, masses)
    assert isinstance(result, Assignment)
    assert result.certified
    assert result.value == pytest.approx(
        _brute_force(keys, masses, entropy=True), abs=1e-9
    )
    greedy = minimize_entropy(keys, masses, exact=False)
    assert greedy.value >= result.value - 1e-12


def test_entropy_of_overlapping_atoms() -> None:
    """Test that the shared atom joins the heavier block."""
    result = minimize_entropy([[0b01], [0b11], [0b10]], [0.4, 0.2, 0.4])
    assert result.value == pytest.approx(
        -(0.6 * math.log(0.6) + 0.4 * math.log(0.4)), abs=1e-12
    )


def test_entropy_budgets() -> None:
    """Test that exact entropy refuses to exceed its caps."""
    with pytest.raises(BudgetExceededError):
        minimize_entropy(TRIANGLE, [0.5, 0.3, 0.2], atom_cap=2)
    with pytest.raises(BudgetExceededError):
        minimize_entropy(TRIANGLE, [0.5, 0.3, 0.2], node_budget=1)
    greedy = minimize_entropy(TRIANGLE, [0.5, 0.3, 0.2], exact=False)
    assert not greedy.certified
