"""Unit tests for shift spaces, clopen sets and covers."""

import math

import numpy as np
import pytest

from amenable_pressure.config import Budgets
from amenable_pressure.exceptions import (
    BudgetExceededError,
    DimensionMismatchError,
    InputError,
)
from amenable_pressure.lattice import FiniteSubset, folner_box
from amenable_pressure.symbolic import (
    ClopenSet,
    Cover,
    ForbiddenPattern,
    Partition,
    ShiftSpace,
    block_partition,
    generated_partition,
    join_over,
    joined_atoms,
    pull_back,
    refines,
    standard_partition,
    trivial_cover,
    u_star_partitions,
)

# Fibonacci numbers F_{n+2}: golden-mean words of length n
GOLDEN_COUNTS = [2, 3, 5, 8, 13, 21, 34, 55]


@pytest.mark.parametrize("d,k,n", [(1, 2, 5), (1, 3, 3), (2, 2, 2)])
def test_full_shift_counts(d: int, k: int, n: int) -> None:
    """Test that the full shift admits every pattern."""
    space = ShiftSpace.full_shift(d, k)
    arr = space.admissible_array(folner_box(d, n))
    assert arr.shape == (k ** (n**d), n**d)
    assert space.is_full_shift


def test_patterns_are_lexicographic() -> None:
    """Test the row order of an enumeration."""
    arr = ShiftSpace.full_shift(1, 2).admissible_array(folner_box(1, 2))
    assert arr.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert not arr.flags.writeable


def test_golden_mean_counts(golden_mean: ShiftSpace) -> None:
    """Test that golden-mean words are counted by Fibonacci numbers."""
    counts = [
        golden_mean.count_admissible(folner_box(1, n))
        for n in range(1, len(GOLDEN_COUNTS) + 1)
    ]
    assert counts == GOLDEN_COUNTS


def test_golden_mean_forbids_adjacent_ones(golden_mean: ShiftSpace) -> None:
    """Test admissibility of single patterns, also across gaps."""
    window = FiniteSubset.of([0, 1, 2])
    assert golden_mean.is_admissible(window, (1, 0, 1))
    assert not golden_mean.is_admissible(window, (0, 1, 1))
    gapped = FiniteSubset.of([0, 2])
    assert golden_mean.is_admissible(gapped, (1, 1))


def test_transfer_matrix_and_entropy(golden_mean: ShiftSpace) -> None:
    """Test the transfer matrix of the golden-mean shift."""
    np.testing.assert_array_equal(
        golden_mean.transfer_matrix(), [[1.0, 1.0], [1.0, 0.0]]
    )
    golden = (1.0 + math.sqrt(5.0)) / 2.0
    assert golden_mean.transfer_entropy() == pytest.approx(
        math.log(golden), abs=1e-12
    )


def test_transfer_matrix_needs_nearest_neighbour_rules() -> None:
    """Test that wider forbidden windows are refused."""
    space = ShiftSpace(
        1, 2, (ForbiddenPattern(FiniteSubset.of([0, 2]), (1, 1)),)
    )
    with pytest.raises(InputError):
        space.transfer_matrix()
    with pytest.raises(InputError):
        ShiftSpace.full_shift(2, 2).transfer_matrix()


def test_space_validation() -> None:
    """Test alphabet and forbidden-pattern validation."""
    with pytest.raises(InputError) as exc_info:
        ShiftSpace(1, 0)
    assert exc_info.value.field == "alphabet"
    with pytest.raises(InputError):
        ShiftSpace(1, 2, (ForbiddenPattern(FiniteSubset.of([0]), (2,)),))
    with pytest.raises(DimensionMismatchError):
        ShiftSpace(
            2, 2, (ForbiddenPattern(FiniteSubset.of([0]), (1,)),)
        )
    with pytest.raises(InputError):
        ForbiddenPattern(FiniteSubset.of([0, 1]), (1,))


def test_forbidden_windows_are_canonical() -> None:
    """Test that translated forbidden windows describe the same space."""
    a = ShiftSpace(1, 2, (ForbiddenPattern(FiniteSubset.of([3, 4]), (1, 1)),))
    assert a == ShiftSpace.golden_mean()


def test_pattern_budget_is_enforced() -> None:
    """Test that an oversized enumeration raises instead of truncating."""
    space = ShiftSpace.full_shift(1, 2)
    with pytest.raises(BudgetExceededError):
        space.admissible_array(folner_box(1, 12), budget=1000)


def test_clopen_set_from_symbol_sets(golden_mean: ShiftSpace) -> None:
    """Test that product sets are cut down to admissible patterns."""
    window = FiniteSubset.of([0, 1])
    B = ClopenSet.from_symbol_sets(golden_mean, window, [[1], [0, 1]])
    assert B.patterns == frozenset({(1, 0)})
    assert B.contains({(0,): 1, (1,): 0})
    assert not B.contains({(0,): 0, (1,): 0})
    with pytest.raises(InputError):
        B.contains({(0,): 1})


def test_clopen_rewindow(full_two_shift: ShiftSpace) -> None:
    """Test describing a cylinder on a larger window."""
    B = ClopenSet.cylinder(FiniteSubset.of([0]), (1,))
    wide = B.rewindow(full_two_shift, FiniteSubset.of([0, 1]))
    assert wide.patterns == frozenset({(1, 0), (1, 1)})
    with pytest.raises(InputError):
        B.rewindow(full_two_shift, FiniteSubset.of([1]))


def test_cover_validation(full_three_shift: ShiftSpace) -> None:
    """Test that a cover missing a symbol is refused on validation."""
    origin = FiniteSubset.of([0])
    cover = Cover(
        full_three_shift,
        origin,
        (ClopenSet.from_symbol_sets(full_three_shift, origin, [[0, 1]]),),
    )
    with pytest.raises(InputError) as exc_info:
        cover.validate()
    assert "[2]" in str(exc_info.value)


def test_partition_rejects_overlaps(overlapping_cover: Cover) -> None:
    """Test that overlapping elements are not a partition."""
    with pytest.raises(InputError):
        overlapping_cover.to_partition()


def test_standard_and_trivial_partitions(golden_mean: ShiftSpace) -> None:
    """Test the built-in partitions."""
    alpha = standard_partition(golden_mean)
    assert len(alpha) == 2
    trivial = trivial_cover(golden_mean)
    assert len(trivial) == 1
    assert trivial.window.is_empty
    assert len(block_partition(golden_mean, 3)) == 5


def test_pull_back_translates_windows(full_two_shift: ShiftSpace) -> None:
    """Test that pulling back by g shifts every window by g."""
    alpha = standard_partition(full_two_shift)
    pulled = pull_back(alpha, (3,))
    assert pulled.window == FiniteSubset.of([3])
    assert isinstance(pulled, Partition)
    assert pulled.elements[1].contains({(3,): 1})


def test_join_of_standard_partition(full_two_shift: ShiftSpace) -> None:
    """Test that the join over a box is the block partition."""
    alpha = standard_partition(full_two_shift)
    joined = join_over(alpha, folner_box(1, 3))
    assert len(joined) == 8
    assert joined.window == folner_box(1, 3)
    assert join_over(alpha, FiniteSubset.empty(1)) == trivial_cover(
        full_two_shift
    )


def test_join_of_overlapping_cover(overlapping_cover: Cover) -> None:
    """Test that the join of a two-element cover has 2^n elements."""
    joined = join_over(overlapping_cover, folner_box(1, 2))
    assert len(joined) == 4
    # The element {x0 in {0,1}, x1 in {1,2}} has 4 patterns
    assert sorted(len(e) for e in joined.elements) == [4, 4, 4, 4]


def test_join_budget(overlapping_cover: Cover) -> None:
    """Test that the join refuses to exceed its incidence budget."""
    with pytest.raises(BudgetExceededError):
        join_over(
            overlapping_cover, folner_box(1, 6), Budgets(join_budget=100)
        )


def test_generated_partition(overlapping_cover: Cover) -> None:
    """Test the atoms {0}, {1}, {2} of the overlapping cover."""
    generated = generated_partition(overlapping_cover)
    atoms = [sorted(e.patterns) for e in generated.partition.elements]
    assert atoms == [[(0,)], [(1,)], [(2,)]]
    np.testing.assert_array_equal(
        generated.membership, [[True, False], [True, True], [False, True]]
    )


def test_refines(overlapping_cover: Cover) -> None:
    """Test refinement between the standard partition and the cover."""
    space = overlapping_cover.space
    alpha = standard_partition(space)
    assert refines(alpha, overlapping_cover)
    assert not refines(overlapping_cover, alpha)
    assert refines(alpha, trivial_cover(space))


def test_u_star_partitions(overlapping_cover: Cover) -> None:
    """Test the two partitions obtained by assigning the shared atom."""
    partitions = u_star_partitions(overlapping_cover)
    assert len(partitions) == 2
    blocks = [
        sorted(sorted(e.patterns) for e in p.elements) for p in partitions
    ]
    assert blocks == [
        [[(0,), (1,)], [(2,)]],
        [[(0,)], [(1,), (2,)]],
    ]
    for alpha in partitions:
        assert refines(alpha, overlapping_cover)
    with pytest.raises(BudgetExceededError):
        u_star_partitions(overlapping_cover, cap=1)


def test_joined_atoms_of_partition(full_two_shift: ShiftSpace) -> None:
    """Test that a partition gives pairwise disjoint atoms."""
    atoms = joined_atoms(standard_partition(full_two_shift), folner_box(1, 4))
    assert atoms.atom_count == 16
    assert atoms.pairwise_disjoint
    assert atoms.patterns.shape == (16, 4)


def test_joined_atoms_with_extra_sites(overlapping_cover: Cover) -> None:
    """Test atoms of an overlapping cover with extra sites."""
    atoms = joined_atoms(
        overlapping_cover,
        folner_box(1, 2),
        extra=FiniteSubset.of([5]),
    )
    assert atoms.domain == FiniteSubset.of([0, 1, 5])
    assert len(atoms.patterns) == 27
    assert atoms.atom_count == 9
    assert not atoms.pairwise_disjoint
    # Rows differing only at the extra site share an atom
    assert atoms.atom_of_row[0] == atoms.atom_of_row[1]


def test_joined_atoms_over_empty_set(full_two_shift: ShiftSpace) -> None:
    """Test the single atom of the empty join."""
    atoms = joined_atoms(
        standard_partition(full_two_shift), FiniteSubset.empty(1)
    )
    assert atoms.atom_count == 1
    assert atoms.patterns.shape == (1, 0)
