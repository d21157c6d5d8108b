"""Unit tests for lattice subsets, boxes and tilings."""

import pytest

from amenable_pressure.exceptions import DimensionMismatchError, InputError
from amenable_pressure.lattice import (
    FiniteSubset,
    FolnerBoxSequence,
    box,
    folner_box,
    interior_core,
    invariance_defect,
    tile_centers,
)


def test_points_are_sorted_and_deduplicated() -> None:
    """Test that equal sets built in any order compare and hash equal."""
    a = FiniteSubset.of([(2, 0), (0, 1), (2, 0)])
    b = FiniteSubset.of([(0, 1), (2, 0)])
    assert a == b
    assert hash(a) == hash(b)
    assert a.points == ((0, 1), (2, 0))
    assert len(a) == 2


def test_bare_integers_are_one_dimensional() -> None:
    """Test that bare integers are accepted as points of Z."""
    F = FiniteSubset.of([3, 1, 2])
    assert F.dimension == 1
    assert F.points == ((1,), (2,), (3,))


def test_set_operators() -> None:
    """Test union, intersection, difference and symmetric difference."""
    A = FiniteSubset.of([0, 1, 2])
    B = FiniteSubset.of([2, 3])
    assert (A | B) == FiniteSubset.of([0, 1, 2, 3])
    assert (A & B) == FiniteSubset.of([2])
    assert (A - B) == FiniteSubset.of([0, 1])
    assert (A ^ B) == FiniteSubset.of([0, 1, 3])


def test_mixed_dimensions_are_rejected() -> None:
    """Test that combining lattices of different dimension raises."""
    with pytest.raises(DimensionMismatchError):
        FiniteSubset.of([0]) | FiniteSubset.of([(0, 0)])
    with pytest.raises(DimensionMismatchError):
        FiniteSubset.of([(0, 0), (1,)])


def test_translate_and_canonical() -> None:
    """Test that translates share a canonical form."""
    F = FiniteSubset.of([(0, 0), (1, 2)])
    G = F.translate((5, -3))
    assert G == FiniteSubset.of([(5, -3), (6, -1)])
    assert G.canonical() == F
    assert F.corner() == (0, 0)


def test_minkowski_sum() -> None:
    """Test the sum set of two intervals."""
    W = FiniteSubset.of([0, 1])
    E = FiniteSubset.of([0, 5])
    assert W.minkowski_sum(E) == FiniteSubset.of([0, 1, 5, 6])


def test_empty_set() -> None:
    """Test the empty subset."""
    empty = FiniteSubset.empty(2)
    assert empty.is_empty
    assert len(empty) == 0
    assert empty.canonical() == empty
    with pytest.raises(InputError):
        empty.corner()
    with pytest.raises(InputError):
        FiniteSubset.of([])


@pytest.mark.parametrize("d,n", [(1, 1), (1, 7), (2, 3), (3, 2)])
def test_folner_box_size(d: int, n: int) -> None:
    """Test that ``[0, n)^d`` has ``n**d`` points and is a box."""
    F = folner_box(d, n)
    assert len(F) == n**d
    assert F.is_box()
    assert F.bounding_box() == ((0,) * d, (n - 1,) * d)


def test_folner_box_rejects_bad_arguments() -> None:
    """Test that a zero side or dimension raises with the field name."""
    with pytest.raises(InputError) as exc_info:
        folner_box(1, 0)
    assert exc_info.value.field == "n"
    with pytest.raises(InputError):
        folner_box(0, 3)


def test_is_box() -> None:
    """Test box detection on a set with a hole."""
    assert box((0, 0), (2, 3)).is_box()
    assert not FiniteSubset.of([0, 2]).is_box()


def test_invariance_defect_decreases() -> None:
    """Test the Følner property of boxes for K = {0, 1}."""
    K = FiniteSubset.of([0, 1])
    defects = [invariance_defect(folner_box(1, n), K) for n in (1, 2, 4, 8)]
    assert defects == [1.0, 0.5, 0.25, 0.125]


def test_folner_sequence() -> None:
    """Test iteration over increasing boxes."""
    seq = FolnerBoxSequence.up_to(2, 3)
    assert len(seq) == 3
    assert [len(F) for _, F in seq] == [1, 4, 9]
    assert seq.sides == (1, 2, 3)
    with pytest.raises(InputError):
        FolnerBoxSequence(1, (2, 2))
    with pytest.raises(InputError):
        FolnerBoxSequence.up_to(1, 2, n_min=3)


def test_tile_centers_exact_fit() -> None:
    """Test that a box divisible by the tile is covered exactly."""
    tiling = tile_centers(folner_box(2, 6), folner_box(2, 3))
    assert len(tiling.centers) == 4
    assert tiling.covering == folner_box(2, 6)
    assert tiling.ratio == 1.0


def test_tile_centers_overhang() -> None:
    """Test that the covering overhangs a box not divisible by the tile."""
    tiling = tile_centers(folner_box(1, 7), folner_box(1, 3))
    assert tiling.centers == FiniteSubset.of([0, 3, 6])
    assert len(tiling.covering) == 9
    assert tiling.ratio == pytest.approx(9 / 7)


def test_tile_must_be_a_cube_at_origin() -> None:
    """Test that other tiles are refused."""
    with pytest.raises(InputError):
        tile_centers(folner_box(1, 4), FiniteSubset.of([1, 2]))
    with pytest.raises(InputError):
        tile_centers(folner_box(2, 4), box((0, 0), (1, 2)))


def test_interior_core() -> None:
    """Test the set of placements of B inside F."""
    F = folner_box(1, 5)
    B = FiniteSubset.of([0, 1])
    core = interior_core(F, B)
    assert core == FiniteSubset.of([1, 2, 3, 4])
    assert core.issubset(F)
