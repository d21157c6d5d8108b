"""Unit tests for cover-relative pressure."""

import math

import pytest

from amenable_pressure.config import Budgets
from amenable_pressure.exceptions import InputError
from amenable_pressure.lattice import FiniteSubset, folner_box
from amenable_pressure.potentials import Potential
from amenable_pressure.pressure import (
    SearchMode,
    TermPath,
    _general_term,
    pressure_limit,
    pressure_set_function,
    pressure_sup_over_covers,
    pressure_term,
    topological_entropy,
)
from amenable_pressure.subadditive import check_properties
from amenable_pressure.symbolic import (
    ClopenSet,
    Cover,
    ForbiddenPattern,
    ShiftSpace,
    standard_partition,
    trivial_cover,
)

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def _cyclic_cover(space: ShiftSpace) -> Cover:
    """Elements ``{x_0 in {i, i+1 mod k}}``."""
    origin = FiniteSubset.of([0])
    k = space.alphabet_size
    return Cover(
        space,
        origin,
        tuple(
            ClopenSet.from_symbol_sets(space, origin, [[i, (i + 1) % k]])
            for i in range(k)
        ),
    )


@pytest.fixture
def no_double_two() -> ShiftSpace:
    """Three symbols, ``22`` forbidden."""
    return ShiftSpace(
        1, 3, (ForbiddenPattern(FiniteSubset.of([0, 1]), (2, 2)),)
    )


def _overlapping(space: ShiftSpace) -> Cover:
    origin = FiniteSubset.of([0])
    return Cover(
        space,
        origin,
        (
            ClopenSet.from_symbol_sets(space, origin, [[0, 1]]),
            ClopenSet.from_symbol_sets(space, origin, [[1, 2]]),
        ),
    )


@pytest.mark.parametrize("d,k,n_max", [(1, 2, 16), (1, 3, 8), (2, 2, 4)])
def test_full_shift_entropy(d: int, k: int, n_max: int) -> None:
    """Test ``h_top = log k`` with the standard partition."""
    space = ShiftSpace.full_shift(d, k)
    report = topological_entropy(space, standard_partition(space), n_max)
    assert report.certified
    for value in report.normalized:
        assert value == pytest.approx(math.log(k), abs=1e-12)
    assert report.estimate == pytest.approx(math.log(k), abs=1e-12)
    assert report.terms[-1].path is TermPath.PRODUCT


def test_gibbs_pressure(
    full_two_shift: ShiftSpace, gibbs_potential: Potential
) -> None:
    """Test ``P = log(3 + 1)`` for the site potential ``(log 3, 0)``."""
    report = pressure_limit(
        full_two_shift,
        gibbs_potential,
        standard_partition(full_two_shift),
        14,
    )
    for value in report.normalized:
        assert value == pytest.approx(math.log(4.0), abs=1e-12)
    assert report.increments[0] is None
    assert report.increments[-1] == pytest.approx(math.log(4.0), abs=1e-12)


def test_offset_shifts_pressure_by_c(
    full_two_shift: ShiftSpace, gibbs_potential: Potential
) -> None:
    """Test that ``f_E + c|E|`` adds exactly ``c``."""
    alpha = standard_partition(full_two_shift)
    base = pressure_limit(full_two_shift, gibbs_potential, alpha, 6)
    shifted = pressure_limit(
        full_two_shift, gibbs_potential.shifted(0.7), alpha, 6
    )
    for a, b in zip(base.normalized, shifted.normalized):
        assert b - a == pytest.approx(0.7, abs=1e-12)


def test_overlapping_cover_entropy(overlapping_cover: Cover) -> None:
    """Test ``log 2`` for the cover ``{0,1}, {1,2}`` of the 3-shift."""
    report = topological_entropy(
        overlapping_cover.space, overlapping_cover, 10
    )
    assert report.certified
    for value in report.normalized:
        assert value == pytest.approx(math.log(2.0), abs=1e-12)
    assert report.terms[0].path is TermPath.PRODUCT


def test_golden_mean_entropy(golden_mean: ShiftSpace) -> None:
    """Test that increments converge to ``log`` of the golden ratio."""
    report = topological_entropy(
        golden_mean, standard_partition(golden_mean), 20
    )
    assert report.terms[-1].path is TermPath.PARTITION
    assert report.rows[0]["log_p"] == pytest.approx(math.log(2.0))
    assert abs(report.estimate - math.log(GOLDEN)) < 1e-3
    assert report.estimate == pytest.approx(
        golden_mean.transfer_entropy(), abs=1e-3
    )


def test_search_path_on_a_subshift(no_double_two: ShiftSpace) -> None:
    """Test the assignment search where the product form does not apply."""
    cover = _overlapping(no_double_two)
    zero = Potential.zero(no_double_two)
    one = pressure_term(no_double_two, zero, cover, FiniteSubset.of([0]))
    assert one.log_value == pytest.approx(math.log(2.0))
    two = pressure_term(no_double_two, zero, cover, folner_box(1, 2))
    assert two.path is TermPath.SEARCH
    assert two.certified
    assert two.log_value == pytest.approx(math.log(3.0))
    record = two.to_record()
    assert record["path"] == "search"
    assert sum(len(b) for b in record["blocks"]) == two.atom_count


def test_coarser_covers_have_smaller_pressure(
    no_double_two: ShiftSpace,
) -> None:
    """Test ``P(trivial) <= P(U) <= P(alpha)`` term by term."""
    zero = Potential.zero(no_double_two)
    E = folner_box(1, 4)
    values = [
        pressure_term(no_double_two, zero, U, E).log_value
        for U in (
            trivial_cover(no_double_two),
            _overlapping(no_double_two),
            standard_partition(no_double_two),
        )
    ]
    assert values[0] == 0.0
    assert values[0] <= values[1] <= values[2]
    assert values[2] == pytest.approx(
        math.log(no_double_two.count_admissible(E))
    )


def test_greedy_mode_is_an_upper_bound(no_double_two: ShiftSpace) -> None:
    cover = _overlapping(no_double_two)
    zero = Potential.zero(no_double_two)
    E = folner_box(1, 3)
    exact = pressure_term(no_double_two, zero, cover, E, SearchMode.EXACT)
    greedy = pressure_term(no_double_two, zero, cover, E, "greedy")
    assert greedy.log_value >= exact.log_value - 1e-12
    assert greedy.lower_bound <= exact.log_value + 1e-12


def test_cover_cap_falls_back_to_greedy(
    no_double_two: ShiftSpace, caplog: pytest.LogCaptureFixture
) -> None:
    """Test the warning when a cover exceeds the exact cap."""
    pressure_term(
        no_double_two,
        Potential.zero(no_double_two),
        _overlapping(no_double_two),
        folner_box(1, 2),
        budgets=Budgets(exact_cover_cap=1),
    )
    assert "exceed the exact cap" in caplog.text


def test_empty_set_and_mismatches(
    full_two_shift: ShiftSpace, golden_mean: ShiftSpace
) -> None:
    """Test ``P_{empty} = 1`` and the space check."""
    zero = Potential.zero(full_two_shift)
    alpha = standard_partition(full_two_shift)
    term = pressure_term(full_two_shift, zero, alpha, FiniteSubset.empty(1))
    assert term.log_value == 0.0
    assert term.path is TermPath.EMPTY
    with pytest.raises(InputError):
        pressure_term(golden_mean, zero, alpha, FiniteSubset.of([0]))


def test_sup_over_covers(full_two_shift: ShiftSpace) -> None:
    """Test that the finer partition wins and ties go to the first."""
    covers = {
        "trivial": trivial_cover(full_two_shift),
        "standard": standard_partition(full_two_shift),
        "again": standard_partition(full_two_shift),
    }
    result = pressure_sup_over_covers(
        full_two_shift, Potential.zero(full_two_shift), covers, 4
    )
    assert result.best_cover == "standard"
    assert result.estimate == pytest.approx(math.log(2.0))
    assert result.reports["trivial"].estimate == 0.0
    with pytest.raises(InputError):
        pressure_sup_over_covers(
            full_two_shift, Potential.zero(full_two_shift), {}, 2
        )


def test_pressure_set_function_properties(
    full_two_shift: ShiftSpace,
) -> None:
    """Test that ``E -> log P_E`` passes the property checks."""
    f = pressure_set_function(
        full_two_shift,
        Potential.zero(full_two_shift),
        standard_partition(full_two_shift),
    )
    assert f(folner_box(1, 3)) == pytest.approx(3 * math.log(2.0))
    records = check_properties(f, 1, 30, max_box=4, seed=0)
    assert all(r["verdict"] == "pass" for r in records)


def test_report_tables(full_two_shift: ShiftSpace) -> None:
    report = topological_entropy(
        full_two_shift, standard_partition(full_two_shift), 3
    )
    assert list(report.table_columns())[2] == "log_P"
    assert [row[0] for row in report.table_rows()] == [1, 2, 3]
    assert [r["n"] for r in report.term_records()] == [1, 2, 3]


@pytest.mark.parametrize(
    "k,n", [(3, 2), (3, 3), (4, 2), (4, 3), (5, 2), (5, 3)]
)
def test_one_site_covers_agree_with_the_join(k: int, n: int) -> None:
    """Test the product shortcut against the search over the join."""
    space = ShiftSpace.full_shift(1, k)
    zero = Potential.zero(space)
    cover = _cyclic_cover(space)
    budgets = Budgets(node_budget=20_000)
    E = folner_box(1, n)
    term = pressure_term(space, zero, cover, E, budgets=budgets)
    joined = _general_term(space, zero, cover, E, SearchMode.EXACT, budgets)
    assert term.lower_bound <= joined.log_value + 1e-12
    assert joined.lower_bound <= term.log_value + 1e-12
    if term.path is not TermPath.PRODUCT or joined.certified:
        assert term.log_value == pytest.approx(joined.log_value, abs=1e-12)


def test_loose_packing_bound_skips_the_product(
    caplog: pytest.LogCaptureFixture,
) -> None:
    """Test the 5-cycle cover, where ``3^2`` overshoots the optimum 8."""
    space = ShiftSpace.full_shift(1, 5)
    cover = _cyclic_cover(space)
    with caplog.at_level("DEBUG", logger="amenable_pressure.pressure"):
        term = pressure_term(
            space, Potential.zero(space), cover, folner_box(1, 2)
        )
    assert term.path is TermPath.SEARCH
    assert term.certified
    assert term.log_value == pytest.approx(math.log(8.0), abs=1e-12)
    assert "packing bound not tight" in caplog.text


def test_tight_packing_bound_keeps_the_product() -> None:
    """Test the 4-cycle cover, where ``{0, 2}`` packs as well as greedy."""
    space = ShiftSpace.full_shift(1, 4)
    term = pressure_term(
        space, Potential.zero(space), _cyclic_cover(space), folner_box(1, 3)
    )
    assert term.path is TermPath.PRODUCT
    assert term.certified
    assert term.log_value == pytest.approx(3 * math.log(2.0), abs=1e-12)
    assert term.lower_bound == pytest.approx(term.log_value, abs=1e-12)
