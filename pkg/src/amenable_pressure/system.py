"""System-description files.

A system file is one JSON document holding the shift space, the named
covers, the potential and the named invariant measures of a job. Every
validation failure names the dotted field path and the file it came from.
"""

import json
import logging
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence

from amenable_pressure.exceptions import InputError
from amenable_pressure.lattice import FiniteSubset
from amenable_pressure.measures import InvariantMeasure, MeasureKind
from amenable_pressure.potentials import Potential, PotentialKind
from amenable_pressure.symbolic import (
    ClopenSet,
    Cover,
    ForbiddenPattern,
    ShiftSpace,
    standard_partition,
)
from amenable_pressure.types import (
    CoverJSON,
    ForbiddenJSON,
    MeasureJSON,
    PotentialJSON,
    SystemJSON,
)

logger = logging.getLogger(__name__)

BUNDLED_DIR = Path(__file__).parent / "systems"


@contextmanager
def _at(path: str, location: Optional[str]) -> Iterator[None]:
    """Re-raise input errors with ``path`` prepended to their field."""
    try:
        yield
    except InputError as e:
        if e.location is not None:
            raise
        dotted = path
        if e.field:
            sep = "" if e.field.startswith("[") or not path else "."
            dotted = f"{path}{sep}{e.field}"
        raise type(e)(e.message, field=dotted, location=location) from e


def _require(data: Mapping[str, Any], key: str, kind: type) -> Any:
    if key not in data:
        raise InputError("missing", field=key)
    value = data[key]
    if kind is int and isinstance(value, bool):
        raise InputError("expected an integer", field=key)
    if kind is float and isinstance(value, int) and not isinstance(
        value, bool
    ):
        return float(value)
    if not isinstance(value, kind):
        raise InputError(f"expected {kind.__name__}", field=key)
    return value


def _points(raw: Any, dimension: int) -> FiniteSubset:
    if not isinstance(raw, list):
        raise InputError("expected a list of points")
    points: List[tuple[int, ...]] = []
    for i, point in enumerate(raw):
        if isinstance(point, bool):
            raise InputError("expected a point", field=f"[{i}]")
        if isinstance(point, int):
            if dimension != 1:
                raise InputError(
                    "bare integers are points only in dimension 1",
                    field=f"[{i}]",
                )
            points.append((point,))
            continue
        if (
            not isinstance(point, list)
            or len(point) != dimension
            or not all(
                isinstance(c, int) and not isinstance(c, bool) for c in point
            )
        ):
            raise InputError(
                f"expected {dimension} integer coordinates", field=f"[{i}]"
            )
        points.append(tuple(point))
    if len(set(points)) != len(points):
        raise InputError("repeated point")
    return FiniteSubset(dimension, tuple(points))


def _symbols(raw: Any, k: int) -> List[int]:
    if not isinstance(raw, list) or not all(
        isinstance(s, int) and not isinstance(s, bool) for s in raw
    ):
        raise InputError("expected a list of symbols")
    for s in raw:
        if not 0 <= s < k:
            raise InputError(f"symbol {s} outside the alphabet [0, {k})")
    return list(raw)


def _ordered(window_json: List[Any], window: FiniteSubset) -> List[int]:
    """Position of each sorted window point in the order the file gives."""
    given = [
        (p,) if isinstance(p, int) else tuple(p) for p in window_json
    ]
    return [given.index(p) for p in window.points]


def parse_space(data: Mapping[str, Any]) -> ShiftSpace:
    """The shift space of a system file."""
    d = _require(data, "dimension", int)
    k = _require(data, "alphabet", int)
    raw = data.get("forbidden", [])
    if not isinstance(raw, list):
        raise InputError("expected a list", field="forbidden")
    forbidden: List[ForbiddenPattern] = []
    for i, entry in enumerate(raw):
        with _at(f"forbidden[{i}]", None):
            if not isinstance(entry, dict):
                raise InputError("expected an object")
            window_json = _require(entry, "window", list)
            with _at("window", None):
                window = _points(window_json, d)
            raw_pattern = _require(entry, "pattern", list)
            with _at("pattern", None):
                pattern = _symbols(raw_pattern, k)
                if len(pattern) != len(window_json):
                    raise InputError(
                        f"{len(pattern)} symbols for {len(window_json)} "
                        "sites"
                    )
            order = _ordered(window_json, window)
            forbidden.append(
                ForbiddenPattern(window, tuple(pattern[j] for j in order))
            )
    return ShiftSpace(d, k, tuple(forbidden))


def parse_cover(space: ShiftSpace, data: Any) -> Cover:
    """A cover given by per-site symbol sets, validated against ``space``."""
    if not isinstance(data, dict):
        raise InputError("expected an object")
    window_json = _require(data, "window", list)
    with _at("window", None):
        window = _points(window_json, space.dimension)
    order = _ordered(window_json, window)
    raw = _require(data, "elements", list)
    if not raw:
        raise InputError("a cover needs at least one element", "elements")
    elements: List[ClopenSet] = []
    for i, element in enumerate(raw):
        with _at(f"elements[{i}]", None):
            if not isinstance(element, list) or len(element) != len(window):
                raise InputError(
                    f"expected {len(window)} symbol sets, one per site"
                )
            sets = [
                _symbols(element[j], space.alphabet_size) for j in order
            ]
            elements.append(ClopenSet.from_symbol_sets(space, window, sets))
    cover = Cover(space, window, tuple(elements))
    cover.validate()
    return cover


def parse_potential(space: ShiftSpace, data: Any) -> Potential:
    if not isinstance(data, dict):
        raise InputError("expected an object")
    kind = _require(data, "kind", str)
    offset = _require(data, "offset", float) if "offset" in data else 0.0
    window_json = _require(data, "window", list)
    with _at("window", None):
        window = _points(window_json, space.dimension)
    if _ordered(window_json, window) != list(range(len(window))):
        raise InputError(
            "window points must be listed in lexicographic order",
            field="window",
        )
    if kind == PotentialKind.ADDITIVE.value:
        return Potential.additive(
            space, window, _require(data, "table", list), offset
        )
    if kind == PotentialKind.MATRIX.value:
        return Potential.matrix(
            space, window, _require(data, "matrices", list), offset
        )
    raise InputError(
        f"unknown kind {kind!r}, expected additive or matrix", field="kind"
    )


def parse_measure(space: ShiftSpace, data: Any) -> InvariantMeasure:
    if not isinstance(data, dict):
        raise InputError("expected an object")
    kind = _require(data, "kind", str)
    if kind == MeasureKind.BERNOULLI.value:
        mu = InvariantMeasure.bernoulli(
            _require(data, "p", list), space.dimension
        )
    elif kind == MeasureKind.MARKOV.value:
        if space.dimension != 1:
            raise InputError(
                "Markov measures need dimension 1", field="kind"
            )
        mu = InvariantMeasure.markov(
            _require(data, "P", list), data.get("pi")
        )
    else:
        raise InputError(
            f"unknown kind {kind!r}, expected bernoulli or markov",
            field="kind",
        )
    if mu.alphabet_size != space.alphabet_size:
        raise InputError(
            f"{mu.alphabet_size} symbols, the space has "
            f"{space.alphabet_size}",
            field="p" if kind == MeasureKind.BERNOULLI.value else "P",
        )
    return mu


def _cover_json(space: ShiftSpace, cover: Cover) -> CoverJSON:
    """Write a cover whose elements are products of symbol sets."""
    window = cover.window
    elements: List[List[List[int]]] = []
    for i, element in enumerate(cover.elements):
        sets = [
            sorted({p[j] for p in element.patterns})
            for j in range(len(window))
        ]
        if ClopenSet.from_symbol_sets(space, window, sets) != element:
            raise InputError(
                "element is not a product of symbol sets",
                field=f"elements[{i}]",
            )
        elements.append(sets)
    return {"window": window.to_json(), "elements": elements}


@dataclass
class SystemDescription:
    """Everything a job reads from its system file.

    Attributes:
        space: Shift space
        covers: Named covers, in file order
        potential: Potential family; the zero potential when omitted
        measures: Named invariant measures, in file order
        source: File the description was read from, if any
    """

    space: ShiftSpace
    covers: Dict[str, Cover]
    potential: Potential
    measures: Dict[str, InvariantMeasure] = field(default_factory=dict)
    source: Optional[str] = None

    def cover(self, name: Optional[str] = None) -> Cover:
        """A named cover, or the first one."""
        if name is None:
            return next(iter(self.covers.values()))
        if name not in self.covers:
            raise InputError(
                f"no cover named {name!r}; have {sorted(self.covers)}",
                field="covers",
                location=self.source,
            )
        return self.covers[name]

    def to_json(self) -> SystemJSON:
        forbidden: List[ForbiddenJSON] = [
            {"window": fp.window.to_json(), "pattern": list(fp.pattern)}
            for fp in self.space.forbidden
        ]
        covers: Dict[str, CoverJSON] = {}
        for name, cover in self.covers.items():
            with _at(f"covers.{name}", self.source):
                covers[name] = _cover_json(self.space, cover)
        potential: PotentialJSON = self.potential.to_json()
        measures: Dict[str, MeasureJSON] = {
            name: mu.to_json() for name, mu in self.measures.items()
        }
        return {
            "dimension": self.space.dimension,
            "alphabet": self.space.alphabet_size,
            "forbidden": forbidden,
            "covers": covers,
            "potential": potential,
            "measures": measures,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SystemDescription):
            return NotImplemented
        return self.to_json() == other.to_json()


def parse_system(
    data: Any, location: Optional[str] = None
) -> SystemDescription:
    """Validate a decoded system document.

    Args:
        data: Decoded JSON
        location: File name used in error messages

    Returns:
        SystemDescription: The validated description

    Raises:
        InputError: Naming the offending field and ``location``
    """
    with _at("", location):
        if not isinstance(data, dict):
            raise InputError("expected a JSON object at the top level")
        space = parse_space(data)
    raw_covers = data.get("covers")
    covers: Dict[str, Cover] = {}
    if raw_covers is None:
        covers["standard"] = standard_partition(space)
    else:
        if not isinstance(raw_covers, dict) or not raw_covers:
            raise InputError(
                "expected a non-empty object", "covers", location
            )
        for name, entry in raw_covers.items():
            with _at(f"covers.{name}", location):
                covers[name] = parse_cover(space, entry)
    if "potential" in data:
        with _at("potential", location):
            potential = parse_potential(space, data["potential"])
    else:
        potential = Potential.zero(space)
    raw_measures = data.get("measures", {})
    if not isinstance(raw_measures, dict):
        raise InputError("expected an object", "measures", location)
    measures: Dict[str, InvariantMeasure] = {}
    for name, entry in raw_measures.items():
        with _at(f"measures.{name}", location):
            measures[name] = parse_measure(space, entry)
    logger.debug(
        "Parsed system: d=%d, k=%d, %d covers, %d measures",
        space.dimension,
        space.alphabet_size,
        len(covers),
        len(measures),
    )
    return SystemDescription(space, covers, potential, measures, location)


def load_system(path: Path | str) -> SystemDescription:
    """Read and validate a system file.

    Raises:
        InputError: If the file is missing, is not JSON or is invalid
    """
    path = Path(path)
    location = str(path)
    logger.info("Loading system from %s", location)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise InputError("file not found", location=location) from e
    except json.JSONDecodeError as e:
        raise InputError(
            f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}",
            location=location,
        ) from e
    return parse_system(data, location)


def bundled_system(name: str) -> SystemDescription:
    """One of the system files shipped with the package."""
    path = BUNDLED_DIR / f"{name}.json"
    if not path.exists():
        raise InputError(
            f"no bundled system {name!r}; have {bundled_names()}"
        )
    return load_system(path)


def bundled_names() -> Sequence[str]:
    return sorted(p.stem for p in BUNDLED_DIR.glob("*.json"))


def dump_system(desc: SystemDescription, path: Path | str) -> Path:
    """Write a description so that ``load_system`` gives it back."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(desc.to_json(), f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug("Wrote system to %s", path)
    return path
