"""Fuzzy measures on the subset lattice of a source set.

A measure assigns a weight to every subset (coalition) of the S fusion
sources. Subsets are encoded as bitmasks: bit i set means source i is in
the coalition, so subset containment is plain bitwise containment and the
value table is a flat array of length 2**S indexed by bitmask.

Sources are indexed from 0 throughout the Python API. JSON files and
printed coalitions number them from 1, the way people label sensors; the
serializers translate.

Two representations live here:

* BinaryFuzzyMeasure: values in {0, 1}. Equivalent to a monotone Boolean
  function with the empty set pinned to 0 and the full set pinned to 1;
  fully determined by its antichain of minimal winning coalitions.
* RealFuzzyMeasure: values in [0, 1] under the same three axioms
  (empty-set rule, normalization, monotonicity).

Measures are immutable values. Mutating operations return new measures and
always repair monotonicity, so anything constructed through this module
passes `validate`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import CapError, PinnedElementError, ValidationError

# Bit-array tables are capped at 2**24 entries; exhaustive enumeration is
# capped far lower because the number of measures explodes (see
# _MEASURE_COUNTS).
MAX_SOURCES = 24
ENUMERATION_CAP = 5

# Exact number of valid binary measures for small S (monotone set functions
# with both endpoints pinned). Used for cap-refusal messages and as frozen
# expectations in tests.
_MEASURE_COUNTS = {
    1: 1,
    2: 4,
    3: 18,
    4: 166,
    5: 7579,
    6: 7828352,
    7: 2414682040996,
    8: 56130437228687557907786,
    9: 286386577668298411128469151667598498812364,
}


def _check_source_count(source_count: int) -> int:
    if not isinstance(source_count, (int, np.integer)) or isinstance(source_count, bool):
        raise ValidationError(f"source_count must be an integer, got {source_count!r}")
    if not 1 <= source_count <= MAX_SOURCES:
        raise ValidationError(
            f"source_count must be in [1, {MAX_SOURCES}], got {source_count}"
        )
    return int(source_count)


def _masks(source_count: int) -> np.ndarray:
    return np.arange(1 << source_count, dtype=np.uint32)


@dataclass(frozen=True)
class SourceSet:
    """A subset of the S sources, encoded as a bitmask."""

    bitmask: int
    source_count: int

    def __post_init__(self):
        object.__setattr__(self, "source_count", _check_source_count(self.source_count))
        object.__setattr__(self, "bitmask", int(self.bitmask))
        if not 0 <= self.bitmask < (1 << self.source_count):
            raise ValidationError(
                f"bitmask {self.bitmask} out of range for {self.source_count} sources"
            )

    @classmethod
    def from_members(cls, members: Iterable[int], source_count: int) -> "SourceSet":
        mask = 0
        for i in members:
            if not 0 <= i < source_count:
                raise ValidationError(f"source index {i} out of range [0, {source_count})")
            mask |= 1 << i
        return cls(mask, source_count)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.source_count) if self.bitmask >> i & 1)

    def issubset(self, other: "SourceSet") -> bool:
        return self.bitmask & other.bitmask == self.bitmask

    def __len__(self) -> int:
        return self.bitmask.bit_count()

    def __repr__(self) -> str:
        return f"SourceSet({{{', '.join(map(str, self.members))}}}, S={self.source_count})"


def _as_mask(subset: Union[SourceSet, int, Iterable[int]], source_count: int) -> int:
    """Normalize a subset argument (SourceSet, bitmask, or member list) to a bitmask."""
    if isinstance(subset, SourceSet):
        if subset.source_count != source_count:
            raise ValidationError(
                f"subset is over {subset.source_count} sources, measure over {source_count}"
            )
        return subset.bitmask
    if isinstance(subset, (int, np.integer)) and not isinstance(subset, bool):
        mask = int(subset)
        if not 0 <= mask < (1 << source_count):
            raise ValidationError(f"bitmask {mask} out of range for {source_count} sources")
        return mask
    return SourceSet.from_members(subset, source_count).bitmask


class _MeasureBase:
    """Shared behaviour of the two measure representations."""

    source_count: int
    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    @property
    def full_set(self) -> int:
        return (1 << self.source_count) - 1

    def __getitem__(self, subset) -> float:
        return self.values[_as_mask(subset, self.source_count)].item()

    def __eq__(self, other) -> bool:
        return (
            type(self) is type(other)
            and self.source_count == other.source_count
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((type(self).__name__, self.source_count, self.values.tobytes()))


@dataclass(frozen=True, eq=False)
class BinaryFuzzyMeasure(_MeasureBase):
    """A {0,1}-valued set function on the 2**S subset lattice.

    The constructor checks only value domain and representation limits;
    axiom conformance is `validate`'s job so that invalid tables can still
    be built and diagnosed.
    """

    source_count: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source_count", _check_source_count(self.source_count))
        values = np.asarray(self.values)
        if values.ndim != 1:
            raise ValidationError(f"values must be 1-D, got shape {values.shape}")
        if values.size and not np.isin(values, (0, 1)).all():
            raise ValidationError("binary measure values must all be 0 or 1")
        values = values.astype(np.uint8)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def bit_count(self) -> int:
        """Number of coalitions with value 1."""
        return int(self.values.sum())

    def __repr__(self) -> str:
        if len(self.values) != 1 << self.source_count:
            return f"BinaryFuzzyMeasure(S={self.source_count}, len={len(self.values)})"
        coalitions = [c.members for c in minimal_winning_coalitions(self)]
        return f"BinaryFuzzyMeasure(S={self.source_count}, minimal_winning={coalitions})"


@dataclass(frozen=True, eq=False)
class RealFuzzyMeasure(_MeasureBase):
    """A [0,1]-valued set function on the 2**S subset lattice."""

    source_count: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source_count", _check_source_count(self.source_count))
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValidationError(f"values must be 1-D, got shape {values.shape}")
        if values.size and not ((values >= 0.0) & (values <= 1.0)).all():
            raise ValidationError("real measure values must all lie in [0, 1]")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __repr__(self) -> str:
        return f"RealFuzzyMeasure(S={self.source_count})"


Measure = Union[BinaryFuzzyMeasure, RealFuzzyMeasure]


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str  # "empty_set" | "normalization" | "monotonicity"
    subset_a: int
    subset_b: int | None = None

    def __str__(self) -> str:
        if self.axiom == "monotonicity":
            return (
                f"monotonicity violated: value({self.subset_a:#b}) > "
                f"value({self.subset_b:#b})"
            )
        return f"{self.axiom} rule violated at subset {self.subset_a:#b}"


@dataclass(frozen=True)
class ValidityReport:
    ok: bool
    violations: tuple[AxiomViolation, ...] = ()

    def __bool__(self) -> bool:
        return self.ok


def validate(measure: Measure) -> ValidityReport:
    """Check the three measure axioms; report each violated axiom once.

    The monotonicity check covers all (A, A | {i}) covering pairs, which is
    equivalent to full pairwise monotonicity, in O(S * 2**S). A wrong table
    length is a structural problem, not an axiom violation, and raises.
    """
    n = 1 << measure.source_count
    if len(measure.values) != n:
        raise ValidationError(
            f"values length {len(measure.values)} != 2**{measure.source_count} = {n}"
        )
    v = measure.values
    violations = []
    if v[0] != 0:
        violations.append(AxiomViolation("empty_set", 0))
    if v[n - 1] != 1:
        violations.append(AxiomViolation("normalization", n - 1))

    masks = _masks(measure.source_count)
    best: tuple[int, int] | None = None  # first offending (A, A | bit) pair
    for i in range(measure.source_count):
        bit = 1 << i
        lower = masks[(masks & bit) == 0]
        bad = np.flatnonzero(v[lower] > v[lower | bit])
        if bad.size:
            a = int(lower[bad[0]])
            if best is None or (a, a | bit) < best:
                best = (a, a | bit)
    if best is not None:
        violations.append(AxiomViolation("monotonicity", best[0], best[1]))
    return ValidityReport(not violations, tuple(violations))


# ---------------------------------------------------------------------------
# Construction helpers


def minimum_measure(source_count: int) -> BinaryFuzzyMeasure:
    """Only the full coalition wins; Choquet fusion degenerates to min."""
    source_count = _check_source_count(source_count)
    values = np.zeros(1 << source_count, dtype=np.uint8)
    values[-1] = 1
    return BinaryFuzzyMeasure(source_count, values)


def maximum_measure(source_count: int) -> BinaryFuzzyMeasure:
    """Every non-empty coalition wins; Choquet fusion degenerates to max."""
    source_count = _check_source_count(source_count)
    values = np.ones(1 << source_count, dtype=np.uint8)
    values[0] = 0
    return BinaryFuzzyMeasure(source_count, values)


def from_minimal_coalitions(source_count: int, coalitions: Iterable) -> BinaryFuzzyMeasure:
    """Upward closure of the given winning coalitions (plus the full set).

    Accepts SourceSets, bitmasks, or member iterables. The result is always
    a valid measure; the inputs need not form an antichain.
    """
    source_count = _check_source_count(source_count)
    n = 1 << source_count
    values = np.zeros(n, dtype=np.uint8)
    masks = _masks(source_count)
    for subset in coalitions:
        mask = _as_mask(subset, source_count)
        if mask == 0:
            raise ValidationError("the empty set cannot be a winning coalition")
        values[(masks & mask) == mask] = 1
    values[-1] = 1
    return BinaryFuzzyMeasure(source_count, values)


def set_with_repair(
    measure: BinaryFuzzyMeasure, subset, bit: int
) -> BinaryFuzzyMeasure:
    """Set one coalition's value and repair monotonicity by closure.

    Setting to 1 also raises every superset; setting to 0 also lowers every
    subset. The empty and full coalitions are pinned by the axioms and may
    not be targeted.
    """
    mask = _as_mask(subset, measure.source_count)
    full = measure.full_set
    if mask == 0 or mask == full:
        raise PinnedElementError(
            "the empty set (always 0) and the full set (always 1) cannot be reassigned"
        )
    if bit not in (0, 1):
        raise ValidationError(f"bit must be 0 or 1, got {bit!r}")
    masks = _masks(measure.source_count)
    values = measure.values.copy()
    if bit == 1:
        values[(masks & mask) == mask] = 1
    else:
        values[(masks | mask) == mask] = 0
    return BinaryFuzzyMeasure(measure.source_count, values)


def _by_cardinality(source_count: int) -> np.ndarray:
    """All bitmasks ordered by popcount, then numerically."""
    masks = _masks(source_count)
    return masks[np.lexsort((masks, np.bitwise_count(masks)))]


def sample_random(
    source_count: int, density: float = 0.5, seed=None
) -> BinaryFuzzyMeasure:
    """Random valid binary measure.

    Equivalent to visiting subsets in increasing-cardinality order and
    forcing a subset to 1 when any immediate subset already is, else
    drawing Bernoulli(density); implemented as the upward closure of one
    Bernoulli field, which has the same law. density -> 0 approaches the
    minimum measure, density -> 1 the maximum one.
    """
    source_count = _check_source_count(source_count)
    if not 0.0 < density < 1.0:
        raise ValidationError(f"density must lie strictly in (0, 1), got {density}")
    rng = np.random.default_rng(seed)
    n = 1 << source_count
    values = (rng.random(n) < density).astype(np.uint8)
    values[0] = 0
    masks = _masks(source_count)
    for i in range(source_count):  # subset-OR sweep: closes upward one bit at a time
        bit = 1 << i
        upper = masks[(masks & bit) != 0]
        values[upper] |= values[upper ^ bit]
    values[-1] = 1
    return BinaryFuzzyMeasure(source_count, values)


def sample_random_real(source_count: int, seed=None) -> RealFuzzyMeasure:
    """Random valid real measure via a lower-bound-respecting cardinality sweep.

    Each subset's value is uniform on [max over its immediate subsets, 1],
    so monotonicity holds by construction; endpoints are pinned exactly.
    """
    source_count = _check_source_count(source_count)
    rng = np.random.default_rng(seed)
    n = 1 << source_count
    u = rng.random(n)
    values = np.zeros(n, dtype=np.float64)
    order = _by_cardinality(source_count)
    card = np.bitwise_count(order)
    for k in range(1, source_count):
        layer = order[card == k]
        lo = np.zeros(len(layer))
        for i in range(source_count):
            bit = 1 << i
            inside = (layer & bit) != 0
            np.maximum(lo, np.where(inside, values[layer ^ bit], 0.0), out=lo)
        values[layer] = lo + u[layer] * (1.0 - lo)
    values[-1] = 1.0
    return RealFuzzyMeasure(source_count, values)


def enumerate_all(source_count: int, cap: int = ENUMERATION_CAP) -> Iterator[BinaryFuzzyMeasure]:
    """Yield every valid binary measure on S sources exactly once.

    Subsets are assigned in increasing-cardinality order; a subset whose
    immediate subsets are all 0 branches over {0, 1}, anything else is
    forced to 1 by monotonicity. Refuses S above `cap` with a count
    estimate, because the count grows roughly like 2**C(S, S//2).
    """
    source_count = _check_source_count(source_count)
    if source_count > cap:
        raise CapError(
            f"enumeration of S={source_count} refused (cap {cap}): "
            f"there are {_estimate_count(source_count)} valid measures"
        )
    n = 1 << source_count
    order = [int(m) for m in _by_cardinality(source_count)]
    positions = order[1:-1]  # empty and full set are pinned
    values = np.zeros(n, dtype=np.uint8)
    values[-1] = 1
    immediate_subsets = [
        [mask ^ (1 << i) for i in range(source_count) if mask >> i & 1]
        for mask in range(n)
    ]

    def rec(pos: int) -> Iterator[BinaryFuzzyMeasure]:
        if pos == len(positions):
            yield BinaryFuzzyMeasure(source_count, values.copy())
            return
        mask = positions[pos]
        if any(values[sub] for sub in immediate_subsets[mask]):
            values[mask] = 1
            yield from rec(pos + 1)
        else:
            values[mask] = 0
            yield from rec(pos + 1)
            values[mask] = 1
            yield from rec(pos + 1)
        values[mask] = 0

    return rec(0)


def count_all(source_count: int) -> int:
    """Exact count of valid binary measures, known up to S = 9."""
    try:
        return _MEASURE_COUNTS[source_count]
    except KeyError:
        raise CapError(f"exact measure count unknown for S={source_count}")


def _estimate_count(source_count: int):
    if source_count in _MEASURE_COUNTS:
        return _MEASURE_COUNTS[source_count]
    from math import comb

    return f"more than 2**{comb(source_count, source_count // 2)}"


def minimal_winning_coalitions(measure: BinaryFuzzyMeasure) -> list[SourceSet]:
    """The antichain of winning coalitions whose every immediate subset loses.

    Sorted by cardinality then bitmask. Its upward closure reconstructs the
    measure exactly, so this is a complete, human-readable summary of which
    source combinations the measure trusts.
    """
    v = measure.values
    masks = _masks(measure.source_count)
    winning = v == 1
    dominated = np.zeros_like(winning)
    for i in range(measure.source_count):
        bit = 1 << i
        has = (masks & bit) != 0
        dominated |= has & (v[masks ^ bit] == 1)
    minimal = winning & ~dominated & (masks != 0)
    found = masks[minimal]
    found = found[np.lexsort((found, np.bitwise_count(found)))]
    return [SourceSet(int(m), measure.source_count) for m in found]


# ---------------------------------------------------------------------------
# Serialization
#
# Full form:      {"source_count": S, "values": [v_0, ..., v_{2**S - 1}]}
# Antichain form: {"source_count": S, "minimal_winning": [[i, j, ...], ...]}
# (binary measures only). Binary values serialize as JSON integers, real
# values as JSON numbers; loading infers the kind from the value types.


def measure_to_dict(measure: Measure) -> dict:
    if isinstance(measure, BinaryFuzzyMeasure):
        values = [int(x) for x in measure.values]
    else:
        values = [float(x) for x in measure.values]
    return {"source_count": measure.source_count, "values": values}


def measure_to_antichain_dict(measure: BinaryFuzzyMeasure) -> dict:
    # JSON numbers sources from 1 (display convention); the API is 0-based
    if not isinstance(measure, BinaryFuzzyMeasure):
        raise ValidationError("the antichain form exists only for binary measures")
    return {
        "source_count": measure.source_count,
        "minimal_winning": [
            [i + 1 for i in c.members] for c in minimal_winning_coalitions(measure)
        ],
    }


def measure_from_dict(obj: dict) -> Measure:
    if not isinstance(obj, dict) or "source_count" not in obj:
        raise ValidationError("measure JSON must be an object with a source_count field")
    source_count = obj["source_count"]
    if "minimal_winning" in obj:
        coalitions = []
        for c in obj["minimal_winning"]:
            members = list(c)
            if not all(isinstance(i, int) and 1 <= i <= source_count for i in members):
                raise ValidationError(
                    f"minimal_winning members must be source numbers in 1..{source_count}, got {c}"
                )
            coalitions.append([i - 1 for i in members])
        return from_minimal_coalitions(source_count, coalitions)
    if "values" not in obj:
        raise ValidationError("measure JSON needs either values or minimal_winning")
    values = obj["values"]
    if not isinstance(values, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in values
    ):
        raise ValidationError("measure values must be a list of numbers")
    if all(isinstance(x, int) for x in values):
        return BinaryFuzzyMeasure(source_count, np.array(values))
    return RealFuzzyMeasure(source_count, np.array(values))


def save_measure(path, measure: Measure, antichain: bool = False) -> None:
    obj = measure_to_antichain_dict(measure) if antichain else measure_to_dict(measure)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def load_measure(path) -> Measure:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: not valid JSON: {e}") from e
    return measure_from_dict(obj)
