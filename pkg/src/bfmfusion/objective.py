"""Bag-level min-max training objective over a candidate measure.

Each negative bag contributes the worst candidate set's best-case fused
confidence, squared: max over its candidate sets of (min over instances of
CI)^2. Each positive bag contributes its best candidate set's shortfall
from full confidence: min over its candidate sets of (max over instances
of CI - 1)^2. The total is the plain sum over bags. Zero total means every
negative candidate set can be explained by a fully suppressed matching and
every positive bag has a matching fused to exactly 1.

`prepare` factors out everything measure-independent (the sorted-difference
decomposition and the set/bag segment boundaries) so that evaluating many
measures against one dataset, as the evolutionary optimizer does, costs one
table gather per measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .choquet import sort_decomposition
from .data import Dataset
from .errors import ValidationError
from .measures import Measure


@dataclass(frozen=True)
class BagContribution:
    bag_index: int
    contribution: float
    selected_set: int  # candidate set realizing the outer max/min, first index on ties


@dataclass(frozen=True)
class ObjectiveBreakdown:
    total: float
    negative_term: float
    positive_term: float
    per_bag: tuple[BagContribution, ...]

    def to_json_dict(self) -> dict:
        return {
            "total": self.total,
            "negative_term": self.negative_term,
            "positive_term": self.positive_term,
            "per_bag": [
                {
                    "bag_index": c.bag_index,
                    "contribution": c.contribution,
                    "selected_set": c.selected_set,
                }
                for c in self.per_bag
            ],
        }


@dataclass(frozen=True)
class PreparedData:
    """Measure-independent compilation of a dataset for repeated evaluation."""

    source_count: int
    masks: np.ndarray        # (N, S) coalition bitmasks of the sorted decomposition
    diffs: np.ndarray        # (N, S) level differences
    set_starts: np.ndarray   # start of each candidate set in instance order
    bag_set_starts: np.ndarray  # start of each bag in candidate-set order
    sets_per_bag: np.ndarray
    labels: np.ndarray       # per bag, 0 or 1

    @property
    def n_bags(self) -> int:
        return len(self.labels)


def prepare(data: Dataset) -> PreparedData:
    X = data.instance_matrix()
    masks, diffs = sort_decomposition(X)
    set_sizes = [len(cs) for bag in data.bags for cs in bag.candidate_sets]
    sets_per_bag = np.array([len(bag.candidate_sets) for bag in data.bags])
    set_starts = np.concatenate([[0], np.cumsum(set_sizes)[:-1]]).astype(np.int64)
    bag_set_starts = np.concatenate([[0], np.cumsum(sets_per_bag)[:-1]]).astype(np.int64)
    return PreparedData(
        source_count=data.source_count,
        masks=masks,
        diffs=diffs,
        set_starts=set_starts,
        bag_set_starts=bag_set_starts,
        sets_per_bag=sets_per_bag,
        labels=data.labels(),
    )


def _as_prepared(data: Union[Dataset, PreparedData]) -> PreparedData:
    return data if isinstance(data, PreparedData) else prepare(data)


def _check_compatible(measure: Measure, prepared: PreparedData) -> None:
    if measure.source_count != prepared.source_count:
        raise ValidationError(
            f"measure covers {measure.source_count} sources, "
            f"dataset has {prepared.source_count}"
        )


def _set_extrema(ci: np.ndarray, prepared: PreparedData) -> tuple[np.ndarray, np.ndarray]:
    set_min = np.minimum.reduceat(ci, prepared.set_starts)
    set_max = np.maximum.reduceat(ci, prepared.set_starts)
    return set_min, set_max


def objective(measure: Measure, data: Union[Dataset, PreparedData]) -> ObjectiveBreakdown:
    """Evaluate the objective with a per-bag breakdown for diagnostics."""
    prepared = _as_prepared(data)
    _check_compatible(measure, prepared)
    ci = (prepared.diffs * measure.values[prepared.masks].astype(np.float64)).sum(axis=1)
    set_min, set_max = _set_extrema(ci, prepared)

    per_bag = []
    contributions = np.empty(prepared.n_bags)
    for b in range(prepared.n_bags):
        lo = prepared.bag_set_starts[b]
        hi = lo + prepared.sets_per_bag[b]
        if prepared.labels[b] == 0:
            vals = set_min[lo:hi] ** 2
            sel = int(np.argmax(vals))
        else:
            vals = (set_max[lo:hi] - 1.0) ** 2
            sel = int(np.argmin(vals))
        contributions[b] = vals[sel]
        per_bag.append(BagContribution(b, float(vals[sel]), sel))

    neg = float(contributions[prepared.labels == 0].sum())
    pos = float(contributions[prepared.labels == 1].sum())
    return ObjectiveBreakdown(
        total=neg + pos, negative_term=neg, positive_term=pos, per_bag=tuple(per_bag)
    )


def objective_batch(
    measures: Sequence[Measure], data: Union[Dataset, PreparedData]
) -> np.ndarray:
    """Objective totals for many measures at once; the optimizer's hot path.

    Produces exactly the numbers `objective(...).total` would, but in one
    gather over a stacked value table per generation.
    """
    prepared = _as_prepared(data)
    if len(measures) == 0:
        return np.empty(0)
    for m in measures:
        _check_compatible(m, prepared)
    G = np.stack([m.values for m in measures]).astype(np.float64)
    ci = (prepared.diffs[None, :, :] * G[:, prepared.masks]).sum(axis=2)
    set_min = np.minimum.reduceat(ci, prepared.set_starts, axis=1)
    set_max = np.maximum.reduceat(ci, prepared.set_starts, axis=1)
    # per-bag outer aggregation; (x - 1)^2 is decreasing on [0, 1], so the
    # min over sets of the positive shortfall is realized by the largest set max
    bag_minmax = np.maximum.reduceat(set_min, prepared.bag_set_starts, axis=1)
    bag_maxmax = np.maximum.reduceat(set_max, prepared.bag_set_starts, axis=1)
    neg = prepared.labels == 0
    contributions = np.where(neg, bag_minmax**2, (bag_maxmax - 1.0) ** 2)
    return contributions[:, neg].sum(axis=1) + contributions[:, ~neg].sum(axis=1)


def objective_total(measure: Measure, data: Union[Dataset, PreparedData]) -> float:
    """Objective total without the breakdown."""
    return float(objective_batch([measure], data)[0])
