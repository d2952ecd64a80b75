"""Measure-space search: evolutionary training and the exhaustive oracle.

`train_bfm` runs an elitist evolutionary search over binary measures (the
production path), `train_real_fm` the same skeleton over real-valued
measures (the baseline used for timing comparisons), and
`train_exhaustive` scans every binary measure outright for small source
counts, serving as the global-optimum oracle.

The binary candidate space is finite (every measure has at most 2**S - 2
single-flip neighbours), which is what lets the binary search terminate by
exact convergence where the real-valued baseline keeps inching forward.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .data import Dataset, has_both_polarities
from .errors import CapError, ValidationError
from .measures import (
    ENUMERATION_CAP,
    BinaryFuzzyMeasure,
    Measure,
    RealFuzzyMeasure,
    enumerate_all,
    maximum_measure,
    measure_to_antichain_dict,
    measure_to_dict,
    minimum_measure,
    sample_random,
    sample_random_real,
    set_with_repair,
    validate,
)
from .objective import PreparedData, objective_batch, prepare
from .rng import substream

# When set, every measure entering a population is re-validated. Expensive;
# meant for debugging and the test suite, not production runs.
VALIDATE_POPULATION = False


@dataclass(frozen=True)
class EAConfig:
    """Evolutionary search settings.

    Each non-elite slot is filled by rank-selecting a parent and applying a
    small mutation (one element flipped or redrawn, with monotonicity
    repair) with probability small_mutation_rate, else a large mutation (a
    fresh random measure). The two rates must sum to 1.
    """

    population_size: int = 64
    elite_count: int = 4
    small_mutation_rate: float = 0.8
    large_mutation_rate: float = 0.2
    max_generations: int = 500
    stall_generations: int = 30
    fitness_tolerance: float = 1e-6
    rng_seed: int = 0
    time_cap_seconds: float | None = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population_size must be at least 2")
        if not 0 <= self.elite_count < self.population_size:
            raise ValidationError("elite_count must be in [0, population_size)")
        if min(self.small_mutation_rate, self.large_mutation_rate) < 0 or abs(
            self.small_mutation_rate + self.large_mutation_rate - 1.0
        ) > 1e-9:
            raise ValidationError("mutation rates must be non-negative and sum to 1")
        if self.max_generations < 1 or self.stall_generations < 1:
            raise ValidationError("generation limits must be positive")
        if self.fitness_tolerance < 0:
            raise ValidationError("fitness_tolerance must be >= 0")
        if self.time_cap_seconds is not None and self.time_cap_seconds <= 0:
            raise ValidationError("time_cap_seconds must be positive when set")

    def to_json_dict(self) -> dict:
        return {
            "population_size": self.population_size,
            "elite_count": self.elite_count,
            "small_mutation_rate": self.small_mutation_rate,
            "large_mutation_rate": self.large_mutation_rate,
            "max_generations": self.max_generations,
            "stall_generations": self.stall_generations,
            "fitness_tolerance": self.fitness_tolerance,
            "rng_seed": self.rng_seed,
            "time_cap_seconds": self.time_cap_seconds,
        }


@dataclass(frozen=True)
class TrainResult:
    best_measure: Measure
    best_objective: float
    generations_run: int
    wall_time_seconds: float
    objective_trace: tuple[float, ...]
    terminated_by: str  # converged | stalled | max_generations | time_cap

    def to_json_dict(self) -> dict:
        out = {
            "best_measure": measure_to_dict(self.best_measure),
            "best_objective": self.best_objective,
            "generations_run": self.generations_run,
            "wall_time_seconds": self.wall_time_seconds,
            "objective_trace": list(self.objective_trace),
            "terminated_by": self.terminated_by,
        }
        if isinstance(self.best_measure, BinaryFuzzyMeasure):
            out["best_measure_minimal_winning"] = measure_to_antichain_dict(
                self.best_measure
            )["minimal_winning"]
        return out


class _BinaryOps:
    """Representation-specific moves for the binary search."""

    def __init__(self, source_count: int, density: float = 0.5):
        self.source_count = source_count
        self.density = density
        self.n = 1 << source_count

    def seed_population(self, rng, size):
        pop = [minimum_measure(self.source_count), maximum_measure(self.source_count)]
        while len(pop) < size:
            pop.append(sample_random(self.source_count, self.density, rng))
        return pop[:size]

    def small_mutation(self, measure, rng):
        # flip one non-pinned element; closure repair keeps the result valid
        idx = int(rng.integers(1, self.n - 1))
        return set_with_repair(measure, idx, 0 if measure.values[idx] else 1)

    def large_mutation(self, rng):
        return sample_random(self.source_count, self.density, rng)

    def sort_key(self, measure, j):
        # equal objectives prefer sparser coalition structure, then a fixed
        # serialization order, so ranking is a total deterministic order
        return (j, measure.bit_count(), measure.values.tobytes())


class _RealOps:
    """Representation-specific moves for the real-valued baseline."""

    def __init__(self, source_count: int):
        self.source_count = source_count
        self.n = 1 << source_count

    def seed_population(self, rng, size):
        lo = np.zeros(self.n)
        lo[-1] = 1.0
        hi = np.ones(self.n)
        hi[0] = 0.0
        pop = [
            RealFuzzyMeasure(self.source_count, lo),
            RealFuzzyMeasure(self.source_count, hi),
        ]
        while len(pop) < size:
            pop.append(sample_random_real(self.source_count, rng))
        return pop[:size]

    def small_mutation(self, measure, rng):
        # redraw one element uniformly inside its monotonicity interval
        idx = int(rng.integers(1, self.n - 1))
        v = measure.values
        lo, hi = 0.0, 1.0
        for i in range(self.source_count):
            bit = 1 << i
            if idx & bit:
                lo = max(lo, float(v[idx ^ bit]))
            else:
                hi = min(hi, float(v[idx | bit]))
        values = v.copy()
        values[idx] = rng.uniform(lo, hi)
        return RealFuzzyMeasure(self.source_count, values)

    def large_mutation(self, rng):
        return sample_random_real(self.source_count, rng)

    def sort_key(self, measure, j):
        return (j, measure.values.tobytes())


def _rank_picks(rng, size: int, count: int) -> np.ndarray:
    """Linear ranking selection: weight size - rank, best rank first."""
    # inverse-CDF draws over weights size, size-1, ..., 1
    cum = np.cumsum(np.arange(size, 0, -1, dtype=float))
    u = rng.random(count) * cum[-1]
    return np.searchsorted(cum, u, side="right")


def _evolve(prepared: PreparedData, cfg: EAConfig, ops) -> TrainResult:
    t0 = time.perf_counter()
    rng_init = substream(cfg.rng_seed, "init")
    pop = ops.seed_population(rng_init, cfg.population_size)
    if VALIDATE_POPULATION:
        assert all(validate(m).ok for m in pop)
    js = objective_batch(pop, prepared)
    ranked = sorted(range(len(pop)), key=lambda i: ops.sort_key(pop[i], js[i]))
    pop = [pop[i] for i in ranked]
    js = js[ranked]

    trace = [float(js[0])]
    stall = 0
    gen = 0
    while True:
        if js[0] <= cfg.fitness_tolerance:
            terminated_by = "converged"
            break
        if gen >= cfg.max_generations:
            terminated_by = "max_generations"
            break
        if stall >= cfg.stall_generations:
            terminated_by = "stalled"
            break
        if (
            cfg.time_cap_seconds is not None
            and time.perf_counter() - t0 >= cfg.time_cap_seconds
        ):
            terminated_by = "time_cap"
            break

        rng = substream(cfg.rng_seed, "mutation", gen)
        n_children = cfg.population_size - cfg.elite_count
        parent_ranks = _rank_picks(rng, cfg.population_size, n_children)
        small = rng.random(n_children) < cfg.small_mutation_rate
        children = []
        for rank, is_small in zip(parent_ranks, small):
            if is_small:
                children.append(ops.small_mutation(pop[rank], rng))
            else:
                children.append(ops.large_mutation(rng))
        if VALIDATE_POPULATION:
            assert all(validate(m).ok for m in children)

        child_js = objective_batch(children, prepared)
        pop = pop[: cfg.elite_count] + children
        js = np.concatenate([js[: cfg.elite_count], child_js])
        ranked = sorted(range(len(pop)), key=lambda i: ops.sort_key(pop[i], js[i]))
        pop = [pop[i] for i in ranked]
        js = js[ranked]

        improvement = trace[-1] - float(js[0])
        stall = 0 if improvement > cfg.fitness_tolerance else stall + 1
        trace.append(float(js[0]))
        gen += 1

    return TrainResult(
        best_measure=pop[0],
        best_objective=float(js[0]),
        generations_run=gen,
        wall_time_seconds=time.perf_counter() - t0,
        objective_trace=tuple(trace),
        terminated_by=terminated_by,
    )


def _check_trainable(data: Dataset) -> None:
    if not has_both_polarities(data):
        raise ValidationError("training needs at least one positive and one negative bag")


def train_bfm(data: Dataset, cfg: EAConfig = EAConfig()) -> TrainResult:
    """Evolutionary search for the binary measure minimizing the objective."""
    _check_trainable(data)
    return _evolve(prepare(data), cfg, _BinaryOps(data.source_count))


def train_real_fm(data: Dataset, cfg: EAConfig = EAConfig()) -> TrainResult:
    """Same search skeleton over real-valued measures; the timing baseline."""
    _check_trainable(data)
    return _evolve(prepare(data), cfg, _RealOps(data.source_count))


def train_exhaustive(data: Dataset, cap: int = ENUMERATION_CAP) -> TrainResult:
    """Global optimum by scanning every valid binary measure.

    Ties resolve to the lowest serialization order (the value table read in
    bitmask index order). Refuses source counts above the enumeration cap.
    """
    t0 = time.perf_counter()
    prepared = prepare(data)
    best_measure = None
    best_key = None
    scanned = 0
    chunk: list[BinaryFuzzyMeasure] = []

    def flush():
        nonlocal best_measure, best_key
        if not chunk:
            return
        js = objective_batch(chunk, prepared)
        for m, j in zip(chunk, js):
            key = (float(j), m.values.tobytes())
            if best_key is None or key < best_key:
                best_key = key
                best_measure = m
        chunk.clear()

    for m in enumerate_all(data.source_count, cap=cap):
        chunk.append(m)
        scanned += 1
        if len(chunk) >= 512:
            flush()
    flush()

    return TrainResult(
        best_measure=best_measure,
        best_objective=best_key[0],
        generations_run=scanned,
        wall_time_seconds=time.perf_counter() - t0,
        objective_trace=(best_key[0],),
        terminated_by="converged",
    )
