"""NSGA-II over genomes with stagnation-based early stopping."""
from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple, Sequence

import numpy as np

from .search_space import Genome, pointwise_mutate, sample_genome, uniform_crossover

log = logging.getLogger(__name__)

# stream tags keep the seed families of different consumers apart
STREAM_VARIATION = 0
STREAM_TRAINING = 1


def derive_seed(*keys: int) -> int:
    """Deterministic 63-bit seed from a tuple of non-negative integers."""
    state = np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)
    return int(state[0]) & ((1 << 63) - 1)


def derived_rng(*keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(k) for k in keys]))


class ObjectiveVector(NamedTuple):
    f_q: int
    err: float
    params: int


class Evaluation(NamedTuple):
    """Evaluator result carrying side information alongside the objectives."""
    objectives: tuple
    info: dict


def _as_evaluation(result) -> Evaluation:
    if isinstance(result, Evaluation):
        return Evaluation(tuple(result.objectives), dict(result.info))
    return Evaluation(tuple(result), {})


@dataclass
class Individual:
    genome: Genome
    objectives: tuple
    rank: int = -1
    crowding: float = 0.0
    failed: bool = False
    info: dict = field(default_factory=dict)


@dataclass
class SearchConfig:
    pop_size: int = 20
    generations: int = 8
    p_c: float = 0.8
    p_m: float = 0.2
    stagnation: int = 2
    seed: int = 0
    top_k: int = 5

    def __post_init__(self):
        if self.pop_size < 2:
            raise ValueError("pop_size must be >= 2")
        if self.generations < 1:
            raise ValueError("generations must be >= 1")
        if self.stagnation < 1:
            raise ValueError("stagnation must be >= 1")
        for name in ("p_c", "p_m"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")


@dataclass
class GenerationLog:
    generation: int
    evaluated: list[Individual]   # with rank/crowding from the sort that first ranked them
    population: list[Individual]  # survivors after environmental selection
    front: list[tuple]            # rank-0 objective tuples of the population, sorted
    stagnation: int


@dataclass
class SearchResult:
    generations: list[GenerationLog]
    front: list[Individual]
    top_k: list[Individual]
    compromise: Individual
    population: list[Individual]
    generations_run: int
    stopped_early: bool
    failures: int = 0
    evaluations: int = 0
    cache_hits: int = 0
    failed_genomes: list[Genome] = field(default_factory=list)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Pareto dominance for minimisation."""
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def fast_non_dominated_sort(pop: Sequence[Individual]) -> list[list[int]]:
    """Partition ``pop`` into fronts of indices and write each individual's rank.

    Indices within a front are in ascending order.
    """
    if not pop:
        raise ValueError("cannot sort an empty population")
    f = np.array([ind.objectives for ind in pop], dtype=float)
    le = np.all(f[:, None, :] <= f[None, :, :], axis=2)
    lt = np.any(f[:, None, :] < f[None, :, :], axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    n_dominators = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(n_dominators == 0)
    while current.size:
        fronts.append(current.tolist())
        n_dominators[current] = -1
        n_dominators -= dom[current].sum(axis=0)
        current = np.flatnonzero(n_dominators == 0)
    for rank, front in enumerate(fronts):
        for i in front:
            pop[i].rank = rank
    return fronts


def crowding_distance(front: Sequence[Individual]) -> None:
    """Assign NSGA-II crowding distances in place; boundary points get +inf."""
    if not front:
        raise ValueError("front must be nonempty")
    n = len(front)
    dist = np.zeros(n)
    if n <= 2:
        dist[:] = math.inf
    else:
        f = np.array([ind.objectives for ind in front], dtype=float)
        for m in range(f.shape[1]):
            order = np.argsort(f[:, m], kind="stable")
            lo, hi = f[order[0], m], f[order[-1], m]
            dist[order[0]] = dist[order[-1]] = math.inf
            if hi == lo:
                continue
            gaps = (f[order[2:], m] - f[order[:-2], m]) / (hi - lo)
            dist[order[1:-1]] += gaps
    for ind, d in zip(front, dist):
        ind.crowding = float(d)


def rank_population(pop: Sequence[Individual]) -> list[list[int]]:
    fronts = fast_non_dominated_sort(pop)
    for front in fronts:
        crowding_distance([pop[i] for i in front])
    return fronts


def crowded_better(a: Individual, b: Individual) -> bool:
    """True when ``a`` strictly beats ``b`` under the crowded-comparison operator."""
    return a.rank < b.rank or (a.rank == b.rank and a.crowding > b.crowding)


def crowded_tournament_select(pop: Sequence[Individual], rng: np.random.Generator) -> Individual:
    i, j = rng.integers(len(pop), size=2)
    first, second = pop[i], pop[j]
    return second if crowded_better(second, first) else first


def compromise_point(front: Sequence[Individual]) -> Individual:
    """Front member with the smallest Euclidean norm after per-objective max scaling."""
    if not front:
        raise ValueError("front must be nonempty")
    f = np.array([ind.objectives for ind in front], dtype=float)
    peak = f.max(axis=0)
    scaled = np.divide(f, peak, out=np.zeros_like(f), where=peak > 0)
    return front[int(np.argmin(np.linalg.norm(scaled, axis=1)))]


def front_tuples(pop: Sequence[Individual]) -> list[tuple]:
    return sorted(tuple(ind.objectives) for ind in pop if ind.rank == 0)


def top_k(pop: Sequence[Individual], k: int) -> list[Individual]:
    return sorted(pop, key=lambda ind: (ind.rank, -ind.crowding))[:k]


def environmental_selection(union: list[Individual], size: int) -> list[Individual]:
    """Fill the next population front by front; truncate the overflowing front by crowding."""
    fronts = rank_population(union)
    chosen: list[Individual] = []
    for front in fronts:
        members = [union[i] for i in front]
        if len(chosen) + len(members) <= size:
            chosen.extend(members)
        else:
            members.sort(key=lambda ind: -ind.crowding)
            chosen.extend(members[:size - len(chosen)])
            break
    return chosen


class _Guarded:
    """Evaluator wrapper that turns exceptions into ``None`` (picklable for process pools)."""

    def __init__(self, evaluator):
        self.evaluator = evaluator

    def __call__(self, genome):
        try:
            return _as_evaluation(self.evaluator(genome))
        except Exception as exc:  # a single bad candidate must not end the search
            log.warning("evaluation failed for %s: %s", genome, exc)
            return None


def _copy(ind: Individual) -> Individual:
    return Individual(ind.genome, ind.objectives, ind.rank, ind.crowding, ind.failed, ind.info)


def run_search(cfg: SearchConfig,
               evaluator: Callable[[Genome], Sequence[float]],
               fallback: Callable[[Genome], Sequence[float]] | None = None,
               map_fn: Callable[[Callable, Iterable], Iterable] = map,
               progress: Callable[[str], None] | None = None) -> SearchResult:
    """Run NSGA-II from a random population until ``cfg.generations`` or stagnation.

    ``evaluator`` maps a genome to its objective tuple (or an :class:`Evaluation`)
    and must be deterministic.
    Results are cached per genome. When the evaluator raises, ``fallback`` supplies
    a worst-case objective tuple instead; without a fallback the error propagates.
    ``map_fn`` may dispatch evaluations to a worker pool; results are consumed in
    submission order so scheduling never affects the outcome.
    """
    cache: dict[Genome, Evaluation] = {}
    failed: set[Genome] = set()
    stats = Counter()
    guarded = _Guarded(evaluator) if fallback is not None else evaluator

    def evaluate(genomes: list[Genome]) -> list[Individual]:
        todo = list(dict.fromkeys(g for g in genomes if g not in cache))
        stats["cache_hits"] += len(genomes) - len(todo)
        for g, result in zip(todo, map_fn(guarded, todo)):
            stats["evaluations"] += 1
            if result is None:
                failed.add(g)
                result = fallback(g)
            cache[g] = _as_evaluation(result)
        return [Individual(g, cache[g].objectives, failed=g in failed, info=cache[g].info)
                for g in genomes]

    def note(msg):
        if progress is not None:
            progress(msg)

    init = [sample_genome(derived_rng(cfg.seed, STREAM_VARIATION, 0, i)) for i in range(cfg.pop_size)]
    population = evaluate(init)
    rank_population(population)
    prev_front = front_tuples(population)
    logs = [GenerationLog(0, [_copy(p) for p in population], [_copy(p) for p in population],
                          prev_front, 0)]
    note(f"generation 0: front size {len(prev_front)}")

    stagnation, generations_run, stopped_early = 0, 0, False
    for gen in range(1, cfg.generations + 1):
        children = []
        for i in range(cfg.pop_size):
            rng = derived_rng(cfg.seed, STREAM_VARIATION, gen, i)
            p1 = crowded_tournament_select(population, rng)
            p2 = crowded_tournament_select(population, rng)
            if rng.random() < cfg.p_c:
                child = uniform_crossover(p1.genome, p2.genome, rng)
            else:
                child = p1.genome
            children.append(pointwise_mutate(child, cfg.p_m, rng))
        offspring = evaluate(children)

        union = population + offspring
        population = environmental_selection(union, cfg.pop_size)
        generations_run = gen
        front = front_tuples(population)
        stagnation = stagnation + 1 if front == prev_front else 0
        prev_front = front
        logs.append(GenerationLog(gen, [_copy(o) for o in offspring],
                                  [_copy(p) for p in population], front, stagnation))
        note(f"generation {gen}: front size {len(front)}, stagnation {stagnation}")
        if stagnation >= cfg.stagnation:
            stopped_early = gen < cfg.generations
            break

    # final bookkeeping is computed on the surviving population alone
    final = [_copy(p) for p in population]
    fronts = rank_population(final)
    front = [final[i] for i in fronts[0]]
    return SearchResult(
        generations=logs,
        front=front,
        top_k=top_k(final, cfg.top_k),
        compromise=compromise_point(front),
        population=final,
        generations_run=generations_run,
        stopped_early=stopped_early,
        failures=len(failed),
        evaluations=stats["evaluations"],
        cache_hits=stats["cache_hits"],
        failed_genomes=sorted(failed, key=lambda g: g.index),
    )
