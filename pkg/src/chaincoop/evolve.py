"""Evolutionary optimizers over surrogate models.

A single-objective GA locates the surrogate optimum for one segment; a
two-objective NSGA-II trades off two adjacent segments' surrogates on
their shared dims, and the knee of the resulting front is the committed
compromise. Genes are the integer codes; every variation step is pushed
through repair so candidates stay inside the space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError
from .space import SpaceLayout, SubVector, normalize_codes, repair_codes
from .surrogate import RbfModel, predict_many


@dataclass
class Individual:
    sub: SubVector
    objectives: tuple[float, ...]
    rank: int = -1
    crowding: float = 0.0


@dataclass(frozen=True)
class ParetoFront:
    members: tuple[Individual, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise InvalidParameterError("a Pareto front cannot be empty")
        objs = np.array([m.objectives for m in self.members])
        dom = _dominance_matrix(objs)
        if dom.any():
            raise InvalidParameterError("front members must be mutually non-dominated")

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class EvolveParams:
    population: int = 50
    generations: int = 100
    tournament: int = 2
    crossover_rate: float = 0.9
    mutation_rate: float | None = None  # None means 1/|dims|
    elitism: int = 1

    def __post_init__(self) -> None:
        if self.population < 2 or self.generations < 1:
            raise InvalidParameterError("population >= 2 and generations >= 1 required")


def _dominance_matrix(objs: np.ndarray) -> np.ndarray:
    """dom[i, j] true iff i strictly dominates j (maximization)."""
    ge = (objs[:, None, :] >= objs[None, :, :]).all(axis=2)
    gt = (objs[:, None, :] > objs[None, :, :]).any(axis=2)
    return ge & gt


def _rank_objectives(objs: np.ndarray) -> np.ndarray:
    """Fast non-dominated sorting; returns a rank per row, 0 = best."""
    n = objs.shape[0]
    dom = _dominance_matrix(objs)
    n_dominators = dom.sum(axis=0)
    ranks = np.full(n, -1, dtype=np.int64)
    current = np.flatnonzero(n_dominators == 0)
    r = 0
    remaining = n
    while remaining:
        ranks[current] = r
        remaining -= current.size
        if not remaining:
            break
        n_dominators = n_dominators - dom[current].sum(axis=0)
        n_dominators[ranks >= 0] = -1
        current = np.flatnonzero(n_dominators == 0)
        r += 1
    return ranks


def _crowding_distances(objs: np.ndarray, ranks: np.ndarray) -> np.ndarray:
    crowd = np.zeros(objs.shape[0])
    for r in range(int(ranks.max()) + 1):
        front = np.flatnonzero(ranks == r)
        if front.size <= 2:
            crowd[front] = np.inf
            continue
        for k in range(objs.shape[1]):
            vals = objs[front, k]
            order = np.argsort(vals, kind="stable")
            span = vals[order[-1]] - vals[order[0]]
            crowd[front[order[0]]] = np.inf
            crowd[front[order[-1]]] = np.inf
            if span > 0:
                gaps = (vals[order[2:]] - vals[order[:-2]]) / span
                crowd[front[order[1:-1]]] += gaps
    return crowd


def non_dominated_sort(pop: list[Individual]) -> list[Individual]:
    """Assign non-domination ranks (0 = non-dominated) in place and return pop."""
    if any(len(ind.objectives) != 2 for ind in pop):
        raise DimensionMismatchError("non_dominated_sort expects 2 objectives each")
    if not pop:
        return pop
    objs = np.array([ind.objectives for ind in pop], dtype=float)
    ranks = _rank_objectives(objs)
    crowd = _crowding_distances(objs, ranks)
    for ind, r, c in zip(pop, ranks, crowd):
        ind.rank = int(r)
        ind.crowding = float(c)
    return pop


def _init_population(
    lo: np.ndarray, hi: np.ndarray, n: int, rng: np.random.Generator
) -> np.ndarray:
    return rng.integers(lo.astype(np.int64), hi.astype(np.int64) + 1, size=(n, lo.size))


def _make_offspring(
    pop: np.ndarray,
    selected: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    params: EvolveParams,
    rng: np.random.Generator,
) -> np.ndarray:
    """Uniform crossover then per-gene reset mutation, repaired throughout."""
    n, d = pop.shape
    pa = pop[selected[:, 0]]
    pb = pop[selected[:, 1]]
    cross = rng.random(n) < params.crossover_rate
    take_b = rng.random((n, d)) < 0.5
    children = np.where(cross[:, None] & take_b, pb, pa)
    children = repair_codes(children.astype(float), lo, hi)
    rate = params.mutation_rate if params.mutation_rate is not None else 1.0 / d
    mut = rng.random((n, d)) < rate
    resets = _init_population(lo, hi, n, rng)
    children = np.where(mut, resets, children)
    return repair_codes(children.astype(float), lo, hi)


def _tournament_pairs(
    score_better: np.ndarray, n: int, k: int, rng: np.random.Generator
) -> np.ndarray:
    """Two k-way tournaments per offspring; score_better[i,j] true if i beats j."""
    draws = rng.integers(0, score_better.shape[0], size=(n, 2, k))
    winners = draws[:, :, 0]
    for c in range(1, k):
        challenger = draws[:, :, c]
        upset = score_better[challenger, winners]
        winners = np.where(upset, challenger, winners)
    return winners


def ga_optimize(
    model: RbfModel,
    dims: Sequence[int] | np.ndarray,
    layout: SpaceLayout,
    params: EvolveParams,
    rng: np.random.Generator,
) -> SubVector:
    """Maximize the surrogate with a generational GA; returns the best found."""
    dims = np.asarray(dims, dtype=np.int64)
    if dims.size != model.dim:
        raise DimensionMismatchError(f"{dims.size} dims vs model dim {model.dim}")
    lo, hi = layout.bounds_for(dims)
    n = params.population
    pop = _init_population(lo, hi, n, rng)
    fit = predict_many(model, normalize_codes(pop.astype(float), lo, hi))
    best = int(np.argmax(fit))
    best_codes, best_fit = pop[best].copy(), float(fit[best])
    for _ in range(params.generations):
        better = fit[:, None] > fit[None, :]
        selected = _tournament_pairs(better, n, params.tournament, rng)
        pop = _make_offspring(pop, selected, lo, hi, params, rng)
        fit = predict_many(model, normalize_codes(pop.astype(float), lo, hi))
        if params.elitism > 0:
            worst = int(np.argmin(fit))
            pop[worst] = best_codes
            fit[worst] = best_fit
        gen_best = int(np.argmax(fit))
        if fit[gen_best] > best_fit:
            best_codes, best_fit = pop[gen_best].copy(), float(fit[gen_best])
    return SubVector(dims, best_codes)


def nsga2_optimize(
    model_a: RbfModel,
    model_b: RbfModel,
    dims: Sequence[int] | np.ndarray,
    layout: SpaceLayout,
    params: EvolveParams,
    rng: np.random.Generator,
) -> ParetoFront:
    """Maximize (model_a, model_b) jointly; returns the final rank-0 set."""
    dims = np.asarray(dims, dtype=np.int64)
    if dims.size != model_a.dim or dims.size != model_b.dim:
        raise DimensionMismatchError("both models must match |dims|")
    lo, hi = layout.bounds_for(dims)
    n = params.population

    def both(codes: np.ndarray) -> np.ndarray:
        ts = normalize_codes(codes.astype(float), lo, hi)
        return np.column_stack([predict_many(model_a, ts), predict_many(model_b, ts)])

    pop = _init_population(lo, hi, n, rng)
    objs = both(pop)
    ranks = _rank_objectives(objs)
    crowd = _crowding_distances(objs, ranks)
    for _ in range(params.generations):
        better = (ranks[:, None] < ranks[None, :]) | (
            (ranks[:, None] == ranks[None, :]) & (crowd[:, None] > crowd[None, :])
        )
        selected = _tournament_pairs(better, n, params.tournament, rng)
        children = _make_offspring(pop, selected, lo, hi, params, rng)
        union = np.vstack([pop, children])
        u_objs = np.vstack([objs, both(children)])
        u_ranks = _rank_objectives(u_objs)
        u_crowd = _crowding_distances(u_objs, u_ranks)
        order = np.lexsort((-u_crowd, u_ranks))[:n]
        pop, objs = union[order], u_objs[order]
        ranks, crowd = u_ranks[order], u_crowd[order]
    front_idx = np.flatnonzero(ranks == 0)
    members = tuple(
        Individual(
            sub=SubVector(dims, pop[i]),
            objectives=(float(objs[i, 0]), float(objs[i, 1])),
            rank=0,
            crowding=float(crowd[i]),
        )
        for i in front_idx
    )
    return ParetoFront(members)


def knee_point(front: ParetoFront) -> Individual:
    """Front member farthest from the line through the normalized extremes.

    Objectives are min-max normalized over the front first, so the pick is
    invariant under positive affine rescaling of either objective. Ties go
    to the earlier member; 2-member fronts compare normalized sums.
    """
    members = front.members
    if len(members) == 1:
        return members[0]
    objs = np.array([m.objectives for m in members], dtype=float)
    span = objs.max(axis=0) - objs.min(axis=0)
    safe = np.where(span > 0, span, 1.0)
    norm = np.where(span > 0, (objs - objs.min(axis=0)) / safe, 0.0)
    if len(members) == 2:
        sums = norm.sum(axis=1)
        return members[0] if sums[0] >= sums[1] else members[1]
    ex_a = norm[int(np.argmax(norm[:, 0]))]
    ex_b = norm[int(np.argmax(norm[:, 1]))]
    chord = ex_b - ex_a
    length = float(np.hypot(*chord))
    if length == 0.0:
        return members[0]
    # unsigned perpendicular distance via the 2-D cross product
    rel = norm - ex_a
    dist = np.abs(rel[:, 0] * chord[1] - rel[:, 1] * chord[0]) / length
    return members[int(np.argmax(dist))]
