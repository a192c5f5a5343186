"""The cooperative run loops.

Each outer round walks the segment chain left to right: optimize a
segment's own dims on a surrogate, hand its output state to the next
segment, then negotiate the dims the two segments share by treating
their fitnesses as two objectives and committing the knee compromise.
Two baselines share the machinery: a context-vector scheme that prices
every candidate with a full-chain evaluation, and plain random search.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .decomposition import DecompositionPlan, exclusive_decompose, sod_decompose
from .errors import BudgetExhausted, InvalidParameterError
from .evolve import (
    EvolveParams,
    Individual,
    ParetoFront,
    ga_optimize,
    knee_point,
    non_dominated_sort,
    nsga2_optimize,
)
from .problems import BudgetLedger, ChainProblem, PropagatedState
from .space import (
    SolutionVector,
    SpaceLayout,
    SubVector,
    normalize_codes,
    random_sample,
    random_solution,
    stratified_sample,
)
from .surrogate import fit_rbf, localized_augment, predict_many, training_set


@dataclass(frozen=True)
class VariantFlags:
    """macro: pass segment outputs downstream; micro: negotiate shared dims."""

    macro: bool
    micro: bool


VARIANTS = {
    "shcho": VariantFlags(macro=True, micro=True),
    "no-macro": VariantFlags(macro=False, micro=True),
    "no-micro": VariantFlags(macro=True, micro=False),
    "no-coop": VariantFlags(macro=False, micro=False),
}


@dataclass(frozen=True)
class EngineSettings:
    epsilon: int = 30
    outer_iters: int = 5
    inner_evals: int = 10
    evolve: EvolveParams = field(default_factory=EvolveParams)
    augment_count: int = 3
    augment_delta: float = 0.05

    def __post_init__(self) -> None:
        if self.outer_iters < 1 or self.inner_evals < 1:
            raise InvalidParameterError("outer_iters and inner_evals must be >= 1")


_SCREEN_DRAWS = 256


def _screen_unseen(
    cand: SubVector,
    best: np.ndarray | None,
    seen: set[tuple],
    measured: list[np.ndarray],
    dims: np.ndarray,
    layout: SpaceLayout,
    score,
    explore: bool,
    rng: np.random.Generator,
) -> SubVector:
    """Swap an already-measured proposal for an unseen screened point.

    Re-evaluating a point the model interpolates exactly buys no new
    information, so the evaluation goes to a fresh point instead, drawn
    from random candidates plus the one-step lattice neighbours of the
    best point measured so far. Exploiting picks the model's favourite;
    exploring picks the point farthest from everything measured (the
    interpolant is least trustworthy there). Callers alternate the two.
    A space small enough to be fully measured falls back to the original
    proposal.
    """
    if tuple(cand.codes.tolist()) not in seen:
        return cand
    lo, hi = layout.bounds_for(dims)
    pool = rng.integers(lo, hi + 1, size=(_SCREEN_DRAWS, dims.size))
    if best is not None:
        steps = np.vstack([np.eye(dims.size, dtype=np.int64) * s for s in (1, -1)])
        neighbours = np.clip(best[None, :] + steps, lo, hi)
        pool = np.vstack([neighbours, pool])
    fresh = np.array([tuple(row.tolist()) not in seen for row in pool])
    if not fresh.any():
        return cand
    pool = pool[fresh]
    norm = normalize_codes(pool.astype(float), lo, hi)
    if explore:
        gaps = cdist(norm, np.asarray(measured)).min(axis=1)
        return SubVector(dims, pool[int(np.argmax(gaps))])
    return SubVector(dims, pool[int(np.argmax(score(norm)))])


def surrogate_phase(
    layout: SpaceLayout,
    dims: np.ndarray,
    evaluate,
    settings: EngineSettings,
    rng: np.random.Generator,
    incumbent: np.ndarray | None = None,
) -> tuple[np.ndarray | None, float, bool]:
    """Sample, fit, then alternate surrogate-argmax and real evaluation.

    `evaluate(SubVector) -> fitness` performs (and pays for) one real
    evaluation, raising BudgetExhausted when none may be issued. When the
    caller holds an incumbent it takes one slot of the initial design, so
    the phase best can never score below it and a commit never makes the
    committed solution worse under this phase's objective. Returns
    (best_codes, best_fitness, exhausted); the best real-evaluated
    candidate survives an exhaustion mid-phase.
    """
    lo, hi = layout.bounds_for(dims)
    points: list[np.ndarray] = []
    fits: list[float] = []
    seen: set[tuple] = set()
    best_codes, best_fit = None, -np.inf

    def record(codes: np.ndarray, f: float) -> None:
        nonlocal best_codes, best_fit
        points.append(normalize_codes(codes.astype(float), lo, hi))
        fits.append(f)
        seen.add(tuple(codes.tolist()))
        if f > best_fit:
            best_codes, best_fit = codes.copy(), f

    try:
        init = stratified_sample(dims, layout, dims.size, rng)
        if incumbent is not None and init.shape[0]:
            init[0] = incumbent
        for codes in init:
            record(codes, evaluate(SubVector(dims, codes)))
        attempts = 0
        while len(np.unique(points, axis=0)) < 2 and attempts < 12:
            # tiny or degenerate spaces can collapse the sample; buy extra
            # draws until the surrogate has two distinct points to fit
            cand = random_sample(dims, layout, rng)
            record(cand.codes, evaluate(cand))
            attempts += 1
        if len(np.unique(points, axis=0)) < 2:
            return best_codes, best_fit, False
        ts = localized_augment(
            training_set(points, fits),
            settings.augment_count,
            settings.augment_delta,
            rng,
        )
        model = fit_rbf(ts)
        screened = 0
        for step in range(settings.inner_evals):
            cand = ga_optimize(model, dims, layout, settings.evolve, rng)
            # spend the early half of the loop escaping bad basins, the
            # late half polishing whatever the model believes in
            explore = step < settings.inner_evals // 2 and screened % 2 == 1
            swap = _screen_unseen(
                cand, best_codes, seen, points, dims, layout,
                lambda p: predict_many(model, p), explore, rng,
            )
            if swap is not cand:
                screened += 1
            f = evaluate(swap)
            record(swap.codes, f)
            ts = ts.add(normalize_codes(swap.codes.astype(float), lo, hi), f)
            model = fit_rbf(ts)
    except BudgetExhausted:
        return best_codes, best_fit, True
    return best_codes, best_fit, False


class CoevolutionRun:
    """One seeded run of the cooperative loop over a decomposed chain."""

    def __init__(
        self,
        problem: ChainProblem,
        flags: VariantFlags,
        settings: EngineSettings,
        budget_cap: float,
        seed: int,
    ):
        if budget_cap <= 0:
            raise InvalidParameterError("budget cap must be positive")
        self.problem = problem
        self.flags = flags
        self.settings = settings
        self.rng = np.random.default_rng(seed)
        decompose = sod_decompose if flags.micro else exclusive_decompose
        self.plan: DecompositionPlan = decompose(problem.layout, settings.epsilon)
        self.ledger = BudgetLedger(cap=budget_cap)
        self.h_star: SolutionVector = random_solution(problem.layout, self.rng)
        self.states: dict[int, PropagatedState] = {}
        self.iteration = 0
        self._reset_states()

    @property
    def incumbents(self) -> dict[int, SubVector]:
        """Per-segment views of h_star; consistent with it by construction."""
        return {s.index: self.h_star.extract(s.dims) for s in self.plan.segments}

    def _reset_states(self) -> None:
        root = self.problem.initial_state()
        for s in self.plan.segments:
            self.states[s.index] = root

    def _commit(self, sub: SubVector) -> None:
        self.h_star = self.h_star.splice(sub)

    def _eval_on_segment(self, i: int, candidate: SubVector) -> float:
        """Real-evaluate a candidate covering some of segment i's dims."""
        if not self.ledger.can_spend():
            raise BudgetExhausted(
                f"budget spent ({self.ledger.spent:.4g} of {self.ledger.cap:.4g})"
            )
        seg = self.plan.segment(i)
        sub = self.h_star.splice(candidate).extract(seg.dims)
        fitness, cost = self.problem.evaluate_segment(seg, sub, self.states[i])
        self.ledger.charge(i, cost, fitness)
        return fitness

    def optimize_peculiar(self, i: int) -> None:
        """Optimize segment i's unshared dims; commit the best real result."""
        pec = self.plan.peculiar_dims(i)
        if pec.size == 0:
            return
        best_codes, _, exhausted = surrogate_phase(
            self.problem.layout,
            pec,
            lambda cand: self._eval_on_segment(i, cand),
            self.settings,
            self.rng,
            incumbent=self.h_star.extract(pec).codes,
        )
        if best_codes is not None:
            self._commit(SubVector(pec, best_codes))
        if exhausted:
            raise BudgetExhausted("stopped during a peculiar phase")

    def optimize_overlap(self, i: int) -> None:
        """Negotiate the dims segments i and i+1 share.

        The inner loop spends paired evaluations guided by the model
        front; what gets committed is the knee of the measured pairs,
        never a surrogate prediction. A pair whose second half could not
        be paid is abandoned.
        """
        com = self.plan.overlaps[i - 1].com
        if com.size == 0:
            return
        layout = self.problem.layout
        lo, hi = layout.bounds_for(com)
        points: list[np.ndarray] = []
        measured: list[Individual] = []
        fits_a: list[float] = []
        fits_b: list[float] = []
        seen: set[tuple] = set()
        best_codes = None

        def paired_eval(cand: SubVector) -> tuple[float, float]:
            fa = self._eval_on_segment(i, cand)
            fb = self._eval_on_segment(i + 1, cand)
            return fa, fb

        def record(codes: np.ndarray, fa: float, fb: float) -> None:
            nonlocal best_codes
            points.append(normalize_codes(codes.astype(float), lo, hi))
            fits_a.append(fa)
            fits_b.append(fb)
            seen.add(tuple(codes.tolist()))
            measured.append(
                Individual(sub=SubVector(com, codes.copy()), objectives=(fa, fb))
            )
            best_codes = measured[
                int(np.argmax([m.objectives[0] + m.objectives[1] for m in measured]))
            ].sub.codes

        def commit_measured_knee() -> None:
            if not measured:
                return
            non_dominated_sort(measured)
            front = ParetoFront(tuple(m for m in measured if m.rank == 0))
            self._commit(knee_point(front).sub)

        try:
            init = stratified_sample(com, layout, com.size, self.rng)
            if init.shape[0]:
                # the incumbent always competes; see surrogate_phase
                init[0] = self.h_star.extract(com).codes
            for codes in init:
                cand = SubVector(com, codes)
                fa, fb = paired_eval(cand)
                record(cand.codes, fa, fb)
            attempts = 0
            while len(np.unique(points, axis=0)) < 2 and attempts < 12:
                cand = random_sample(com, layout, self.rng)
                fa, fb = paired_eval(cand)
                record(cand.codes, fa, fb)
                attempts += 1
            if len(np.unique(points, axis=0)) < 2:
                commit_measured_knee()
                return
            ts_a = localized_augment(
                training_set(points, fits_a),
                self.settings.augment_count,
                self.settings.augment_delta,
                self.rng,
            )
            ts_b = localized_augment(
                training_set(points, fits_b),
                self.settings.augment_count,
                self.settings.augment_delta,
                self.rng,
            )
            model_a, model_b = fit_rbf(ts_a), fit_rbf(ts_b)
            screened = 0
            for step in range(self.settings.inner_evals):
                front = nsga2_optimize(
                    model_a, model_b, com, layout, self.settings.evolve, self.rng
                )
                knee = knee_point(front)
                # the knee still gets committed below; when its pair is
                # already measured the two evaluations go to a fresh point
                explore = (
                    step < self.settings.inner_evals // 2 and screened % 2 == 1
                )
                cand = _screen_unseen(
                    knee.sub,
                    best_codes,
                    seen,
                    points,
                    com,
                    layout,
                    lambda p: predict_many(model_a, p) + predict_many(model_b, p),
                    explore,
                    self.rng,
                )
                if cand is not knee.sub:
                    screened += 1
                fa, fb = paired_eval(cand)
                record(cand.codes, fa, fb)
                norm = normalize_codes(cand.codes.astype(float), lo, hi)
                ts_a = ts_a.add(norm, fa)
                ts_b = ts_b.add(norm, fb)
                model_a, model_b = fit_rbf(ts_a), fit_rbf(ts_b)
            commit_measured_knee()
        except BudgetExhausted:
            commit_measured_knee()
            raise

    def _propagate_downstream(self, i: int) -> None:
        if self.flags.macro:
            seg = self.plan.segment(i)
            _, upto = self.plan.propagate_blocks(i)
            self.states[i + 1] = self.problem.propagate(
                seg, self.h_star.extract(seg.dims), self.states[i], upto
            )
        # macro off: every segment keeps the root data set by _reset_states

    def run(self) -> tuple[SolutionVector, BudgetLedger]:
        try:
            for it in range(self.settings.outer_iters):
                self.iteration = it + 1
                self._reset_states()
                for i in range(1, self.plan.m):
                    self.optimize_peculiar(i)
                    self._propagate_downstream(i)
                    if self.flags.micro:
                        self.optimize_overlap(i)
                self.optimize_peculiar(self.plan.m)
        except BudgetExhausted:
            pass
        return self.h_star, self.ledger


def run_shcho(
    problem: ChainProblem,
    flags: VariantFlags,
    epsilon: int,
    budget_cap: float,
    outer_iters: int,
    seed: int,
    inner_evals: int = 10,
    evolve: EvolveParams | None = None,
) -> tuple[SolutionVector, BudgetLedger]:
    settings = EngineSettings(
        epsilon=epsilon,
        outer_iters=outer_iters,
        inner_evals=inner_evals,
        evolve=evolve or EvolveParams(),
    )
    return CoevolutionRun(problem, flags, settings, budget_cap, seed).run()


def run_sacc_baseline(
    problem: ChainProblem,
    epsilon: int,
    budget_cap: float,
    seed: int,
    inner_evals: int = 10,
    evolve: EvolveParams | None = None,
) -> tuple[SolutionVector, BudgetLedger]:
    """Context-vector baseline: exclusive segments, full-chain pricing.

    Each candidate sub-solution is spliced into the best-known complete
    solution and the whole chain is evaluated, so every ledger row is a
    full-cost (segment 0) record. Cycles the subproblems until the budget
    stops it.
    """
    settings = EngineSettings(
        epsilon=epsilon, inner_evals=inner_evals, evolve=evolve or EvolveParams()
    )
    rng = np.random.default_rng(seed)
    plan = exclusive_decompose(problem.layout, settings.epsilon)
    ledger = BudgetLedger(cap=budget_cap)
    cv = random_solution(problem.layout, rng)

    def evaluate_in_context(cand: SubVector) -> float:
        if not ledger.can_spend():
            raise BudgetExhausted("budget spent")
        fitness, cost = problem.full_evaluate(cv.splice(cand))
        ledger.charge(0, cost, fitness)
        return fitness

    done = False
    while ledger.can_spend() and not done:
        for seg in plan.segments:
            best_codes, _, exhausted = surrogate_phase(
                problem.layout,
                seg.dims,
                evaluate_in_context,
                settings,
                rng,
                incumbent=cv.extract(seg.dims).codes,
            )
            if best_codes is not None:
                cv = cv.splice(SubVector(seg.dims, best_codes))
            if exhausted:
                done = True
                break
    return cv, ledger


def run_random_search(
    problem: ChainProblem, budget_cap: float, seed: int
) -> tuple[SolutionVector, BudgetLedger]:
    """Uniform full evaluations until the budget is gone; keep the best."""
    rng = np.random.default_rng(seed)
    ledger = BudgetLedger(cap=budget_cap)
    best_h, best_f = None, -np.inf
    while ledger.can_spend():
        h = random_solution(problem.layout, rng)
        fitness, cost = problem.full_evaluate(h)
        ledger.charge(0, cost, fitness)
        if fitness > best_f:
            best_h, best_f = h, fitness
    if best_h is None:
        best_h = random_solution(problem.layout, rng)
    return best_h, ledger
