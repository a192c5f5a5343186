"""Chain problems: the evaluator contract, two benchmarks, and budgets.

A chain problem evaluates either a whole solution or a single segment of
it, given the state flowing in from upstream blocks. Benchmarks are pure
and in-process; the external client in `external` speaks the same
interface over a child process.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .decomposition import Segment
from .errors import InvalidParameterError, StaleStateError
from .space import (
    HyperparameterSpec,
    SolutionVector,
    SpaceLayout,
    SubVector,
    normalize_codes,
)

ROOT_STATE_ID = "root"


@dataclass(frozen=True)
class PropagatedState:
    """Output of the blocks upstream of a segment.

    `handle` is an opaque id ("root" marks the problem's initial data);
    benchmarks carry their actual payload alongside, external evaluators
    keep payloads on their side of the pipe.
    """

    handle: str
    payload: object = None

    @property
    def is_root(self) -> bool:
        return self.handle == ROOT_STATE_ID


@dataclass
class LedgerRecord:
    index: int
    segment: int
    cost: float
    cumulative: float
    fitness: float
    best_so_far: float


@dataclass
class BudgetLedger:
    """Append-only account of every real evaluation.

    Segment id 0 is the full chain; ids 1..m are segment streams. The
    best-so-far column tracks each stream separately because segment
    fitnesses are not comparable across streams.
    """

    cap: float
    spent: float = 0.0
    log: list[LedgerRecord] = field(default_factory=list)
    _stream_best: dict[int, float] = field(default_factory=dict)

    def can_spend(self) -> bool:
        """Loop check: a new evaluation may be issued only while true."""
        return self.spent < self.cap

    @property
    def exhausted(self) -> bool:
        return not self.can_spend()

    def charge(self, segment: int, cost: float, fitness: float) -> LedgerRecord:
        if cost < 0:
            raise InvalidParameterError("evaluation cost cannot be negative")
        self.spent += cost
        best = max(self._stream_best.get(segment, -np.inf), fitness)
        self._stream_best[segment] = best
        rec = LedgerRecord(
            index=len(self.log) + 1,
            segment=segment,
            cost=cost,
            cumulative=self.spent,
            fitness=fitness,
            best_so_far=best,
        )
        self.log.append(rec)
        return rec

    def best_full(self) -> float | None:
        return self._stream_best.get(0)


class ChainProblem:
    """Shared interface of benchmark and external evaluators."""

    kind: str
    layout: SpaceLayout

    def initial_state(self) -> PropagatedState:
        raise NotImplementedError

    def segment_cost(self, segment: Segment) -> float:
        return segment.n_blocks / self.layout.n_blocks

    def evaluate_segment(
        self, segment: Segment, sub: SubVector, in_state: PropagatedState
    ) -> tuple[float, float]:
        raise NotImplementedError

    def propagate(
        self, segment: Segment, sub: SubVector, in_state: PropagatedState, upto_block: int
    ) -> PropagatedState:
        """Apply blocks segment.first_block..upto_block to in_state."""
        raise NotImplementedError

    def full_evaluate(self, h: SolutionVector) -> tuple[float, float]:
        raise NotImplementedError

    def close(self) -> None:
        """Release external resources, if any."""


def evaluate_segment(problem, segment, sub, in_state):
    return problem.evaluate_segment(segment, sub, in_state)


def propagate(problem, segment, sub, in_state, upto_block):
    return problem.propagate(segment, sub, in_state, upto_block)


def full_evaluate(problem, h):
    return problem.full_evaluate(h)


class QuadraticChain(ChainProblem):
    """Separable quadratic pull toward a hidden target plus a coupling
    penalty tying neighboring block means together.

    Codes decode affinely to [-2, 2]. The target is built from one base
    code pattern, permuted per block, so all block means coincide and the
    maximum is exactly 0 at the target. Fitness is the negated loss.
    """

    kind = "bench_quadratic"

    def __init__(
        self,
        n_blocks: int = 15,
        dims_per_block: int = 2,
        seed: int = 0,
        code_hi: int = 20,
        coupling: float = 5.0,
    ):
        if n_blocks < 1 or dims_per_block < 1 or code_hi < 1:
            raise InvalidParameterError("quadratic benchmark needs positive sizes")
        block = tuple(
            HyperparameterSpec(f"q{j}", "integer_range", 0, code_hi)
            for j in range(dims_per_block)
        )
        self.layout = SpaceLayout(tuple(block for _ in range(n_blocks)))
        self.coupling = float(coupling)
        rng = np.random.default_rng(seed)
        base = rng.integers(0, code_hi + 1, size=dims_per_block)
        target_codes = np.vstack(
            [base[rng.permutation(dims_per_block)] for _ in range(n_blocks)]
        )
        self.target_codes = SolutionVector(target_codes.ravel())

    def _decode(self, codes: np.ndarray, dims: np.ndarray) -> np.ndarray:
        lo, hi = self.layout.bounds_for(dims)
        return -2.0 + 4.0 * normalize_codes(np.asarray(codes, dtype=float), lo, hi)

    def _block_values(self, segment_first: int, codes: np.ndarray, dims: np.ndarray):
        """Per-block decoded values, as a list aligned with the block range."""
        x = self._decode(codes, dims)
        out = []
        pos = 0
        block = segment_first
        while pos < dims.size:
            width = len(self.layout.blocks[block])
            out.append(x[pos : pos + width])
            pos += width
            block += 1
        return out

    @staticmethod
    def _check_state(in_state: PropagatedState) -> float | None:
        if in_state.is_root:
            return None
        p = in_state.payload
        if not np.isscalar(p):
            raise StaleStateError("quadratic benchmark expects a scalar state")
        return float(p)

    def initial_state(self) -> PropagatedState:
        return PropagatedState(ROOT_STATE_ID, None)

    def _loss(self, blocks: list[np.ndarray], t_blocks: list[np.ndarray], s_in: float | None) -> float:
        pull = sum(float(np.sum((b - t) ** 2)) for b, t in zip(blocks, t_blocks))
        means = [float(np.mean(b)) for b in blocks]
        couple = sum((means[i] - means[i + 1]) ** 2 for i in range(len(means) - 1))
        if s_in is not None:
            couple += (means[0] - s_in) ** 2
        return pull + self.coupling * couple

    def evaluate_segment(self, segment, sub, in_state):
        if not np.array_equal(sub.dims, segment.dims):
            raise InvalidParameterError("sub-vector must cover exactly the segment dims")
        s_in = self._check_state(in_state)
        blocks = self._block_values(segment.first_block, sub.codes, sub.dims)
        t_blocks = self._block_values(
            segment.first_block, self.target_codes.codes[sub.dims], sub.dims
        )
        return -self._loss(blocks, t_blocks, s_in), self.segment_cost(segment)

    def propagate(self, segment, sub, in_state, upto_block):
        self._check_state(in_state)
        if not segment.first_block <= upto_block <= segment.last_block:
            raise InvalidParameterError("propagation cut outside the segment")
        blocks = self._block_values(segment.first_block, sub.codes, sub.dims)
        mu = float(np.mean(blocks[upto_block - segment.first_block]))
        return PropagatedState(f"mu:{upto_block}", mu)

    def full_evaluate(self, h):
        h.validate(self.layout)
        dims = np.arange(self.layout.total_dims)
        blocks = self._block_values(0, h.codes, dims)
        t_blocks = self._block_values(0, self.target_codes.codes, dims)
        return -self._loss(blocks, t_blocks, None), 1.0


SCALE_STEP = 0.05
BIAS_STEP = 0.1


class PipelineChain(ChainProblem):
    """Elementwise affine-plus-activation chain fit to a hidden truth.

    Each block holds (scale, bias, activation) codes; the transform is
    y = a * act(y + b) on every entry of a seeded dataset. Fitness is the
    negated mean squared error against the hidden configuration, either
    end-to-end or segment-local on the incoming state.
    """

    kind = "bench_pipeline"

    def __init__(self, n_blocks: int = 10, seed: int = 0, n_vectors: int = 32, width: int = 8):
        if n_blocks < 1:
            raise InvalidParameterError("pipeline benchmark needs at least one block")
        block = (
            HyperparameterSpec("scale", "integer_range", 0, 30),
            HyperparameterSpec("bias", "integer_range", 0, 20),
            HyperparameterSpec(
                "act", "categorical", 0, 2, labels=("identity", "tanh", "clip")
            ),
        )
        self.layout = SpaceLayout(tuple(block for _ in range(n_blocks)))
        rng = np.random.default_rng(seed)
        self.data = rng.standard_normal((n_vectors, width))
        # the hidden truth mixes amplifying squash blocks with occasional
        # identity blocks. Scales below 1.0 let saturation erase upstream
        # signal (fitness then degenerates to matching the last block),
        # while identity-heavy truths make consecutive blocks compose
        # into one affine map that many wrong code combinations
        # reproduce. Amplified squashing with spread-out biases keeps the
        # variance alive, pins each block's operating point, and moves
        # the interior states well away from the root distribution.
        scale = rng.integers(12, 31, size=n_blocks)
        bias = rng.integers(4, 17, size=n_blocks)
        act = rng.choice(3, size=n_blocks, p=(0.15, 0.55, 0.3))
        truth = np.column_stack([scale, bias, act]).astype(np.int64)
        self.truth_codes = SolutionVector(truth.ravel())
        self._target = self._apply_codes(self.data, self.truth_codes.codes.reshape(-1, 3))

    @staticmethod
    def _apply_codes(x: np.ndarray, per_block: np.ndarray) -> np.ndarray:
        y = x
        for scale_code, bias_code, act_code in per_block:
            a = 0.5 + SCALE_STEP * scale_code
            b = -1.0 + BIAS_STEP * bias_code
            z = y + b
            if act_code == 1:
                z = np.tanh(z)
            elif act_code == 2:
                z = np.clip(z, -1.0, 1.0)
            y = a * z
        return y

    def _check_state(self, in_state: PropagatedState) -> np.ndarray:
        if in_state.is_root:
            return self.data
        p = in_state.payload
        if not isinstance(p, np.ndarray) or p.shape != self.data.shape:
            raise StaleStateError("pipeline benchmark expects a dataset-shaped state")
        return p

    def initial_state(self) -> PropagatedState:
        return PropagatedState(ROOT_STATE_ID, self.data)

    def evaluate_segment(self, segment, sub, in_state):
        if not np.array_equal(sub.dims, segment.dims):
            raise InvalidParameterError("sub-vector must cover exactly the segment dims")
        x = self._check_state(in_state)
        got = self._apply_codes(x, sub.codes.reshape(-1, 3))
        want = self._apply_codes(x, self.truth_codes.codes[sub.dims].reshape(-1, 3))
        mse = float(np.mean((got - want) ** 2))
        return -mse, self.segment_cost(segment)

    def propagate(self, segment, sub, in_state, upto_block):
        x = self._check_state(in_state)
        if not segment.first_block <= upto_block <= segment.last_block:
            raise InvalidParameterError("propagation cut outside the segment")
        n_apply = upto_block - segment.first_block + 1
        per_block = sub.codes.reshape(-1, 3)[:n_apply]
        return PropagatedState(f"out:{upto_block}", self._apply_codes(x, per_block))

    def full_evaluate(self, h):
        h.validate(self.layout)
        got = self._apply_codes(self.data, h.codes.reshape(-1, 3))
        mse = float(np.mean((got - self._target) ** 2))
        return -mse, 1.0


def make_benchmark(kind: str, **params) -> ChainProblem:
    if kind == "bench_quadratic":
        return QuadraticChain(**params)
    if kind == "bench_pipeline":
        return PipelineChain(**params)
    raise InvalidParameterError(f"unknown benchmark kind {kind!r}")
