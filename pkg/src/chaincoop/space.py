"""Chain-structured mixed-variable search spaces.

A space is an ordered chain of blocks; each block owns a handful of
integer-coded hyperparameters (plain ranges or categoricals carried as
ordinal codes). All engine machinery works on the integer codes and on
their [0, 1] normalization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidSubVectorError

KIND_INTEGER = "integer_range"
KIND_CATEGORICAL = "categorical"


@dataclass(frozen=True)
class HyperparameterSpec:
    """One integer-coded hyperparameter.

    Attributes:
        name: identifier, unique within its block by convention
        kind: "integer_range" or "categorical"
        lo: smallest legal code (inclusive)
        hi: largest legal code (inclusive)
        labels: category names for categorical specs, one per code
    """

    name: str
    kind: str
    lo: int
    hi: int
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in (KIND_INTEGER, KIND_CATEGORICAL):
            raise ValueError(f"unknown spec kind {self.kind!r}")
        if self.lo > self.hi:
            raise ValueError(f"{self.name}: lo {self.lo} > hi {self.hi}")
        if self.kind == KIND_CATEGORICAL:
            n = self.hi - self.lo + 1
            if self.labels is None or len(self.labels) != n:
                raise ValueError(f"{self.name}: categorical needs {n} labels")

    @property
    def n_codes(self) -> int:
        return self.hi - self.lo + 1


@dataclass(frozen=True)
class SpaceLayout:
    """An ordered chain of blocks of hyperparameter specs.

    Global dimension indices run over the concatenation of the blocks in
    order, so dim 0 is the first spec of block 0.
    """

    blocks: tuple[tuple[HyperparameterSpec, ...], ...]
    # derived lookups, filled in __post_init__
    _dim_lo: np.ndarray = field(init=False, repr=False, compare=False)
    _dim_hi: np.ndarray = field(init=False, repr=False, compare=False)
    _block_of_dim: np.ndarray = field(init=False, repr=False, compare=False)
    _block_start: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.blocks) == 0 or any(len(b) == 0 for b in self.blocks):
            raise ValueError("layout needs at least one non-empty block")
        lo = np.array([s.lo for b in self.blocks for s in b], dtype=float)
        hi = np.array([s.hi for b in self.blocks for s in b], dtype=float)
        block_of = np.array(
            [i for i, b in enumerate(self.blocks) for _ in b], dtype=np.int64
        )
        sizes = np.array([len(b) for b in self.blocks], dtype=np.int64)
        start = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        for name, arr in (
            ("_dim_lo", lo),
            ("_dim_hi", hi),
            ("_block_of_dim", block_of),
            ("_block_start", start),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def total_dims(self) -> int:
        return int(self._dim_lo.size)

    def spec_of_dim(self, dim: int) -> HyperparameterSpec:
        block = int(self._block_of_dim[dim])
        return self.blocks[block][dim - int(self._block_start[block])]

    def block_dims(self, block: int) -> np.ndarray:
        """Global dim indices of one block (0-based block index)."""
        start = int(self._block_start[block])
        return np.arange(start, start + len(self.blocks[block]), dtype=np.int64)

    def dims_of_blocks(self, first: int, last: int) -> np.ndarray:
        """Global dim indices of the inclusive block interval [first, last]."""
        return np.concatenate([self.block_dims(b) for b in range(first, last + 1)])

    def bounds_for(self, dims: Sequence[int] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Per-dim (lo, hi) arrays for the given global dims."""
        idx = np.asarray(dims, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.total_dims):
            raise InvalidSubVectorError(
                f"dim index out of range 0..{self.total_dims - 1}"
            )
        return self._dim_lo[idx], self._dim_hi[idx]

    def to_json(self) -> str:
        doc = {
            "blocks": [
                [
                    {
                        "name": s.name,
                        "kind": s.kind,
                        "lo": s.lo,
                        "hi": s.hi,
                        **({"labels": list(s.labels)} if s.labels else {}),
                    }
                    for s in block
                ]
                for block in self.blocks
            ]
        }
        return json.dumps(doc)


def layout_from_json(doc: str | dict) -> SpaceLayout:
    """Build a layout from its JSON document ({"blocks": [[spec, ...], ...]})."""
    data = json.loads(doc) if isinstance(doc, str) else doc
    blocks = tuple(
        tuple(
            HyperparameterSpec(
                name=s["name"],
                kind=s["kind"],
                lo=int(s["lo"]),
                hi=int(s["hi"]),
                labels=tuple(s["labels"]) if s.get("labels") else None,
            )
            for s in block
        )
        for block in data["blocks"]
    )
    return SpaceLayout(blocks)


@dataclass(frozen=True)
class SolutionVector:
    """A complete assignment: one integer code per global dimension."""

    codes: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.codes, dtype=np.int64).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "codes", arr)

    def validate(self, layout: SpaceLayout) -> None:
        if self.codes.size != layout.total_dims:
            raise InvalidSubVectorError(
                f"solution has {self.codes.size} codes, layout {layout.total_dims}"
            )
        lo, hi = layout.bounds_for(np.arange(layout.total_dims))
        if np.any(self.codes < lo) or np.any(self.codes > hi):
            raise InvalidSubVectorError("solution code out of spec range")

    def extract(self, dims: Sequence[int] | np.ndarray) -> "SubVector":
        idx = np.asarray(dims, dtype=np.int64)
        return SubVector(idx, self.codes[idx])

    def splice(self, sub: "SubVector") -> "SolutionVector":
        """Return a copy with the sub-vector's dims overwritten."""
        codes = self.codes.copy()
        codes[sub.dims] = sub.codes
        return SolutionVector(codes)


@dataclass(frozen=True)
class SubVector:
    """Codes for a sorted subset of global dimensions."""

    dims: np.ndarray
    codes: np.ndarray

    def __post_init__(self) -> None:
        dims = np.asarray(self.dims, dtype=np.int64).copy()
        codes = np.asarray(self.codes).copy()
        if dims.size != codes.size:
            raise InvalidSubVectorError("dims and codes length differ")
        if dims.size > 1 and np.any(np.diff(dims) <= 0):
            raise InvalidSubVectorError("dims must be strictly increasing")
        dims.setflags(write=False)
        codes.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "codes", codes)

    def __len__(self) -> int:
        return int(self.dims.size)

    def validate(self, layout: SpaceLayout) -> None:
        lo, hi = layout.bounds_for(self.dims)
        if np.any(self.codes < lo) or np.any(self.codes > hi):
            raise InvalidSubVectorError("code out of spec range")


def normalize(sub: SubVector, layout: SpaceLayout) -> np.ndarray:
    """Map codes to [0, 1] per dimension; degenerate ranges map to 0."""
    sub.validate(layout)
    lo, hi = layout.bounds_for(sub.dims)
    return normalize_codes(np.asarray(sub.codes, dtype=float), lo, hi)


def normalize_codes(codes: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized normalization; `codes` may be a population matrix."""
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = (codes - lo) / safe
    return np.where(span > 0, out, 0.0)


def denormalize(t: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Inverse of normalize_codes up to rounding: round(lo + t*(hi-lo)), clamped."""
    raw = lo + np.asarray(t, dtype=float) * (hi - lo)
    return np.clip(round_half_away(raw), lo, hi).astype(np.int64)


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, halves away from zero (unlike np.round)."""
    x = np.asarray(x, dtype=float)
    return np.copysign(np.floor(np.abs(x) + 0.5), x)


def repair(sub: SubVector, layout: SpaceLayout) -> SubVector:
    """Round stray (possibly real-valued) codes and clamp them into range."""
    lo, hi = layout.bounds_for(sub.dims)
    fixed = repair_codes(np.asarray(sub.codes, dtype=float), lo, hi)
    return SubVector(sub.dims, fixed)


def repair_codes(codes: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    return np.clip(round_half_away(codes), lo, hi).astype(np.int64)


def random_sample(
    dims: Sequence[int] | np.ndarray, layout: SpaceLayout, rng: np.random.Generator
) -> SubVector:
    """Uniform random codes for the given dims. Empty dims give an empty vector."""
    idx = np.asarray(dims, dtype=np.int64)
    if idx.size == 0:
        return SubVector(idx, np.empty(0, dtype=np.int64))
    lo, hi = layout.bounds_for(idx)
    codes = rng.integers(lo.astype(np.int64), hi.astype(np.int64) + 1)
    return SubVector(idx, codes)


def random_solution(layout: SpaceLayout, rng: np.random.Generator) -> SolutionVector:
    sub = random_sample(np.arange(layout.total_dims), layout, rng)
    return SolutionVector(sub.codes)


def stratified_sample(
    dims: Sequence[int] | np.ndarray,
    layout: SpaceLayout,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """n code rows, each dim stratified latin-hypercube style.

    Every dim's code range is cut into n strata with one draw per
    stratum, independently shuffled per column. A dim with k <= n codes
    shows every one of its k values, which iid sampling routinely
    misses on small designs.
    """
    idx = np.asarray(dims, dtype=np.int64)
    if idx.size == 0 or n < 1:
        return np.empty((max(n, 0), idx.size), dtype=np.int64)
    lo, hi = layout.bounds_for(idx)
    rows = np.empty((n, idx.size), dtype=np.int64)
    steps = np.arange(n, dtype=np.int64)
    for j in range(idx.size):
        k = hi[j] - lo[j] + 1
        if k <= n:
            vals = lo[j] + (steps * k) // n
        else:
            starts = lo[j] + (steps * k) // n
            ends = lo[j] + ((steps + 1) * k) // n - 1
            vals = rng.integers(starts, ends + 1)
        rows[:, j] = rng.permutation(vals)
    return rows
