"""Chain decomposition into overlapping or exclusive segments.

The overlapping scheme grows each segment block-by-block until it holds
at least `epsilon` dimensions, then starts the next segment a few blocks
before the current one ended, so adjacent segments share a short block
interval. The exclusive scheme grows the same way but never steps back.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NoNextSegmentError
from .space import SpaceLayout


@dataclass(frozen=True)
class Segment:
    """A contiguous block interval with its covered global dims.

    `index` is the 1-based segment id; block indices are 0-based.
    """

    index: int
    first_block: int
    last_block: int
    dims: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.dims, dtype=np.int64).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "dims", arr)
        if self.last_block < self.first_block:
            raise InvalidParameterError("segment block range is empty")

    @property
    def n_blocks(self) -> int:
        return self.last_block - self.first_block + 1


@dataclass(frozen=True)
class OverlapPartition:
    """Dim partition for one adjacent segment pair (left, right).

    com: dims covered by both segments.
    pec_left: dims only the left segment optimizes in this pair, i.e. its
        dims minus com and minus anything shared with its left neighbor.
    pec_right: mirror image for the right segment.
    """

    shared_blocks: tuple[int, ...]
    com: np.ndarray
    pec_left: np.ndarray
    pec_right: np.ndarray

    def __post_init__(self) -> None:
        for name in ("com", "pec_left", "pec_right"):
            arr = np.asarray(getattr(self, name), dtype=np.int64).copy()
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


@dataclass(frozen=True)
class DecompositionPlan:
    segments: tuple[Segment, ...]
    overlaps: tuple[OverlapPartition, ...]
    epsilon: int

    @property
    def m(self) -> int:
        return len(self.segments)

    def segment(self, i: int) -> Segment:
        """Segment by 1-based id."""
        if not 1 <= i <= self.m:
            raise NoNextSegmentError(f"segment id {i} outside 1..{self.m}")
        return self.segments[i - 1]

    def peculiar_dims(self, i: int) -> np.ndarray:
        """Dims of segment i not shared with either neighbor (1-based i)."""
        seg = self.segment(i)
        pec = seg.dims
        if i > 1:
            pec = np.setdiff1d(pec, self.segments[i - 2].dims, assume_unique=True)
        if i < self.m:
            pec = np.setdiff1d(pec, self.segments[i].dims, assume_unique=True)
        return pec

    def propagate_blocks(self, i: int) -> tuple[int, int]:
        """Block interval whose output feeds segment i+1 (1 <= i < m).

        Cut just before the next segment starts, so any shared blocks are
        re-processed by the next segment itself.
        """
        if not 1 <= i < self.m:
            raise NoNextSegmentError(f"segment {i} has no successor")
        seg = self.segments[i - 1]
        nxt = self.segments[i]
        return seg.first_block, min(seg.last_block, nxt.first_block - 1)

    def to_json(self) -> str:
        doc = {
            "epsilon": self.epsilon,
            "segments": [
                {
                    "index": s.index,
                    "blocks": [s.first_block, s.last_block],
                    "dims": s.dims.tolist(),
                }
                for s in self.segments
            ],
            "overlaps": [
                {
                    "pair": [i + 1, i + 2],
                    "shared_blocks": list(o.shared_blocks),
                    "com": o.com.tolist(),
                    "pec_left": o.pec_left.tolist(),
                    "pec_right": o.pec_right.tolist(),
                }
                for i, o in enumerate(self.overlaps)
            ],
        }
        return json.dumps(doc)


def _grow_segments(
    layout: SpaceLayout, epsilon: int, step_back: bool
) -> list[tuple[int, int]]:
    """Greedy block intervals; shared tail when step_back is on."""
    if epsilon <= 0:
        raise InvalidParameterError(f"epsilon must be positive, got {epsilon}")
    n = layout.n_blocks
    ranges: list[tuple[int, int]] = []
    start = 0
    while start < n:
        ndims = 0
        block = start
        while block < n:
            ndims += len(layout.blocks[block])
            if ndims >= epsilon:
                break
            block += 1
        last = min(block, n - 1)
        ranges.append((start, last))
        if last == n - 1:
            break
        if step_back:
            overlap = max(1, int(round(0.2 * (last - start + 1))))
            # two guards: the cursor must advance (a 1-block segment shares
            # nothing), and the new segment must clear the one before the
            # current, else fat tail blocks let non-adjacent segments touch
            floor = ranges[-2][1] + 1 if len(ranges) >= 2 else 0
            start = max(last - overlap + 1, start + 1, floor)
        else:
            start = last + 1
    return ranges


def _build_plan(layout: SpaceLayout, ranges: list[tuple[int, int]], epsilon: int) -> DecompositionPlan:
    segments = tuple(
        Segment(i + 1, first, last, layout.dims_of_blocks(first, last))
        for i, (first, last) in enumerate(ranges)
    )
    overlaps = []
    for i in range(len(segments) - 1):
        left, right = segments[i], segments[i + 1]
        com = np.intersect1d(left.dims, right.dims, assume_unique=True)
        pec_left = np.setdiff1d(left.dims, com, assume_unique=True)
        if i > 0:
            pec_left = np.setdiff1d(pec_left, segments[i - 1].dims, assume_unique=True)
        pec_right = np.setdiff1d(right.dims, com, assume_unique=True)
        if i + 2 < len(segments):
            pec_right = np.setdiff1d(pec_right, segments[i + 2].dims, assume_unique=True)
        shared = tuple(range(right.first_block, left.last_block + 1))
        overlaps.append(OverlapPartition(shared, com, pec_left, pec_right))
    return DecompositionPlan(segments, tuple(overlaps), epsilon)


def sod_decompose(layout: SpaceLayout, epsilon: int) -> DecompositionPlan:
    """Overlapping decomposition.

    Grow each segment until it covers at least epsilon dims (or the chain
    ends); if blocks remain, the next segment starts
    max(1, round(0.2 * segment blocks)) blocks before the current end, so
    those blocks are shared. Single-block segments cannot share and the
    cursor simply advances.
    """
    ranges = _grow_segments(layout, epsilon, step_back=True)
    return _build_plan(layout, ranges, epsilon)


def exclusive_decompose(layout: SpaceLayout, epsilon: int) -> DecompositionPlan:
    """Same greedy growth, but segments partition the chain disjointly."""
    ranges = _grow_segments(layout, epsilon, step_back=False)
    return _build_plan(layout, ranges, epsilon)


def pair_partition(plan: DecompositionPlan, i: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(com, pec_left, pec_right) for the adjacent pair (i, i+1), 1-based i."""
    if not 1 <= i < plan.m:
        raise NoNextSegmentError(f"no pair ({i}, {i + 1}) in a {plan.m}-segment plan")
    o = plan.overlaps[i - 1]
    return o.com, o.pec_left, o.pec_right
