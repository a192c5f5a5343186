"""Gaussian RBF surrogate over normalized sub-vectors.

Models are cheap stand-ins for expensive segment evaluations: fit on the
real-evaluated points (plus synthetic neighbors), then queried thousands
of times by the evolutionary optimizers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve
from scipy.spatial.distance import cdist, pdist

from .errors import DimensionMismatchError, InsufficientDataError

PROVENANCE_REAL = "real"
PROVENANCE_SYNTHETIC = "synthetic"

REGULARIZATION = 1e-8


@dataclass(frozen=True)
class TrainingSet:
    """Normalized points with fitness labels and a real/synthetic tag each."""

    points: np.ndarray
    fitnesses: np.ndarray
    provenance: tuple[str, ...]

    def __post_init__(self) -> None:
        pts = np.atleast_2d(np.asarray(self.points, dtype=float)).copy()
        fit = np.asarray(self.fitnesses, dtype=float).copy()
        if pts.shape[0] != fit.size or pts.shape[0] != len(self.provenance):
            raise DimensionMismatchError("points, fitnesses, provenance misaligned")
        if pts.size and (pts.min() < 0.0 or pts.max() > 1.0):
            raise ValueError("training points must lie in the unit cube")
        pts.setflags(write=False)
        fit.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "fitnesses", fit)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    def __len__(self) -> int:
        return int(self.points.shape[0])

    @property
    def dim(self) -> int:
        return int(self.points.shape[1])

    def add(self, point: np.ndarray, fitness: float, tag: str = PROVENANCE_REAL) -> "TrainingSet":
        pts = np.vstack([self.points, np.asarray(point, dtype=float)])
        fit = np.append(self.fitnesses, float(fitness))
        return TrainingSet(pts, fit, self.provenance + (tag,))


def training_set(points, fitnesses, tags=None) -> TrainingSet:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if tags is None:
        tags = (PROVENANCE_REAL,) * pts.shape[0]
    return TrainingSet(pts, np.asarray(fitnesses, dtype=float), tuple(tags))


@dataclass(frozen=True)
class RbfModel:
    centers: np.ndarray
    weights: np.ndarray
    width: float
    regularization: float

    def __post_init__(self) -> None:
        if self.weights.shape[0] != self.centers.shape[0]:
            raise DimensionMismatchError("one weight per center required")
        if self.width <= 0:
            raise ValueError("kernel width must be positive")

    @property
    def dim(self) -> int:
        return int(self.centers.shape[1])


def _dedup_keep_best(points: np.ndarray, fitnesses: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Collapse exact-duplicate rows, keeping each row's best fitness."""
    uniq, inverse = np.unique(points, axis=0, return_inverse=True)
    best = np.full(uniq.shape[0], -np.inf)
    np.maximum.at(best, inverse, fitnesses)
    return uniq, best


def fit_rbf(ts: TrainingSet) -> RbfModel:
    """Interpolating fit: solve (K + lambda I) w = f on deduped points.

    Kernel is exp(-||a-b||^2 / (2 sigma^2)) with sigma the median pairwise
    distance (1.0 if degenerate). Needs at least 2 distinct points.
    """
    pts, fit = _dedup_keep_best(ts.points, ts.fitnesses)
    if pts.shape[0] < 2:
        raise InsufficientDataError(
            f"need at least 2 distinct points, got {pts.shape[0]}"
        )
    dists = pdist(pts)
    sigma = float(np.median(dists))
    if sigma <= 0.0:
        sigma = 1.0
    gram = np.exp(-cdist(pts, pts, "sqeuclidean") / (2.0 * sigma * sigma))
    gram[np.diag_indices_from(gram)] += REGULARIZATION
    weights = solve(gram, fit, assume_a="pos")
    return RbfModel(pts, weights, sigma, REGULARIZATION)


def predict_many(model: RbfModel, xs: np.ndarray) -> np.ndarray:
    """Model values at each row of xs."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != model.dim:
        raise DimensionMismatchError(
            f"query dim {xs.shape[1]} != model dim {model.dim}"
        )
    k = np.exp(-cdist(xs, model.centers, "sqeuclidean") / (2.0 * model.width**2))
    return k @ model.weights


def predict_rbf(model: RbfModel, x: np.ndarray) -> float:
    return float(predict_many(model, np.asarray(x, dtype=float).reshape(1, -1))[0])


def localized_augment(
    ts: TrainingSet, count_per_point: int, delta: float, rng: np.random.Generator
) -> TrainingSet:
    """Add `count_per_point` jittered copies of each real point.

    Each synthetic coordinate is clamp(p + U(-delta, delta), 0, 1) and the
    label is the parent's fitness. The input points survive untouched.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if count_per_point == 0:
        return ts
    new_pts = [ts.points]
    new_fit = [ts.fitnesses]
    tags = list(ts.provenance)
    for p, f, tag in zip(ts.points, ts.fitnesses, ts.provenance):
        if tag != PROVENANCE_REAL:
            continue
        jitter = rng.uniform(-delta, delta, size=(count_per_point, ts.dim))
        new_pts.append(np.clip(p + jitter, 0.0, 1.0))
        new_fit.append(np.full(count_per_point, f))
        tags.extend([PROVENANCE_SYNTHETIC] * count_per_point)
    return TrainingSet(np.vstack(new_pts), np.concatenate(new_fit), tuple(tags))


def refit_with(
    model: RbfModel, ts: TrainingSet, new_point: np.ndarray, new_fitness: float
) -> RbfModel:
    """Fold one more real evaluation in and refit from scratch."""
    pt = np.asarray(new_point, dtype=float)
    if pt.size != model.dim:
        raise DimensionMismatchError(f"point dim {pt.size} != model dim {model.dim}")
    return fit_rbf(ts.add(pt, new_fitness, PROVENANCE_REAL))
