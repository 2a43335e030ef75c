"""Reference-vector adaptation by sampling, incremental learning and reduction.

When reference activity has been frozen for ``theta`` generations and fewer
than N references are active, the current points are labelled by activity,
the classifier is updated, a one-step-denser reference set is generated and
only its best-scoring points are kept.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from cascadeopt.core import ContractError
from cascadeopt.refgen import (
    DEFAULT_POINT_CAP,
    DensityTooHighError,
    ReferenceSet,
    SimplexProjection,
    escalate_density,
    project_to_simplex_plane,
)
from cascadeopt.svm import DEFAULT_C, DEFAULT_KERNEL_SCALE, EffectiveAreaClassifier

log = logging.getLogger(__name__)


def theta_schedule(max_fes: int) -> int:
    """Stability window: ``min(20, max(5, ceil(maxFEs / 2e4)))`` generations."""
    return int(min(20, max(5, math.ceil(max_fes / 2e4))))


@dataclass(frozen=True)
class StatusSampler:
    theta: int
    last_activity: np.ndarray | None = None
    stable_count: int = 0

    @property
    def stable(self) -> bool:
        return self.last_activity is not None and self.stable_count >= self.theta

    def reset(self) -> StatusSampler:
        return StatusSampler(self.theta)


def sampler_update(s: StatusSampler, activity) -> StatusSampler:
    activity = np.asarray(activity, dtype=bool)
    last = s.last_activity
    if last is None or last.shape != activity.shape:
        # new or replaced reference set: activity vectors are not comparable
        return StatusSampler(s.theta, activity.copy(), 0)
    if np.array_equal(last, activity):
        return StatusSampler(s.theta, last, s.stable_count + 1)
    return StatusSampler(s.theta, activity.copy(), 0)


def train_incremental(
    clf: EffectiveAreaClassifier | None,
    actives,
    inactives,
    kernel_scale: float = DEFAULT_KERNEL_SCALE,
    C: float = DEFAULT_C,
) -> EffectiveAreaClassifier:
    """Learn active (+1) vs inactive (-1) projected points on top of ``clf``."""
    pos = [np.atleast_2d(actives)] if np.size(actives) else []
    neg = [np.atleast_2d(inactives)] if np.size(inactives) else []
    if not pos and not neg:
        raise ContractError("no samples to learn from")
    X = np.vstack(pos + neg).astype(float)
    n_pos = pos[0].shape[0] if pos else 0
    y = np.where(np.arange(X.shape[0]) < n_pos, 1.0, -1.0)
    if clf is None:
        return EffectiveAreaClassifier(kernel_scale=kernel_scale, C=C).fit(X, y)
    return clf.partial_fit(X, y)


def score_points(clf: EffectiveAreaClassifier, points) -> np.ndarray:
    return clf.score(points)


def reduce_by_score(scores: np.ndarray, n_keep: int) -> tuple[np.ndarray, float]:
    """Indices with score >= delta, delta being the n_keep-th highest score.

    Keeps everything (delta = lowest score) when fewer than ``n_keep`` points exist.
    """
    if scores.size <= n_keep:
        return np.arange(scores.size), float(scores.min())
    delta = float(np.sort(scores)[::-1][n_keep - 1])
    return np.flatnonzero(scores >= delta), delta


@dataclass(frozen=True)
class LearningEvent:
    generation: int
    old_count: int
    new_count: int
    generated_count: int
    delta: float
    density_after: tuple[int, ...]
    active_before: int
    skipped: bool = False
    reason: str = ""
    upper_bound: int | None = None
    igd_lower_bound: float | None = None


class AdaptResult(NamedTuple):
    refs: ReferenceSet
    classifier: EffectiveAreaClassifier | None
    event: LearningEvent | None
    sampler: StatusSampler


def adapt(
    refs: ReferenceSet,
    sampler: StatusSampler,
    clf: EffectiveAreaClassifier | None,
    N: int,
    activity=None,
    *,
    generation: int = 0,
    n_keep_factor: float = 2.0,
    kernel_scale: float = DEFAULT_KERNEL_SCALE,
    C: float = DEFAULT_C,
    cap: int = DEFAULT_POINT_CAP,
) -> AdaptResult:
    """One sampling-learning-reducing step, or a no-op if the guard fails.

    ``activity`` defaults to ``refs.active``. The returned sampler is reset
    whenever the reference set is replaced.
    """
    activity = refs.active if activity is None else np.asarray(activity, dtype=bool)
    if activity is None or activity.shape != (len(refs),):
        raise ContractError("activity must flag every current reference point")
    n_active = int(activity.sum())
    if not sampler.stable or n_active >= N:
        return AdaptResult(refs, clf, None, sampler)

    try:
        denser = escalate_density(refs, cap)
    except DensityTooHighError as exc:
        log.warning("reference adaptation skipped: %s", exc)
        event = LearningEvent(
            generation, len(refs), len(refs), 0, float("nan"), refs.density,
            n_active, skipped=True, reason=str(exc),
        )
        return AdaptResult(refs, clf, event, sampler.reset())

    proj = SimplexProjection.for_dim(refs.n_obj)
    coords = project_to_simplex_plane(refs.points, proj)
    clf = train_incremental(clf, coords[activity], coords[~activity], kernel_scale, C)

    scores = clf.score(project_to_simplex_plane(denser.points, proj))
    n_keep = int(round(n_keep_factor * N))
    keep, delta = reduce_by_score(scores, n_keep)
    new_refs = denser.subset(keep, scores)
    event = LearningEvent(
        generation, len(refs), len(new_refs), len(denser), delta, new_refs.density, n_active,
    )
    log.debug("adaptation at gen %d: %d -> %d refs, delta=%.4f", generation, len(refs), len(new_refs), delta)
    return AdaptResult(new_refs, clf, event, sampler.reset())
