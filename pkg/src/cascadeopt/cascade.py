"""Cascade-clustering environmental selection.

Frontiers are attached to their nearest reference vector (by sine of the
included angle) and ranked inside each cluster by a scalarizer; the best one
becomes the cluster center. Nonfrontiers are attached to the nearest center
and ranked by distance to it. Survivors are then taken round-robin from the
per-cluster queues ``<frontiers, nonfrontiers>``.

Objectives are used raw; no normalization unless explicitly requested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from cascadeopt.core import ContractError, FrontierSplit, Population, identify_frontiers
from cascadeopt.refgen import ReferenceSet

DEFAULT_ALPHA = 5.0


@dataclass(frozen=True)
class Cluster:
    reference_index: int
    frontier_queue: np.ndarray
    nonfrontier_queue: np.ndarray
    frontier_scores: np.ndarray
    center_distances: np.ndarray

    @property
    def center(self) -> int:
        return int(self.frontier_queue[0])

    @property
    def selection_queue(self) -> np.ndarray:
        return np.concatenate([self.frontier_queue, self.nonfrontier_queue])


@dataclass(frozen=True)
class SelectionOutcome:
    survivors: Population
    survivor_index: np.ndarray  # rows of the pool that survived, in pick order
    activity: np.ndarray
    cluster_count: int

    @property
    def active_count(self) -> int:
        return int(self.activity.sum())


def _check_ref(z: np.ndarray) -> float:
    nz = float(np.linalg.norm(z))
    if nz == 0.0:
        raise ContractError("reference direction must be non-zero")
    return nz


def perpendicular_distance(o, z) -> float:
    """Distance from ``o`` to the line spanned by ``z``."""
    o = np.asarray(o, dtype=float)
    z = np.asarray(z, dtype=float)
    nz = _check_ref(z)
    u = z / nz
    return float(np.linalg.norm(o - (o @ u) * u))


def sine_to_reference(o, z) -> float:
    o = np.asarray(o, dtype=float)
    z = np.asarray(z, dtype=float)
    _check_ref(z)
    no = float(np.linalg.norm(o))
    if no == 0.0:
        return 0.0
    return min(1.0, max(0.0, perpendicular_distance(o, z) / no))


def pdm(o, z, alpha: float = DEFAULT_ALPHA) -> float:
    """Proximity term ``mean(o)`` plus ``alpha`` times the distance to the line of ``z``.

    ``alpha * ||o|| * sin(o, z)`` is evaluated as the perpendicular distance
    directly, which is numerically stable near the reference line.
    """
    o = np.asarray(o, dtype=float)
    return float(o.mean()) + alpha * perpendicular_distance(o, z)


def pbi(o, z, alpha: float = DEFAULT_ALPHA) -> float:
    """Projection length onto ``z`` plus ``alpha`` times the perpendicular distance."""
    o = np.asarray(o, dtype=float)
    z = np.asarray(z, dtype=float)
    nz = _check_ref(z)
    return float(o @ z) / nz + alpha * perpendicular_distance(o, z)


SCALARIZERS = ("pdm", "pbi")


def _unit_rows(Z: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(Z, axis=1)
    if np.any(norms == 0):
        raise ContractError("reference directions must be non-zero")
    return Z / norms[:, None]


def attach_frontiers(frontiers, refs) -> tuple[np.ndarray, np.ndarray]:
    """Nearest reference (minimum sine) for each frontier.

    Returns ``(assignment, sine)``; ties go to the lowest reference index.
    """
    Fr = np.atleast_2d(np.asarray(frontiers, dtype=float))
    Z = refs.points if isinstance(refs, ReferenceSet) else np.atleast_2d(refs)
    if Fr.shape[0] == 0 or Z.shape[0] == 0:
        raise ContractError("need non-empty frontier and reference sets")
    U = _unit_rows(Z)
    norms = np.linalg.norm(Fr, axis=1)
    proj = Fr @ U.T
    # squared sine times squared norm; minimizing sine == minimizing this per row
    perp2 = np.maximum(norms[:, None] ** 2 - proj**2, 0.0)
    assignment = np.argmin(perp2, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        sine = np.where(
            norms > 0, np.sqrt(perp2[np.arange(len(Fr)), assignment]) / norms, 0.0
        )
    return assignment, np.clip(sine, 0.0, 1.0)


def _frontier_scores(F: np.ndarray, U: np.ndarray, scalarizer: str, alpha: float) -> np.ndarray:
    # U holds the unit direction attached to each row of F
    along = np.einsum("ij,ij->i", F, U)
    perp = np.linalg.norm(F - along[:, None] * U, axis=1)
    if scalarizer == "pdm":
        return F.mean(axis=1) + alpha * perp
    if scalarizer == "pbi":
        return along + alpha * perp
    raise ContractError(f"unknown scalarizer {scalarizer!r}")


@dataclass(frozen=True)
class _FlatClusters:
    """Queue membership as flat arrays: pool index, cluster slot, queue position."""

    owners: np.ndarray  # reference index of each cluster slot
    member: np.ndarray
    slot: np.ndarray
    position: np.ndarray
    value: np.ndarray  # frontier score or distance to center
    is_frontier: np.ndarray


def _group_positions(sorted_keys: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    uniq, starts = np.unique(sorted_keys, return_index=True)
    group = np.searchsorted(uniq, sorted_keys)
    return uniq, group, np.arange(sorted_keys.size) - starts[group]


def _flat_clusters(
    split: FrontierSplit, F: np.ndarray, Z: np.ndarray, alpha: float, scalarizer: str
) -> _FlatClusters:
    fr = np.asarray(split.frontiers, dtype=int)
    nf = np.asarray(split.nonfrontiers, dtype=int)
    if fr.size == 0:
        raise ContractError("no frontiers to cluster")
    assignment, _ = attach_frontiers(F[fr], Z)
    U = _unit_rows(Z)
    scores = _frontier_scores(F[fr], U[assignment], scalarizer, alpha)

    # stable: ties in score keep ascending pool order
    order = np.lexsort((scores, assignment))
    owners, f_slot, f_pos = _group_positions(assignment[order])
    f_member = fr[order]
    centers = f_member[f_pos == 0]

    if nf.size:
        dist = cdist(F[nf], F[centers])
        owner = np.argmin(dist, axis=1)
        nf_dist = dist[np.arange(nf.size), owner]
        order2 = np.lexsort((nf_dist, owner))
        n_front = np.bincount(f_slot, minlength=owners.size)
        n_slot = owner[order2]
        _, _, n_pos = _group_positions(n_slot)
        n_pos = n_pos + n_front[n_slot]
        n_member = nf[order2]
        n_val = nf_dist[order2]
    else:
        n_slot = n_pos = n_member = np.empty(0, dtype=int)
        n_val = np.empty(0)

    return _FlatClusters(
        owners,
        np.concatenate([f_member, n_member]),
        np.concatenate([f_slot, n_slot]),
        np.concatenate([f_pos, n_pos]),
        np.concatenate([scores[order], n_val]),
        np.concatenate([np.ones(fr.size, bool), np.zeros(n_member.size, bool)]),
    )


def build_clusters(
    split: FrontierSplit,
    pop,
    refs: ReferenceSet,
    alpha: float = DEFAULT_ALPHA,
    scalarizer: str = "pdm",
) -> list[Cluster]:
    """Bi-level clustering; returns one cluster per active reference, by reference index."""
    F = pop.objectives if isinstance(pop, Population) else np.atleast_2d(pop)
    Z = refs.points if isinstance(refs, ReferenceSet) else np.atleast_2d(refs)
    flat = _flat_clusters(split, F, Z, alpha, scalarizer)
    clusters = []
    for c, r in enumerate(flat.owners):
        mine = flat.slot == c
        fm = mine & flat.is_frontier
        nm = mine & ~flat.is_frontier
        fo = np.argsort(flat.position[fm], kind="stable")
        no = np.argsort(flat.position[nm], kind="stable")
        clusters.append(
            Cluster(
                reference_index=int(r),
                frontier_queue=flat.member[fm][fo],
                nonfrontier_queue=flat.member[nm][no],
                frontier_scores=flat.value[fm][fo],
                center_distances=flat.value[nm][no],
            )
        )
    return clusters


def _round_robin(slot: np.ndarray, position: np.ndarray, member: np.ndarray, N: int) -> np.ndarray:
    if member.size < N:
        raise ContractError(f"only {member.size} queued individuals for {N} slots")
    order = np.lexsort((slot, position))
    return member[order[:N]]


def round_robin_order(clusters: list[Cluster], N: int) -> np.ndarray:
    """Pool indices popped one head per cluster per round until N are taken."""
    queues = [c.selection_queue for c in clusters]
    rounds = np.concatenate([np.arange(len(q)) for q in queues])
    slots = np.concatenate([np.full(len(q), k) for k, q in enumerate(queues)])
    return _round_robin(slots, rounds, np.concatenate(queues).astype(int), N)


def round_robin_pick(clusters: list[Cluster], N: int, pop=None, n_refs: int | None = None):
    picked = round_robin_order(clusters, N)
    n_refs = n_refs if n_refs is not None else max(c.reference_index for c in clusters) + 1
    activity = np.zeros(n_refs, dtype=bool)
    activity[[c.reference_index for c in clusters]] = True
    survivors = pop.take(picked) if isinstance(pop, Population) else None
    return SelectionOutcome(survivors, picked, activity, len(clusters))


def normalize_objectives(F: np.ndarray, front: np.ndarray) -> np.ndarray:
    """Translate by the ideal point and scale by the frontier nadir estimate."""
    ideal = F.min(axis=0)
    nadir = F[front].max(axis=0)
    span = np.where(nadir - ideal > 1e-12, nadir - ideal, 1.0)
    return (F - ideal) / span


def select(
    pool: Population,
    refs: ReferenceSet,
    N: int,
    alpha: float = DEFAULT_ALPHA,
    scalarizer: str = "pdm",
    normalize: bool = False,
) -> SelectionOutcome:
    """Pick N survivors from ``pool`` by cascade clustering.

    Survivor rows are copied from ``pool`` untouched; ``normalize`` only affects
    the geometry used for clustering.
    """
    if scalarizer not in SCALARIZERS:
        raise ContractError(f"unknown scalarizer {scalarizer!r}")
    if len(pool) < N:
        raise ContractError(f"pool of {len(pool)} cannot fill {N} slots")
    split = identify_frontiers(pool)
    F = pool.objectives
    if normalize:
        F = normalize_objectives(F, split.frontiers)
    flat = _flat_clusters(split, F, refs.points, alpha, scalarizer)
    picked = _round_robin(flat.slot, flat.position, flat.member, N)
    activity = np.zeros(len(refs), dtype=bool)
    activity[flat.owners] = True
    return SelectionOutcome(pool.take(picked), picked, activity, int(flat.owners.size))
