"""Structured reference points on the unit simplex.

Single-layer Das-Dennis lattices for M < 8, boundary + shrunk inner layers
for M >= 8, and an orthonormal frame of the simplex hyperplane used to feed
reference points to the classifier in M - 1 dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import combinations
from math import comb
from pathlib import Path

import numpy as np

from cascadeopt.core import ContractError

DEFAULT_POINT_CAP = 10**6
TWO_LAYER_MIN_M = 8
INNER_SHRINK = 0.5


class DensityTooHighError(ValueError):
    """The requested lattice would exceed the configured point cap."""


@dataclass(frozen=True)
class ReferenceSet:
    """Reference points plus the density record that generated them.

    ``density`` is ``(H,)`` for a single lattice or ``(H_outer, H_inner)``
    for the two-layer scheme. ``scores`` is filled in when the set comes out
    of a classifier-driven reduction.
    """

    points: np.ndarray
    density: tuple[int, ...]
    active: np.ndarray | None = None
    scores: np.ndarray | None = None

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def n_obj(self) -> int:
        return self.points.shape[1]

    @property
    def two_layer(self) -> bool:
        return len(self.density) == 2

    def with_activity(self, active) -> ReferenceSet:
        return replace(self, active=np.asarray(active, dtype=bool))

    def subset(self, idx, scores=None) -> ReferenceSet:
        idx = np.asarray(idx, dtype=int)
        return ReferenceSet(
            self.points[idx], self.density, None, None if scores is None else scores[idx]
        )


def lattice_count(M: int, H: int) -> int:
    return comb(H + M - 1, M - 1)


def _compositions(M: int, H: int) -> np.ndarray:
    # stars and bars: bar positions among H + M - 1 slots
    n = H + M - 1
    rows = []
    for bars in combinations(range(n), M - 1):
        prev = -1
        row = []
        for b in bars:
            row.append(b - prev - 1)
            prev = b
        row.append(n - prev - 1)
        rows.append(row)
    return np.array(rows, dtype=float)


def generate_simplex_lattice(M: int, H: int, cap: int = DEFAULT_POINT_CAP) -> ReferenceSet:
    """All points ``(i_1/H, ..., i_M/H)`` with nonnegative integers summing to H."""
    if M < 2 or H < 1:
        raise ContractError(f"need M >= 2 and H >= 1, got M={M}, H={H}")
    count = lattice_count(M, H)
    if count > cap:
        raise DensityTooHighError(f"lattice M={M}, H={H} has {count} points > cap {cap}")
    return ReferenceSet(_compositions(M, H) / H, (H,))


def _dedup(points: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    keys = np.round(points / tol).astype(np.int64)
    _, first = np.unique(keys, axis=0, return_index=True)
    return points[np.sort(first)]


def generate_two_layer(
    M: int, H_outer: int, H_inner: int, cap: int = DEFAULT_POINT_CAP
) -> ReferenceSet:
    """Boundary lattice at ``H_outer`` plus an inner lattice shrunk halfway to the centroid."""
    if M < 2 or H_outer < 1 or H_inner < 1:
        raise ContractError(f"invalid two-layer request M={M}, ({H_outer}, {H_inner})")
    count = lattice_count(M, H_outer) + lattice_count(M, H_inner)
    if count > cap:
        raise DensityTooHighError(
            f"two-layer M={M}, ({H_outer}, {H_inner}) has {count} points > cap {cap}"
        )
    outer = _compositions(M, H_outer) / H_outer
    inner = INNER_SHRINK * (_compositions(M, H_inner) / H_inner) + (1 - INNER_SHRINK) / M
    points = np.vstack([outer, inner])
    # inner points are strictly interior; outer points are interior only when H_outer >= M
    if H_outer >= M:
        points = _dedup(points)
    return ReferenceSet(points, (H_outer, H_inner))


def generate(M: int, density: tuple[int, ...], cap: int = DEFAULT_POINT_CAP) -> ReferenceSet:
    if len(density) == 1:
        return generate_simplex_lattice(M, density[0], cap)
    return generate_two_layer(M, density[0], density[1], cap)


def initial_density(M: int, N: int, cap: int = DEFAULT_POINT_CAP) -> tuple[int, ...]:
    """Smallest density whose full set has at least N points."""
    if M < TWO_LAYER_MIN_M:
        H = 1
        while lattice_count(M, H) < N:
            H += 1
            if lattice_count(M, H) > cap:
                raise DensityTooHighError(f"no lattice for M={M} reaches N={N} under cap")
        return (H,)
    best = None
    for h_out in range(1, 64):
        base = lattice_count(M, h_out)
        if base > cap:
            break
        for h_in in range(1, h_out + 1):
            total = base + lattice_count(M, h_in)
            if total >= N and (best is None or total < best[0]):
                best = (total, h_out, h_in)
                break
    if best is None:
        raise DensityTooHighError(f"no two-layer set for M={M} reaches N={N} under cap")
    return best[1:]


def initial_reference_set(M: int, N: int, cap: int = DEFAULT_POINT_CAP) -> ReferenceSet:
    return generate(M, initial_density(M, N, cap), cap)


def escalate_density(current: ReferenceSet, cap: int = DEFAULT_POINT_CAP) -> ReferenceSet:
    """The full (unreduced) set one density step above ``current``.

    Single lattices go from H to H + 1; two-layer sets raise both layers by one.
    """
    if not current.density:
        raise ContractError("reference set carries no density record")
    denser = tuple(h + 1 for h in current.density)
    return generate(current.n_obj, denser, cap)


def check_on_simplex(points: np.ndarray, tol: float = 1e-6) -> None:
    points = np.atleast_2d(points)
    if np.any(points < -tol) or np.any(np.abs(points.sum(axis=1) - 1.0) > tol):
        raise ContractError("points must lie on the unit simplex")


@dataclass(frozen=True)
class SimplexProjection:
    basis: np.ndarray  # (M - 1, M), orthonormal rows
    origin: np.ndarray  # centroid (1/M, ..., 1/M)

    @classmethod
    def for_dim(cls, M: int) -> SimplexProjection:
        """Build the frame by Gram-Schmidt on ``e_k - centroid``, k = 1..M-1."""
        origin = np.full(M, 1.0 / M)
        basis = []
        for k in range(M - 1):
            v = np.eye(M)[k] - origin
            for b in basis:
                v = v - (v @ b) * b
            basis.append(v / np.linalg.norm(v))
        return cls(np.array(basis), origin)


def project_to_simplex_plane(points, proj: SimplexProjection) -> np.ndarray:
    """Isometric (M - 1)-dimensional coordinates of simplex points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    check_on_simplex(pts)
    return (pts - proj.origin) @ proj.basis.T


def save_reference_set(refs: ReferenceSet, path) -> None:
    np.savetxt(Path(path), refs.points, delimiter="\t", fmt="%.17g")


def load_reference_set(path, density: tuple[int, ...] = ()) -> ReferenceSet:
    points = np.atleast_2d(np.loadtxt(Path(path), delimiter="\t"))
    check_on_simplex(points, tol=1e-9)
    return ReferenceSet(points, density)
