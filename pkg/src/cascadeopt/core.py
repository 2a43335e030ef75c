"""Shared domain types, Pareto dominance and first-front identification.

All objectives are minimized.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class ContractError(ValueError):
    """Raised when an operation is called with inputs violating its contract."""


@dataclass(frozen=True)
class Individual:
    decision: np.ndarray
    objectives: np.ndarray | None = None

    @property
    def valid(self) -> bool:
        return self.objectives is not None


@dataclass(frozen=True)
class Population:
    """Row-aligned decision and objective matrices.

    Members are stored as two arrays rather than a list of objects so that
    selection and variation stay vectorized; ``pop[i]`` still yields an
    :class:`Individual`.
    """

    decisions: np.ndarray
    objectives: np.ndarray
    capacity: int | None = None

    def __post_init__(self):
        X = np.atleast_2d(np.asarray(self.decisions, dtype=float))
        F = np.atleast_2d(np.asarray(self.objectives, dtype=float))
        if X.shape[0] != F.shape[0]:
            raise ContractError(
                f"{X.shape[0]} decision rows but {F.shape[0]} objective rows"
            )
        if not np.all(np.isfinite(F)):
            raise ContractError("objective values must be finite")
        object.__setattr__(self, "decisions", X)
        object.__setattr__(self, "objectives", F)

    def __len__(self) -> int:
        return self.decisions.shape[0]

    def __getitem__(self, i: int) -> Individual:
        return Individual(self.decisions[i], self.objectives[i])

    @property
    def n_obj(self) -> int:
        return self.objectives.shape[1]

    def take(self, idx) -> Population:
        idx = np.asarray(idx, dtype=int)
        return Population(self.decisions[idx], self.objectives[idx], self.capacity)

    @staticmethod
    def concat(a: Population, b: Population) -> Population:
        return Population(
            np.vstack([a.decisions, b.decisions]),
            np.vstack([a.objectives, b.objectives]),
            a.capacity,
        )


@dataclass(frozen=True)
class FrontierSplit:
    frontiers: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))
    nonfrontiers: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=int))


def dominates(a, b) -> bool:
    """Return True iff ``a`` Pareto-dominates ``b`` (minimization)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ContractError(f"length mismatch: {a.shape} vs {b.shape}")
    return bool(np.all(a <= b) and np.any(a < b))


def _objective_matrix(pop) -> np.ndarray:
    if isinstance(pop, Population):
        return pop.objectives
    return np.atleast_2d(np.asarray(pop, dtype=float))


def nondominated_mask(F: np.ndarray, chunk: int = 64) -> np.ndarray:
    """Boolean mask of rows of ``F`` not dominated by any other row.

    Pairwise O(M n^2) scan in small row blocks so the boolean work arrays stay
    cache-resident; comparisons write into preallocated buffers.
    """
    n, m = F.shape
    FT = np.ascontiguousarray(F.T)
    dominated = np.zeros(n, dtype=bool)
    for start in range(0, n, chunk):
        block = FT[:, start:start + chunk]
        rows = block.shape[1]
        # le[i, j]: block row i <= F row j on every objective; lt: strictly < on one
        le = np.ones((rows, n), dtype=bool)
        lt = np.zeros((rows, n), dtype=bool)
        tmp = np.empty((rows, n), dtype=bool)
        for k in range(m):
            a = block[k][:, None]
            b = FT[k][None, :]
            np.less_equal(a, b, out=tmp)
            le &= tmp
            np.less(a, b, out=tmp)
            lt |= tmp
        le &= lt
        dominated |= le.any(axis=0)
    return ~dominated


def identify_frontiers(pop) -> FrontierSplit:
    """Split a population into its first non-dominated front and the rest.

    Accepts a :class:`Population` or a raw ``(n, M)`` objective array.
    """
    F = _objective_matrix(pop)
    if F.size == 0 or F.shape[0] == 0:
        raise ContractError("cannot identify frontiers of an empty population")
    mask = nondominated_mask(F)
    idx = np.arange(F.shape[0])
    return FrontierSplit(frontiers=idx[mask], nonfrontiers=idx[~mask])
