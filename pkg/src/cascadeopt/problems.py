"""Scalable benchmark problems with analytic Pareto-front samplers.

Default decision dimensions follow the CEC'2018 many-objective competition
settings: DTLZ1 D = M + 4, DTLZ2/cDTLZ3 D = M + 9, DTLZ7 D = M + 19,
MaF1 D = M + 9, WFG1 k = 2(M - 1), l = 20.

Every ``evaluate`` accepts a single vector or an ``(n, D)`` batch.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from cascadeopt.core import ContractError, nondominated_mask
from cascadeopt.refgen import generate_simplex_lattice, lattice_count

_BOUND_TOL = 1e-12


class UnsupportedMetricError(NotImplementedError):
    """The problem has no closed-form ray/front intersection."""


@dataclass(frozen=True)
class Problem:
    name: str
    M: int
    D: int
    lower: np.ndarray
    upper: np.ndarray
    pf_kind: str
    curvature: str
    _objective: Callable[[np.ndarray, int], np.ndarray] = field(repr=False)
    _pf: Callable[[int, int], np.ndarray] = field(repr=False)
    _ray: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    _effective: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    def evaluate(self, x) -> np.ndarray:
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.D:
            raise ContractError(f"{self.name} expects D={self.D}, got {X.shape[1]}")
        if np.any(X < self.lower - _BOUND_TOL) or np.any(X > self.upper + _BOUND_TOL):
            raise ContractError(f"decision vector outside the bounds of {self.name}")
        F = self._objective(X, self.M)
        return F[0] if single else F

    def pf_sample(self, k: int | None = None) -> np.ndarray:
        """Deterministic quasi-uniform sample of about ``k`` true-front points."""
        k = default_pf_size(self.M) if k is None else k
        if k < self.M:
            raise ContractError(f"pf_sample needs k >= M, got {k}")
        return self._pf(self.M, k)

    @property
    def has_ray_intersection(self) -> bool:
        return self._ray is not None

    def effective_mask(self, refs: np.ndarray) -> np.ndarray:
        """Which simplex points have rays meeting the true front."""
        if self._effective is None:
            raise UnsupportedMetricError(f"{self.name} has no analytic effective region")
        return self._effective(np.atleast_2d(refs))

    def ray_intersection(self, refs: np.ndarray) -> np.ndarray:
        """Point where each ray through a simplex point meets the front surface."""
        if self._ray is None:
            raise UnsupportedMetricError(f"{self.name} has no closed-form ray intersection")
        return self._ray(np.atleast_2d(refs))


def default_pf_size(M: int) -> int:
    return {2: 1000, 3: 5000, 4: 6000, 5: 7000}.get(M, 8000)


def lattice_for(M: int, k: int) -> np.ndarray:
    """Largest simplex lattice with at most ``k`` points (at least the vertices)."""
    H = 1
    while lattice_count(M, H + 1) <= k:
        H += 1
    return generate_simplex_lattice(M, H).points


def _all_full(Z: np.ndarray) -> np.ndarray:
    return np.ones(Z.shape[0], dtype=bool)


# -- DTLZ family ---------------------------------------------------------------


def _linear_shape(Y: np.ndarray, M: int) -> np.ndarray:
    """Columns x_1..x_{M-1} -> the M linear-front shape terms summing to 1."""
    n = Y.shape[0]
    out = np.ones((n, M))
    for i in range(M):
        out[:, i] = np.prod(Y[:, : M - 1 - i], axis=1)
        if i > 0:
            out[:, i] *= 1.0 - Y[:, M - 1 - i]
    return out


def _spherical_shape(Y: np.ndarray, M: int) -> np.ndarray:
    n = Y.shape[0]
    out = np.ones((n, M))
    theta = 0.5 * np.pi * Y[:, : M - 1]
    for i in range(M):
        out[:, i] = np.prod(np.cos(theta[:, : M - 1 - i]), axis=1)
        if i > 0:
            out[:, i] *= np.sin(theta[:, M - 1 - i])
    return out


def _g_rastrigin(Xd: np.ndarray) -> np.ndarray:
    return 100.0 * (Xd.shape[1] + np.sum((Xd - 0.5) ** 2 - np.cos(20.0 * np.pi * (Xd - 0.5)), axis=1))


def _g_sphere(Xd: np.ndarray) -> np.ndarray:
    return np.sum((Xd - 0.5) ** 2, axis=1)


def _dtlz1(X, M):
    g = _g_rastrigin(X[:, M - 1:])
    return 0.5 * (1.0 + g)[:, None] * _linear_shape(X, M)


def _dtlz2(X, M):
    g = _g_sphere(X[:, M - 1:])
    return (1.0 + g)[:, None] * _spherical_shape(X, M)


def _convexify(F: np.ndarray) -> np.ndarray:
    out = F.copy()
    out[:, :-1] = F[:, :-1] ** 4
    out[:, -1] = F[:, -1] ** 2
    return out


def _cdtlz3(X, M):
    g = _g_rastrigin(X[:, M - 1:])
    return _convexify((1.0 + g)[:, None] * _spherical_shape(X, M))


def _dtlz7_phi(x):
    return x * (1.0 + np.sin(3.0 * np.pi * x))


def _dtlz7(X, M):
    Xd = X[:, M - 1:]
    g = 1.0 + 9.0 * Xd.mean(axis=1)
    F = np.empty((X.shape[0], M))
    F[:, : M - 1] = X[:, : M - 1]
    h = M - np.sum(_dtlz7_phi(F[:, : M - 1]) / (1.0 + g)[:, None], axis=1)
    F[:, M - 1] = (1.0 + g) * h
    return F


def _maf1(X, M):
    g = _g_sphere(X[:, M - 1:])
    return (1.0 + g)[:, None] * (1.0 - _linear_shape(X, M))


def _pf_dtlz1(M, k):
    return 0.5 * lattice_for(M, k)


def _pf_dtlz2(M, k):
    Z = lattice_for(M, k)
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def _pf_cdtlz3(M, k):
    return _convexify(_pf_dtlz2(M, k))


def _pf_maf1(M, k):
    return 1.0 - lattice_for(M, k)


def _dtlz7_front_values(n_grid: int = 20001) -> np.ndarray:
    """x in [0, 1] whose phi(x) beats every smaller x (per-coordinate front)."""
    x = np.linspace(0.0, 1.0, n_grid)
    phi = _dtlz7_phi(x)
    best_before = np.concatenate([[-np.inf], np.maximum.accumulate(phi)[:-1]])
    return x[phi > best_before]


def _pf_dtlz7(M, k):
    # the last objective is separable, so x is on the front iff each coordinate is
    allowed = _dtlz7_front_values()
    per_axis = max(2, int(round(k ** (1.0 / (M - 1)))))
    picks = allowed[np.round(np.linspace(0, allowed.size - 1, per_axis)).astype(int)]
    grids = np.meshgrid(*([picks] * (M - 1)), indexing="ij")
    head = np.column_stack([g.ravel() for g in grids])
    last = 2.0 * (M - np.sum(_dtlz7_phi(head) / 2.0, axis=1))
    F = np.column_stack([head, last])
    return F[nondominated_mask(F)]


def _ray_dtlz1(Z):
    return 0.5 * Z / Z.sum(axis=1, keepdims=True)


def _ray_dtlz2(Z):
    return Z / np.linalg.norm(Z, axis=1, keepdims=True)


def _ray_cdtlz3(Z):
    # front: sum_{i<M} sqrt(f_i) + f_M = 1 with f = t z; solve for s = sqrt(t)
    a = np.sqrt(Z[:, :-1]).sum(axis=1)
    b = Z[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(b > 0, (-a + np.sqrt(a * a + 4.0 * b)) / (2.0 * b), 1.0 / a)
    return (s**2)[:, None] * Z


def _ray_maf1(Z):
    M = Z.shape[1]
    return (M - 1) * Z / Z.sum(axis=1, keepdims=True)


def _effective_maf1(Z):
    M = Z.shape[1]
    P = Z / Z.sum(axis=1, keepdims=True)
    return np.all(P <= 1.0 / (M - 1) + 1e-12, axis=1)


# -- WFG1 ----------------------------------------------------------------------


def _clip01(y):
    return np.clip(y, 0.0, 1.0)


def _wfg1_objective(k: int):
    def evaluate(X, M):
        n, D = X.shape
        z_max = 2.0 * np.arange(1, D + 1)
        y = X / z_max
        # t1: linear shift of distance params
        y[:, k:] = _clip01(np.abs(y[:, k:] - 0.35) / np.abs(np.floor(0.35 - y[:, k:]) + 0.35))
        # t2: flat bias
        yk = y[:, k:]
        a, b, c = 0.8, 0.75, 0.85
        y[:, k:] = _clip01(
            a
            + np.minimum(0.0, np.floor(yk - b)) * a * (b - yk) / b
            - np.minimum(0.0, np.floor(c - yk)) * (1.0 - a) * (yk - c) / (1.0 - c)
        )
        # t3: polynomial bias
        y = _clip01(y**0.02)
        # t4: weighted-sum reduction
        w = 2.0 * np.arange(1, D + 1)
        gap = k // (M - 1)
        t = np.empty((n, M))
        for i in range(M - 1):
            sl = slice(i * gap, (i + 1) * gap)
            t[:, i] = y[:, sl] @ w[sl] / w[sl].sum()
        t[:, M - 1] = y[:, k:] @ w[k:] / w[k:].sum()
        t = _clip01(t)
        return _wfg1_front(t, M)

    return evaluate


def _wfg1_front(t: np.ndarray, M: int) -> np.ndarray:
    # A_i = 1, so x_i = max(t_M, 1) * (t_i - 0.5) + 0.5 = t_i
    x = t[:, : M - 1]
    xM = t[:, M - 1]
    S = 2.0 * np.arange(1, M + 1)
    h = np.empty((t.shape[0], M))
    c = 1.0 - np.cos(0.5 * np.pi * x)
    for m in range(1, M + 1):
        if m == 1:
            h[:, 0] = np.prod(c, axis=1)
        elif m < M:
            h[:, m - 1] = np.prod(c[:, : M - m], axis=1) * (1.0 - np.sin(0.5 * np.pi * x[:, M - m]))
        else:
            A = 5.0
            h[:, m - 1] = 1.0 - x[:, 0] - np.cos(2.0 * A * np.pi * x[:, 0] + 0.5 * np.pi) / (2.0 * A * np.pi)
    return xM[:, None] + S * h


def _pf_wfg1(M, k):
    per_axis = max(2, int(round(k ** (1.0 / (M - 1)))))
    u = np.linspace(0.0, 1.0, per_axis)
    grids = np.meshgrid(*([u] * (M - 1)), indexing="ij")
    t = np.column_stack([g.ravel() for g in grids] + [np.zeros(per_axis ** (M - 1))])
    F = _wfg1_front(t, M)
    return F[nondominated_mask(F)]


# -- registry --------------------------------------------------------------------


def _box(D, lo=0.0, hi=1.0):
    return np.full(D, lo), np.full(D, hi)


def dtlz1(M: int, D: int | None = None) -> Problem:
    D = M + 4 if D is None else D
    return Problem("dtlz1", M, D, *_box(D), "full", "linear", _dtlz1, _pf_dtlz1, _ray_dtlz1, _all_full)


def dtlz2(M: int, D: int | None = None) -> Problem:
    D = M + 9 if D is None else D
    return Problem("dtlz2", M, D, *_box(D), "full", "concave", _dtlz2, _pf_dtlz2, _ray_dtlz2, _all_full)


def cdtlz3(M: int, D: int | None = None) -> Problem:
    """DTLZ3 with f_i -> f_i^4 (i < M) and f_M -> f_M^2.

    The front is ``sum_{i<M} sqrt(f_i) + f_M = 1``.
    """
    D = M + 9 if D is None else D
    return Problem("cdtlz3", M, D, *_box(D), "full", "convex", _cdtlz3, _pf_cdtlz3, _ray_cdtlz3, _all_full)


def dtlz7(M: int, D: int | None = None) -> Problem:
    D = M + 19 if D is None else D
    return Problem("dtlz7", M, D, *_box(D), "partial", "disconnected", _dtlz7, _pf_dtlz7)


def maf1(M: int, D: int | None = None) -> Problem:
    """Inverted linear front: f = (1 + g)(1 - y) with y the DTLZ1 shape terms."""
    D = M + 9 if D is None else D
    return Problem("maf1", M, D, *_box(D), "partial", "linear", _maf1, _pf_maf1, _ray_maf1, _effective_maf1)


def wfg1(M: int, D: int | None = None) -> Problem:
    k = 2 * (M - 1)
    D = k + 20 if D is None else D
    if D <= k:
        raise ContractError(f"wfg1 needs D > k = {k}")
    return Problem(
        "wfg1", M, D, np.zeros(D), 2.0 * np.arange(1, D + 1), "full", "mixed",
        _wfg1_objective(k), _pf_wfg1,
    )


PROBLEMS = {
    "dtlz1": dtlz1,
    "dtlz2": dtlz2,
    "cdtlz3": cdtlz3,
    "dtlz7": dtlz7,
    "maf1": maf1,
    "wfg1": wfg1,
}


def get_problem(name: str, M: int, D: int | None = None) -> Problem:
    try:
        factory = PROBLEMS[name.lower()]
    except KeyError:
        raise ContractError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    if M < 2:
        raise ContractError("need at least two objectives")
    return factory(M, D)
