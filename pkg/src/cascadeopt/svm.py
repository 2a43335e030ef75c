"""Gaussian-kernel soft-margin SVM with incremental retraining.

The dual is solved by SMO with second-order working-set selection
(maximal-violating pair refined by curvature, as in LIBSVM). Incremental
learning retrains on the new samples together with a reserved set: every
previous sample that ended up a support vector or inside the widened margin
``|f(x)| <= 1 + margin_band``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cascadeopt.core import ContractError

DEFAULT_KERNEL_SCALE = 0.056
DEFAULT_C = 10.0
DEFAULT_MARGIN_BAND = 0.5
DEGENERATE_SCORE = 0.99
_TAU = 1e-12


def gaussian_kernel(A: np.ndarray, B: np.ndarray, scale: float) -> np.ndarray:
    """``exp(-||a - b||^2 / (2 scale^2))`` for all row pairs."""
    diff = A[:, None, :] - B[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    return np.exp(-d2 / (2.0 * scale * scale))


class SMOConvergenceError(RuntimeError):
    pass


def smo_solve(
    K: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3, max_iter: int = 100_000
) -> tuple[np.ndarray, float]:
    """Solve ``min 1/2 a'Qa - 1'a`` s.t. ``0 <= a <= C``, ``y'a = 0``.

    Returns ``(alpha, bias)`` for ``f(x) = sum a_i y_i K(x_i, x) + bias``.
    Stops when the maximal KKT violation drops below ``tol``.
    """
    n = y.size
    Q = (y[:, None] * y[None, :]) * K
    diagK = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)
    pos = y > 0

    for _ in range(max_iter):
        at_upper = alpha >= C
        at_lower = alpha <= 0
        up = np.where(pos, ~at_upper, ~at_lower)
        low = np.where(pos, ~at_lower, ~at_upper)
        myG = -y * G

        cand = np.where(up, myG, -np.inf)
        i = int(np.argmax(cand))
        gmax = cand[i]
        low_vals = np.where(low, myG, np.inf)
        if gmax - low_vals.min() < tol:
            break

        b = gmax - myG
        viable = low & (b > 0)
        a = diagK[i] + diagK - 2.0 * K[i]
        a = np.where(a > 0, a, _TAU)
        obj = np.where(viable, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))

        ai, aj = alpha[i], alpha[j]
        if y[i] != y[j]:
            quad = max(diagK[i] + diagK[j] - 2.0 * K[i, j], _TAU)
            delta = (-G[i] - G[j]) / quad
            diff = ai - aj
            ni, nj = ai + delta, aj + delta
            if diff > 0:
                if nj < 0:
                    nj, ni = 0.0, diff
            elif ni < 0:
                ni, nj = 0.0, -diff
            if diff > 0:
                if ni > C:
                    ni, nj = C, C - diff
            elif nj > C:
                nj, ni = C, C + diff
        else:
            quad = max(diagK[i] + diagK[j] - 2.0 * K[i, j], _TAU)
            delta = (G[i] - G[j]) / quad
            total = ai + aj
            ni, nj = ai - delta, aj + delta
            if total > C:
                if ni > C:
                    ni, nj = C, total - C
            elif nj < 0:
                nj, ni = 0.0, total
            if total > C:
                if nj > C:
                    nj, ni = C, total - C
            elif ni < 0:
                ni, nj = 0.0, total

        G += Q[:, i] * (ni - ai) + Q[:, j] * (nj - aj)
        alpha[i], alpha[j] = ni, nj
    else:
        raise SMOConvergenceError(f"SMO did not reach tol={tol} in {max_iter} iterations")

    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        rho = yG[free].mean()
    else:
        at_upper = alpha >= C
        ub_mask = (at_upper & ~pos) | (~at_upper & pos)
        lb_mask = ~ub_mask
        ub = yG[ub_mask].min() if ub_mask.any() else np.inf
        lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
        rho = 0.5 * (ub + lb) if np.isfinite(ub) and np.isfinite(lb) else (ub if np.isfinite(ub) else lb)
    return alpha, -float(rho)


def _empty(dim: int) -> np.ndarray:
    return np.empty((0, dim))


@dataclass
class EffectiveAreaClassifier:
    """Scores points in the projected simplex plane; high score = likely effective.

    Labels are +1 (active reference point) and -1 (inactive).
    """

    kernel_scale: float = DEFAULT_KERNEL_SCALE
    C: float = DEFAULT_C
    margin_band: float = DEFAULT_MARGIN_BAND
    tol: float = 1e-3
    max_iter: int = 100_000
    support_points: np.ndarray | None = None
    support_labels: np.ndarray | None = None
    alphas: np.ndarray | None = None
    bias: float = 0.0
    reserved_points: np.ndarray | None = None
    reserved_labels: np.ndarray | None = None
    degenerate_label: int | None = None
    n_trainings: int = 0
    last_training_size: int = field(default=0)

    @property
    def trained(self) -> bool:
        return self.n_trainings > 0

    @property
    def degenerate(self) -> bool:
        return self.degenerate_label is not None

    def fit(self, X, y) -> EffectiveAreaClassifier:
        """Batch solve on ``(X, y)`` alone, discarding any reserved samples."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if X.shape[0] == 0:
            raise ContractError("cannot train on an empty sample set")
        if X.shape[0] != y.size or not np.all(np.isin(y, (-1.0, 1.0))):
            raise ContractError("labels must be +/-1, one per sample")
        self.n_trainings += 1
        self.last_training_size = y.size
        if np.all(y == y[0]):
            self.degenerate_label = int(y[0])
            self.support_points = _empty(X.shape[1])
            self.support_labels = np.empty(0)
            self.alphas = np.empty(0)
            self.bias = 0.0
            self.reserved_points, self.reserved_labels = X.copy(), y.copy()
            return self

        self.degenerate_label = None
        K = gaussian_kernel(X, X, self.kernel_scale)
        alpha, bias = smo_solve(K, y, self.C, self.tol, self.max_iter)
        sv = alpha > 0
        self.support_points = X[sv].copy()
        self.support_labels = y[sv].copy()
        self.alphas = alpha[sv].copy()
        self.bias = bias
        f = (alpha * y) @ K + bias
        keep = sv | (np.abs(f) <= 1.0 + self.margin_band)
        self.reserved_points, self.reserved_labels = X[keep].copy(), y[keep].copy()
        return self

    def partial_fit(self, X, y) -> EffectiveAreaClassifier:
        """Retrain on new samples plus the reserved set from the previous solve."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=float).ravel()
        if self.reserved_points is not None and self.reserved_points.shape[0]:
            X = np.vstack([X, self.reserved_points])
            y = np.concatenate([y, self.reserved_labels])
        return self.fit(X, y)

    def decision_function(self, X) -> np.ndarray:
        if not self.trained:
            raise ContractError("classifier has not been trained")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.degenerate:
            return np.full(X.shape[0], np.nan)
        K = gaussian_kernel(X, self.support_points, self.kernel_scale)
        return K @ (self.alphas * self.support_labels) + self.bias

    def score(self, X) -> np.ndarray:
        """Logistic link of the decision value, in (0, 1)."""
        if not self.trained:
            raise ContractError("classifier has not been trained")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.degenerate:
            p = DEGENERATE_SCORE if self.degenerate_label > 0 else 1.0 - DEGENERATE_SCORE
            return np.full(X.shape[0], p)
        return 1.0 / (1.0 + np.exp(-self.decision_function(X)))

    def predict(self, X) -> np.ndarray:
        return np.where(self.score(X) > 0.5, 1, -1)

    def score_lipschitz(self) -> float:
        """Upper bound on ``|score(x) - score(y)| / ||x - y||``."""
        if not self.trained or self.degenerate:
            return 0.0
        # sigmoid' <= 1/4; |grad_x K| <= exp(-1/2) / scale
        return 0.25 * float(self.alphas.sum()) * np.exp(-0.5) / self.kernel_scale

    def to_dict(self) -> dict:
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "kernel_scale": self.kernel_scale,
            "C": self.C,
            "margin_band": self.margin_band,
            "tol": self.tol,
            "support_points": arr(self.support_points),
            "support_labels": arr(self.support_labels),
            "alphas": arr(self.alphas),
            "bias": self.bias,
            "reserved_points": arr(self.reserved_points),
            "reserved_labels": arr(self.reserved_labels),
            "degenerate_label": self.degenerate_label,
            "n_trainings": self.n_trainings,
        }

    @classmethod
    def from_dict(cls, d: dict) -> EffectiveAreaClassifier:
        def arr(key, ndim=1):
            v = d.get(key)
            if v is None:
                return None
            a = np.asarray(v, dtype=float)
            return a.reshape(0, 0) if a.size == 0 and ndim == 2 else a

        return cls(
            kernel_scale=d["kernel_scale"],
            C=d["C"],
            margin_band=d["margin_band"],
            tol=d.get("tol", 1e-3),
            support_points=arr("support_points", 2),
            support_labels=arr("support_labels"),
            alphas=arr("alphas"),
            bias=d["bias"],
            reserved_points=arr("reserved_points", 2),
            reserved_labels=arr("reserved_labels"),
            degenerate_label=d.get("degenerate_label"),
            n_trainings=d.get("n_trainings", 1),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> EffectiveAreaClassifier:
        return cls.from_dict(json.loads(Path(path).read_text()))
