"""Real-coded variation: uniform initialization, random mating, SBX and
polynomial mutation, with clipping to the box.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cascadeopt.core import ContractError


@dataclass(frozen=True)
class VariationConfig:
    lower: np.ndarray
    upper: np.ndarray
    eta_c: float = 20.0
    p_c: float = 1.0
    eta_m: float = 20.0
    p_m: float | None = None  # None -> 1/D
    p_var_cross: float = 0.5

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or np.any(lo >= hi):
            raise ContractError("bounds need low < high for every variable")
        if self.eta_c <= 0 or self.eta_m <= 0:
            raise ContractError("distribution indices must be positive")
        for p in (self.p_c, self.p_var_cross, self.mutation_rate(lo.size)):
            if not 0.0 <= p <= 1.0:
                raise ContractError(f"probability {p} outside [0, 1]")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    def mutation_rate(self, D: int | None = None) -> float:
        D = self.lower.size if D is None else D
        return 1.0 / D if self.p_m is None else self.p_m


def initialize(N: int, lower, upper, rng: np.random.Generator) -> np.ndarray:
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    return lower + rng.random((N, lower.size)) * (upper - lower)


def sbx_spread(u: np.ndarray, eta: float) -> np.ndarray:
    """Spread factor beta from uniform draws ``u`` in [0, 1)."""
    return np.where(
        u <= 0.5,
        (2.0 * u) ** (1.0 / (eta + 1.0)),
        (2.0 - 2.0 * u) ** (-1.0 / (eta + 1.0)),
    )


def sbx_from_draws(p1, p2, beta, lower, upper):
    """Children ``mean +/- beta * half_gap`` for explicit per-variable spreads."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    mid = 0.5 * (p1 + p2)
    half = 0.5 * (p1 - p2)
    c1 = np.clip(mid + beta * half, lower, upper)
    c2 = np.clip(mid - beta * half, lower, upper)
    return c1, c2


def _sbx_beta(shape, cfg: VariationConfig, rng: np.random.Generator) -> np.ndarray:
    beta = sbx_spread(rng.random(shape), cfg.eta_c)
    beta = beta * np.where(rng.random(shape) < 0.5, 1.0, -1.0)
    beta[rng.random(shape) < 1.0 - cfg.p_var_cross] = 1.0
    pair_skip = rng.random(shape[:-1]) >= cfg.p_c
    beta[pair_skip] = 1.0
    return beta


def sbx(parent_a, parent_b, cfg: VariationConfig, rng: np.random.Generator):
    """Simulated binary crossover on one pair or on row-aligned batches of pairs.

    Each variable crosses with probability ``cfg.p_var_cross``; the spread
    sign is randomized so both children are exchangeable.
    """
    a = np.asarray(parent_a, dtype=float)
    b = np.asarray(parent_b, dtype=float)
    if a.shape != b.shape:
        raise ContractError("parents must have equal length")
    beta = _sbx_beta(a.shape, cfg, rng)
    return sbx_from_draws(a, b, beta, cfg.lower, cfg.upper)


def mutation_from_draws(x, mask, mu, lower, upper, eta):
    """Bounded polynomial mutation at positions ``mask`` using draws ``mu``."""
    x = np.clip(np.asarray(x, dtype=float), lower, upper)
    lower = np.broadcast_to(lower, x.shape)
    upper = np.broadcast_to(upper, x.shape)
    span = upper - lower
    out = x.copy()
    e = 1.0 / (eta + 1.0)

    lo = mask & (mu <= 0.5)
    d1 = (x[lo] - lower[lo]) / span[lo]
    out[lo] = x[lo] + span[lo] * (
        (2.0 * mu[lo] + (1.0 - 2.0 * mu[lo]) * (1.0 - d1) ** (eta + 1.0)) ** e - 1.0
    )
    hi = mask & (mu > 0.5)
    d2 = (upper[hi] - x[hi]) / span[hi]
    out[hi] = x[hi] + span[hi] * (
        1.0 - (2.0 * (1.0 - mu[hi]) + 2.0 * (mu[hi] - 0.5) * (1.0 - d2) ** (eta + 1.0)) ** e
    )
    return np.clip(out, lower, upper)


def polynomial_mutation(x, cfg: VariationConfig, rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    mask = rng.random(x.shape) < cfg.mutation_rate()
    mu = rng.random(x.shape)
    return mutation_from_draws(x, mask, mu, cfg.lower, cfg.upper, cfg.eta_m)


def random_pairs(n_parents: int, n_pairs: int, rng: np.random.Generator) -> np.ndarray:
    """Pairs drawn without replacement within each shuffled round of the population."""
    if n_parents < 2:
        raise ContractError("mating needs at least two parents")
    pairs = []
    have = 0
    while have < n_pairs:
        perm = rng.permutation(n_parents)
        k = n_parents // 2
        pairs.append(perm[: 2 * k].reshape(k, 2))
        have += k
    return np.vstack(pairs)[:n_pairs]


def make_offspring(X: np.ndarray, N: int, cfg: VariationConfig, rng: np.random.Generator):
    """N children from random parent pairs via SBX then polynomial mutation."""
    X = np.atleast_2d(X)
    pairs = random_pairs(X.shape[0], (N + 1) // 2, rng)
    c1, c2 = sbx(X[pairs[:, 0]], X[pairs[:, 1]], cfg, rng)
    children = np.empty((2 * len(pairs), X.shape[1]))
    children[0::2] = c1
    children[1::2] = c2
    return polynomial_mutation(children[:N], cfg, rng)
