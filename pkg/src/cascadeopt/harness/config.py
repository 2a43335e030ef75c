"""Run configuration and its JSON file form."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from cascadeopt.core import ContractError
from cascadeopt.problems import PROBLEMS, get_problem


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SVMSettings:
    S: float = 0.056
    C: float = 10.0


@dataclass(frozen=True)
class VariationSettings:
    eta_c: float = 20.0
    p_c: float = 1.0
    eta_m: float = 20.0
    p_m: float | None = None  # None -> 1/D


@dataclass(frozen=True)
class RunConfig:
    problem: str
    M: int
    N: int
    D: int | None = None
    max_fes: int | None = None  # None -> max(1e5, D * 1e4)
    seed: int = 0
    alpha: float = 5.0
    theta: int | None = None  # None -> schedule from max_fes
    svm: SVMSettings = field(default_factory=SVMSettings)
    variation: VariationSettings = field(default_factory=VariationSettings)
    n_keep_factor: float = 2.0
    scalarizer: str = "pdm"
    adaptation: bool = True
    normalization: bool = False
    pf_size: int | None = None

    def __post_init__(self):
        if self.problem.lower() not in PROBLEMS:
            raise ConfigError(f"unknown problem {self.problem!r}; known: {sorted(PROBLEMS)}")
        if self.M < 2:
            raise ConfigError("M must be at least 2")
        if self.N < self.M:
            raise ConfigError(f"N={self.N} must be >= M={self.M}")
        if self.max_fes is not None and self.max_fes < self.N:
            raise ConfigError(f"max_fes={self.max_fes} must be >= N={self.N}")
        if self.scalarizer not in ("pdm", "pbi"):
            raise ConfigError(f"scalarizer must be 'pdm' or 'pbi', got {self.scalarizer!r}")
        if self.normalization and self.adaptation:
            raise ConfigError("normalization is only allowed with adaptation off")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")
        if self.theta is not None and self.theta < 1:
            raise ConfigError("theta must be at least 1")
        if self.n_keep_factor <= 1:
            raise ConfigError("n_keep_factor must exceed 1 (keep more than N points)")
        if self.svm.S <= 0 or self.svm.C <= 0:
            raise ConfigError("SVM kernel scale and C must be positive")

    @property
    def dimension(self) -> int:
        try:
            return get_problem(self.problem, self.M, self.D).D
        except ContractError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def budget(self) -> int:
        if self.max_fes is not None:
            return self.max_fes
        return int(max(1e5, self.dimension * 1e4))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        if not isinstance(d, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        try:
            if isinstance(d.get("svm"), dict):
                d["svm"] = SVMSettings(**d["svm"])
            if isinstance(d.get("variation"), dict):
                d["variation"] = VariationSettings(**d["variation"])
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def digest(self) -> str:
        """Content hash of everything except the seed."""
        payload = {k: v for k, v in self.to_dict().items() if k != "seed"}
        return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]

    def with_seed(self, seed: int) -> RunConfig:
        return replace(self, seed=int(seed))


def derive_seed(master: int, digest: str, repeat: int) -> int:
    """Per-run seed from (master seed, config digest, repeat index)."""
    ss = np.random.SeedSequence([int(master), int(digest, 16), int(repeat)])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def dumps(configs) -> str:
    if isinstance(configs, RunConfig):
        return json.dumps(configs.to_dict(), indent=2)
    return json.dumps([c.to_dict() for c in configs], indent=2)


def loads(text: str) -> list[RunConfig]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if isinstance(data, list):
        return [RunConfig.from_dict(d) for d in data]
    return [RunConfig.from_dict(data)]


def load_configs(path) -> list[RunConfig]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)
