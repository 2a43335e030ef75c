"""Main evolutionary loop, batches and ablations."""

from __future__ import annotations

import logging
import time
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from cascadeopt.cascade import select
from cascadeopt.core import Population
from cascadeopt.harness.config import RunConfig, derive_seed
from cascadeopt.metrics import (
    TelemetryRecord,
    TelemetrySeries,
    activity_upper_bound,
    igd,
    igd_lower_bound,
)
from cascadeopt.problems import Problem, UnsupportedMetricError, get_problem
from cascadeopt.refgen import ReferenceSet, initial_reference_set
from cascadeopt.reflearn import LearningEvent, StatusSampler, adapt, sampler_update, theta_schedule
from cascadeopt.svm import EffectiveAreaClassifier
from cascadeopt.variation import VariationConfig, initialize, make_offspring

log = logging.getLogger(__name__)


class CountingProblem:
    """Wraps a problem and counts every objective evaluation."""

    def __init__(self, problem: Problem):
        self.problem = problem
        self.fe_count = 0

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        F = self.problem.evaluate(X)
        self.fe_count += X.shape[0]
        return F


@dataclass
class RunRecord:
    config: RunConfig
    telemetry: TelemetrySeries
    decisions: np.ndarray
    objectives: np.ndarray
    events: list[LearningEvent] = field(default_factory=list)
    wall_time: float = 0.0
    refs: ReferenceSet | None = None
    classifier: EffectiveAreaClassifier | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def final_igd(self) -> float:
        return float(self.telemetry.records[-1].igd) if len(self.telemetry) else float("nan")

    @property
    def final_active(self) -> int:
        return int(self.telemetry.records[-1].active_refs) if len(self.telemetry) else 0

    @property
    def learning_events(self) -> list[LearningEvent]:
        return [e for e in self.events if not e.skipped]


def _event_bounds(event, refs, problem, pf_ref):
    try:
        ub = activity_upper_bound(refs, problem)
        lb = igd_lower_bound(refs, problem, pf_ref)
    except UnsupportedMetricError:
        return event
    return replace(event, upper_bound=ub, igd_lower_bound=lb)


def run(config: RunConfig, pf_ref: np.ndarray | None = None) -> RunRecord:
    """One optimization run; deterministic for a given config (including seed)."""
    t0 = time.perf_counter()
    problem = get_problem(config.problem, config.M, config.D)
    counted = CountingProblem(problem)
    N, M = config.N, config.M
    budget = config.budget
    pf_ref = problem.pf_sample(config.pf_size) if pf_ref is None else pf_ref
    v = config.variation
    var_cfg = VariationConfig(problem.lower, problem.upper, v.eta_c, v.p_c, v.eta_m, v.p_m)
    rng = np.random.default_rng(config.seed)

    X = initialize(N, problem.lower, problem.upper, rng)
    pop = Population(X, counted.evaluate(X), N)
    refs = initial_reference_set(M, N)
    sampler = StatusSampler(config.theta or theta_schedule(budget))
    clf = None
    events: list[LearningEvent] = []
    learning_enabled = config.adaptation
    telemetry = TelemetrySeries()

    gen = 0
    while counted.fe_count + N <= budget:
        gen += 1
        Xo = make_offspring(pop.decisions, N, var_cfg, rng)
        offspring = Population(Xo, counted.evaluate(Xo), N)
        outcome = select(
            Population.concat(pop, offspring), refs, N,
            config.alpha, config.scalarizer, config.normalization,
        )
        pop = outcome.survivors
        n_refs_now = len(refs)
        sampler = sampler_update(sampler, outcome.activity)
        fired = False
        if learning_enabled:
            res = adapt(
                refs.with_activity(outcome.activity), sampler, clf, N,
                generation=gen, n_keep_factor=config.n_keep_factor,
                kernel_scale=config.svm.S, C=config.svm.C,
            )
            sampler, clf = res.sampler, res.classifier
            if res.event is not None:
                if res.event.skipped:
                    learning_enabled = False
                else:
                    refs = res.refs
                    fired = True
                events.append(_event_bounds(res.event, refs, problem, pf_ref))
        telemetry.append(
            TelemetryRecord(
                gen, counted.fe_count, igd(pf_ref, pop.objectives),
                outcome.active_count, n_refs_now, fired,
            )
        )

    return RunRecord(
        config, telemetry, pop.decisions, pop.objectives, events,
        time.perf_counter() - t0, refs, clf,
    )


def _safe_run(config: RunConfig) -> RunRecord:
    try:
        return run(config)
    except Exception:  # noqa: BLE001 - a failed run must not stop the batch
        return RunRecord(
            config, TelemetrySeries(), np.empty((0, 0)), np.empty((0, 0)),
            error=traceback.format_exc(),
        )


def expand(configs, repeats: int, seed_from: RunConfig | None = None) -> list[RunConfig]:
    """Per-run configs with derived seeds. ``seed_from`` pins seeds for matched pairs."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    out = []
    for c in configs:
        key = seed_from or c
        for r in range(repeats):
            out.append(c.with_seed(derive_seed(key.seed, key.digest(), r)))
    return out


def execute(run_configs: list[RunConfig], parallelism: int = 1) -> list[RunRecord]:
    if parallelism <= 1 or len(run_configs) <= 1:
        return [_safe_run(c) for c in run_configs]
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(_safe_run, run_configs))


@dataclass(frozen=True)
class SummaryRow:
    digest: str
    problem: str
    M: int
    N: int
    scalarizer: str
    adaptation: bool
    runs: int
    failed: int
    mean_igd: float
    median_igd: float
    std_igd: float
    mean_wall_time: float

    HEADER = (
        "digest", "problem", "M", "N", "scalarizer", "adaptation", "runs", "failed",
        "mean_igd", "median_igd", "std_igd", "mean_wall_time",
    )

    def as_row(self) -> list:
        return [getattr(self, h) for h in self.HEADER]


def summarize(configs, records: list[RunRecord]) -> list[SummaryRow]:
    rows = []
    for c in configs:
        mine = [r for r in records if r.config.digest() == c.digest()]
        ok = [r for r in mine if r.ok]
        finals = np.array([r.final_igd for r in ok]) if ok else np.array([np.nan])
        walls = np.array([r.wall_time for r in ok]) if ok else np.array([np.nan])
        rows.append(
            SummaryRow(
                c.digest(), c.problem, c.M, c.N, c.scalarizer, c.adaptation,
                len(mine), len(mine) - len(ok),
                float(np.mean(finals)), float(np.median(finals)), float(np.std(finals)),
                float(np.mean(walls)),
            )
        )
    return rows


def run_batch(configs, repeats: int = 1, parallelism: int = 1):
    """Run every config ``repeats`` times; returns ``(records, summary_rows)``."""
    configs = list(configs)
    records = execute(expand(configs, repeats), parallelism)
    for r in records:
        if not r.ok:
            log.error("run failed (%s seed=%d):\n%s", r.config.problem, r.config.seed, r.error)
    return records, summarize(configs, records)


ABLATIONS = {
    "scalarizer": ("scalarizer", ["pdm", "pbi"]),
    "adaptation": ("adaptation", [True, False]),
}


@dataclass
class AblationResult:
    kind: str
    arms: list[RunConfig]
    records: list[RunRecord]
    summary: list[SummaryRow]

    def arm_records(self, arm: RunConfig) -> list[RunRecord]:
        return [r for r in self.records if r.config.digest() == arm.digest()]

    def activity_curves(self) -> dict[str, np.ndarray]:
        """Mean active-reference count per generation for each arm."""
        curves = {}
        for arm in self.arms:
            recs = [r for r in self.arm_records(arm) if r.ok]
            if not recs:
                continue
            n = min(len(r.telemetry) for r in recs)
            curves[f"{self.kind}={getattr(arm, ABLATIONS[self.kind][0])}"] = np.mean(
                [r.telemetry.column("active_refs")[:n] for r in recs], axis=0
            )
        return curves


def ablation_suite(kind: str, base: RunConfig, repeats: int = 1, parallelism: int = 1) -> AblationResult:
    """Matched runs that differ only in one switch and share per-repeat seeds."""
    if kind not in ABLATIONS:
        raise ValueError(f"unknown ablation {kind!r}; choose from {sorted(ABLATIONS)}")
    attr, values = ABLATIONS[kind]
    arms = []
    for v in values:
        changes = {attr: v}
        # normalization is only legal without adaptation
        if attr == "adaptation" and v:
            changes["normalization"] = False
        arms.append(replace(base, **changes))
    run_cfgs = []
    for arm in arms:
        run_cfgs += expand([arm], repeats, seed_from=base)
    records = execute(run_cfgs, parallelism)
    return AblationResult(kind, arms, records, summarize(arms, records))
