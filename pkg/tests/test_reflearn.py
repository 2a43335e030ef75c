import numpy as np
import pytest

from cascadeopt.core import ContractError
from cascadeopt.problems import get_problem
from cascadeopt.refgen import SimplexProjection, generate_simplex_lattice, project_to_simplex_plane
from cascadeopt.reflearn import (
    StatusSampler,
    adapt,
    reduce_by_score,
    sampler_update,
    theta_schedule,
    train_incremental,
)


@pytest.mark.parametrize("fes, theta", [(1e5, 5), (1e6, 20), (3e5, 15), (1e4, 5), (1e8, 20)])
def test_theta_schedule(fes, theta):
    assert theta_schedule(fes) == theta


def run_sampler(activities, theta=5):
    s = StatusSampler(theta)
    for a in activities:
        s = sampler_update(s, a)
    return s


def test_sampler_becomes_stable():
    a = np.array([True, False, True])
    # first observation seeds, then theta unchanged repeats
    assert not run_sampler([a] * 5).stable
    assert run_sampler([a] * 6).stable


def test_sampler_flip_resets():
    a = np.array([True, False, True])
    b = np.array([True, True, True])
    s = run_sampler([a, a, a, a, b])
    assert s.stable_count == 0 and not s.stable


def test_sampler_length_change_resets():
    s = run_sampler([np.ones(3, bool)] * 8)
    s = sampler_update(s, np.ones(4, bool))
    assert s.stable_count == 0


def test_reduce_keeps_top_scores():
    scores = np.array([0.1, 0.9, 0.5, 0.7, 0.5])
    keep, delta = reduce_by_score(scores, 3)
    assert delta == 0.5 and keep.tolist() == [1, 2, 3, 4]
    keep, delta = reduce_by_score(scores, 10)
    assert keep.tolist() == list(range(5)) and delta == 0.1


def test_train_needs_samples():
    with pytest.raises(ContractError):
        train_incremental(None, np.empty((0, 2)), np.empty((0, 2)))


def stable_sampler(n, theta=5):
    return run_sampler([np.zeros(n, bool)] * (theta + 1), theta)


def maf1_activity(refs):
    return get_problem("maf1", refs.n_obj).effective_mask(refs.points)


def test_adapt_guard_requires_stability():
    refs = generate_simplex_lattice(3, 12)
    act = maf1_activity(refs)
    res = adapt(refs, StatusSampler(5), None, 91, act)
    assert res.event is None and res.refs is refs


def test_adapt_guard_requires_deficiency():
    refs = generate_simplex_lattice(3, 12)
    res = adapt(refs, stable_sampler(len(refs)), None, 91, np.ones(len(refs), bool))
    assert res.event is None


def test_adapt_activity_shape():
    refs = generate_simplex_lattice(3, 4)
    with pytest.raises(ContractError):
        adapt(refs, stable_sampler(len(refs)), None, 10, np.ones(3, bool))


def test_adapt_on_maf1_region():
    N = 91
    refs = generate_simplex_lattice(3, 12)
    act = maf1_activity(refs)
    res = adapt(refs, stable_sampler(len(refs)), None, N, act)
    ev = res.event
    assert ev is not None and not ev.skipped
    assert res.refs.density == (13,)
    assert ev.generated_count == 105
    assert ev.new_count >= min(2 * N, ev.generated_count)
    assert res.sampler.stable_count == 0 and res.sampler.last_activity is None


def test_adapt_kept_set_is_downward_closed():
    # 28 active < N = 30 and 2N < 105 generated, so the reduction discards points
    N = 30
    refs = generate_simplex_lattice(3, 12)
    res = adapt(refs, stable_sampler(len(refs)), None, N, maf1_activity(refs))
    ev = res.event
    assert ev.new_count >= 2 * N and ev.new_count < ev.generated_count
    denser = generate_simplex_lattice(3, 13).points
    scores = res.classifier.score(project_to_simplex_plane(denser, SimplexProjection.for_dim(3)))
    kept = {tuple(np.round(p, 12)) for p in res.refs.points}
    in_kept = np.array([tuple(np.round(p, 12)) in kept for p in denser])
    assert in_kept.sum() == ev.new_count
    assert scores[~in_kept].max() < scores[in_kept].min()
    # every point of the true region outranks every point outside it
    inside = get_problem("maf1", 3).effective_mask(denser)
    assert scores[inside].min() > scores[~inside].max()
    assert in_kept[inside].all()


def test_adapt_over_cap_is_skipped():
    refs = generate_simplex_lattice(3, 5)
    res = adapt(refs, stable_sampler(len(refs)), None, 91, np.zeros(len(refs), bool) | (np.arange(len(refs)) == 0), cap=20)
    assert res.event.skipped and res.refs is refs


def test_adapt_is_deterministic():
    refs = generate_simplex_lattice(3, 12)
    act = maf1_activity(refs)
    a = adapt(refs, stable_sampler(len(refs)), None, 30, act)
    b = adapt(refs, stable_sampler(len(refs)), None, 30, act)
    assert np.array_equal(a.refs.points, b.refs.points)
    assert np.array_equal(a.classifier.alphas, b.classifier.alphas)
