import numpy as np
import pytest

import oracles
from cascadeopt.core import ContractError
from cascadeopt.problems import PROBLEMS, UnsupportedMetricError, get_problem
from cascadeopt.refgen import generate_simplex_lattice


def optimal_decisions(problem, n, rng, dist=0.5):
    X = rng.random((n, problem.D))
    X[:, problem.M - 1:] = dist
    return X


@pytest.mark.parametrize("M", [2, 3, 5, 8])
def test_dtlz2_on_sphere(M, rng):
    p = get_problem("dtlz2", M)
    F = p.evaluate(optimal_decisions(p, 200, rng))
    assert np.allclose((F**2).sum(axis=1), 1.0, atol=1e-9)


@pytest.mark.parametrize("M", [2, 3, 5, 8])
def test_dtlz1_on_plane(M, rng):
    p = get_problem("dtlz1", M)
    F = p.evaluate(optimal_decisions(p, 200, rng))
    assert np.allclose(F.sum(axis=1), 0.5, atol=1e-9)


@pytest.mark.parametrize("M", [3, 5, 10])
def test_maf1_optimum_layer(M, rng):
    p = get_problem("maf1", M)
    X = optimal_decisions(p, 200, rng)
    F = p.evaluate(X)
    assert np.allclose(F.sum(axis=1), M - 1, atol=1e-9)


@pytest.mark.parametrize("name,fn", [("maf1", oracles.maf1), ("dtlz2", oracles.dtlz2)])
def test_matches_scalar_transcription(name, fn, rng):
    p = get_problem(name, 4)
    X = rng.random((30, p.D))
    F = p.evaluate(X)
    for x, f in zip(X, F):
        assert np.allclose(f, fn(list(x), 4), atol=1e-12)


def test_cdtlz3_front_identity(rng):
    p = get_problem("cdtlz3", 3)
    F = p.evaluate(optimal_decisions(p, 100, rng))
    assert np.allclose(np.sqrt(F[:, :-1]).sum(axis=1) + F[:, -1], 1.0, atol=1e-9)


def test_default_dimensions():
    assert get_problem("dtlz1", 3).D == 7
    assert get_problem("dtlz2", 3).D == 12
    assert get_problem("dtlz7", 3).D == 22
    assert get_problem("maf1", 5).D == 14
    assert get_problem("wfg1", 3).D == 24


def test_out_of_bounds():
    p = get_problem("dtlz2", 3)
    with pytest.raises(ContractError):
        p.evaluate(np.full(p.D, 1.5))


def test_unknown_problem():
    with pytest.raises(ValueError):
        get_problem("zdt1", 3)


@pytest.mark.parametrize("name", sorted(PROBLEMS))
@pytest.mark.parametrize("M", [2, 3, 4])
def test_pf_sample_mutually_nondominated(name, M):
    pts = get_problem(name, M).pf_sample(300)
    assert pts.shape[1] == M and len(pts) >= M
    assert len(oracles.first_front(pts.tolist())) == len(pts)


def test_pf_sample_memberships():
    assert np.allclose((get_problem("dtlz2", 3).pf_sample() ** 2).sum(axis=1), 1.0, atol=1e-9)
    assert np.allclose(get_problem("dtlz1", 3).pf_sample().sum(axis=1), 0.5, atol=1e-12)
    assert np.allclose(get_problem("maf1", 3).pf_sample().sum(axis=1), 2.0, atol=1e-12)


def test_pf_sample_too_small():
    with pytest.raises(ContractError):
        get_problem("dtlz2", 5).pf_sample(3)


def test_pf_sample_deterministic():
    p = get_problem("dtlz7", 3)
    assert np.array_equal(p.pf_sample(500), p.pf_sample(500))


def test_dtlz7_front_attainable(rng):
    p = get_problem("dtlz7", 3)
    pts = p.pf_sample(400)
    X = np.zeros((len(pts), p.D))
    X[:, :2] = pts[:, :2]
    assert np.allclose(p.evaluate(X), pts, atol=1e-12)


def test_partial_front_covers_less_than_lattice():
    Z = generate_simplex_lattice(3, 12).points
    maf = get_problem("maf1", 3)
    assert maf.effective_mask(Z).sum() < len(Z)
    assert get_problem("dtlz2", 3).effective_mask(Z).all()
    # projected PF sample points lie inside the effective region
    pf = maf.pf_sample()
    assert maf.effective_mask(pf / pf.sum(axis=1, keepdims=True)).all()


def test_ray_intersection_lies_on_front():
    Z = generate_simplex_lattice(3, 12).points
    for name, on_front in [
        ("dtlz1", lambda F: F.sum(axis=1) - 0.5),
        ("dtlz2", lambda F: (F**2).sum(axis=1) - 1.0),
        ("cdtlz3", lambda F: np.sqrt(F[:, :-1]).sum(axis=1) + F[:, -1] - 1.0),
        ("maf1", lambda F: F.sum(axis=1) - 2.0),
    ]:
        p = get_problem(name, 3)
        Zi = Z[p.effective_mask(Z)]
        F = p.ray_intersection(Zi)
        assert np.allclose(on_front(F), 0.0, atol=1e-9)
        # collinear with the ray
        assert np.allclose(F / F.sum(axis=1, keepdims=True), Zi / Zi.sum(axis=1, keepdims=True))


def test_no_ray_for_dtlz7():
    with pytest.raises(UnsupportedMetricError):
        get_problem("dtlz7", 3).ray_intersection(np.eye(3))
