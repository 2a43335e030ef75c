import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cascadeopt.core import ContractError
from cascadeopt.metrics import (
    TelemetryRecord,
    TelemetrySeries,
    activity_upper_bound,
    igd,
    igd_lower_bound,
)
from cascadeopt.problems import UnsupportedMetricError, get_problem
from cascadeopt.refgen import generate_simplex_lattice


def test_igd_examples():
    R = np.random.default_rng(0).random((20, 3))
    assert igd(R, R) == 0.0
    assert igd([[0.0, 0.0]], [[3.0, 4.0]]) == pytest.approx(5.0)


def test_igd_errors():
    with pytest.raises(ContractError):
        igd(np.empty((0, 2)), [[1.0, 1.0]])
    with pytest.raises(ContractError):
        igd([[1.0, 1.0]], [[1.0, 1.0, 1.0]])


def test_igd_matches_double_loop():
    r = np.random.default_rng(1)
    for _ in range(30):
        m = int(r.integers(2, 6))
        R = r.random((int(r.integers(1, 51)), m))
        P = r.random((int(r.integers(1, 51)), m))
        assert abs(igd(R, P) - oracles.min_distance_igd(R.tolist(), P.tolist())) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_igd_permutation_and_monotone(seed):
    r = np.random.default_rng(seed)
    R, P = r.random((30, 3)), r.random((10, 3))
    base = igd(R, P)
    assert igd(R[r.permutation(30)], P[r.permutation(10)]) == pytest.approx(base, abs=1e-15)
    assert igd(R, np.vstack([P, r.random((1, 3))])) <= base


def test_full_front_bound_is_lattice_count():
    refs = generate_simplex_lattice(3, 12)
    assert activity_upper_bound(refs, get_problem("dtlz2", 3)) == 91


def test_maf1_bound_by_enumeration():
    refs = generate_simplex_lattice(3, 12)
    # parts of 12 into 3 non-negative integers, none above 6
    expected = sum(1 for a in range(13) for b in range(13 - a) if max(a, b, 12 - a - b) <= 6)
    assert activity_upper_bound(refs, get_problem("maf1", 3)) == expected == 28


def test_lower_bound_closed_forms():
    refs = generate_simplex_lattice(3, 12)
    Z = refs.points
    for name, pts in [
        ("dtlz2", Z / np.linalg.norm(Z, axis=1, keepdims=True)),
        ("dtlz1", 0.5 * Z / Z.sum(axis=1, keepdims=True)),
    ]:
        p = get_problem(name, 3)
        pf = p.pf_sample()
        assert igd_lower_bound(refs, p, pf) == pytest.approx(igd(pf, pts), abs=1e-15)


def test_lower_bound_shrinks_with_density():
    p = get_problem("dtlz2", 3)
    pf = p.pf_sample()
    assert igd_lower_bound(generate_simplex_lattice(3, 20), p, pf) < igd_lower_bound(
        generate_simplex_lattice(3, 6), p, pf
    )


def test_unsupported_bound():
    with pytest.raises(UnsupportedMetricError):
        activity_upper_bound(generate_simplex_lattice(3, 4), get_problem("wfg1", 3))


def test_telemetry_contract(tmp_path):
    s = TelemetrySeries()
    s.append(TelemetryRecord(1, 182, 0.5, 10, 91))
    s.append(TelemetryRecord(2, 273, 0.25, 12, 91, True))
    with pytest.raises(ContractError):
        s.append(TelemetryRecord(3, 273, 0.2, 12, 91))
    with pytest.raises(ContractError):
        s.append(TelemetryRecord(3, 400, 0.2, 92, 91))
    s.write_csv(tmp_path / "t.csv")
    back = TelemetrySeries.read_csv(tmp_path / "t.csv")
    assert back.to_dicts() == s.to_dicts()
