import json

import numpy as np
import pytest

from cascadeopt.harness import ConfigError, RunConfig, ablation_suite, run, run_batch
from cascadeopt.harness import io
from cascadeopt.harness.cli import main
from cascadeopt.harness.config import derive_seed, dumps, loads
from cascadeopt.harness.runner import expand
from cascadeopt.svm import EffectiveAreaClassifier

SMALL = dict(M=3, N=15, max_fes=1500)


def small(problem="dtlz2", **kw):
    return RunConfig(problem, **{**SMALL, **kw})


def test_config_roundtrip():
    c = small("maf1", seed=7, theta=3, scalarizer="pbi")
    assert loads(dumps(c)) == [c]
    assert loads(dumps([c, c.with_seed(8)])) == [c, c.with_seed(8)]


@pytest.mark.parametrize(
    "kw",
    [
        dict(problem="nope", M=3, N=10),
        dict(problem="dtlz2", M=3, N=2),
        dict(problem="dtlz2", M=3, N=10, max_fes=5),
        dict(problem="dtlz2", M=3, N=10, scalarizer="tch"),
        dict(problem="dtlz2", M=3, N=10, normalization=True),
    ],
)
def test_config_rejections(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_unknown_keys_and_bad_json():
    with pytest.raises(ConfigError):
        loads(json.dumps({"problem": "dtlz2", "M": 3, "N": 10, "colour": 1}))
    with pytest.raises(ConfigError):
        loads("{not json")


def test_default_budget():
    assert RunConfig("dtlz2", 3, 91).budget == 120_000
    assert RunConfig("dtlz1", 3, 91).budget == 100_000


def test_digest_ignores_seed():
    c = small()
    assert c.digest() == c.with_seed(99).digest()
    assert c.digest() != small(N=16).digest()
    assert derive_seed(0, c.digest(), 0) != derive_seed(0, c.digest(), 1)


def test_run_is_deterministic():
    a, b = run(small(seed=3)), run(small(seed=3))
    assert a.telemetry.to_dicts() == b.telemetry.to_dicts()
    assert np.array_equal(a.decisions, b.decisions)
    assert np.array_equal(a.objectives, b.objectives)


def test_fe_accounting():
    rec = run(small(max_fes=1000))
    fes = rec.telemetry.column("fe_count")
    assert fes[0] == 30 and np.all(np.diff(fes) == 15)
    assert fes[-1] <= 1000 and fes[-1] + 15 > 1000
    assert rec.objectives.shape == (15, 3)


def test_adaptation_off_keeps_reference_count():
    rec = run(small("maf1", adaptation=False, theta=2, max_fes=3000))
    assert len(set(rec.telemetry.column("total_refs"))) == 1
    assert not rec.events


def test_adaptation_events_recorded():
    rec = run(small("maf1", theta=2, max_fes=3000))
    assert rec.learning_events
    ev = rec.learning_events[0]
    assert ev.new_count >= min(30, ev.generated_count)
    assert ev.upper_bound is not None and ev.igd_lower_bound > 0
    assert rec.telemetry.column("event").sum() == len(rec.learning_events)


def test_batch_summary():
    configs = [small(), small("dtlz1")]
    records, summary = run_batch(configs, repeats=3)
    assert len(records) == 6 and all(r.ok for r in records)
    assert len({r.config.seed for r in records}) == 6
    for row, c in zip(summary, configs):
        finals = [r.final_igd for r in records if r.config.digest() == c.digest()]
        assert row.runs == 3 and row.mean_igd == pytest.approx(np.mean(finals))


def test_parallel_equals_serial():
    configs = [small(), small("maf1")]
    serial, _ = run_batch(configs, repeats=2, parallelism=1)
    parallel, _ = run_batch(configs, repeats=2, parallelism=2)
    for a, b in zip(serial, parallel):
        assert a.config == b.config
        assert a.telemetry.to_dicts() == b.telemetry.to_dicts()


def test_failed_run_is_isolated():
    # a budget too small for any generation still yields a record without telemetry rows
    records, summary = run_batch([small(max_fes=16)], repeats=1)
    assert records[0].ok and len(records[0].telemetry) == 0


def test_ablation_arms_share_seeds():
    res = ablation_suite("scalarizer", small(), repeats=2)
    assert [a.scalarizer for a in res.arms] == ["pdm", "pbi"]
    seeds = [[r.config.seed for r in res.arm_records(a)] for a in res.arms]
    assert seeds[0] == seeds[1]
    assert len(res.summary) == 2
    assert set(res.activity_curves()) == {"scalarizer=pdm", "scalarizer=pbi"}


def test_expand_seed_from():
    base = small()
    a = expand([base.with_seed(0)], 2, seed_from=base)
    b = expand([small(scalarizer="pbi")], 2, seed_from=base)
    assert [c.seed for c in a] == [c.seed for c in b]


def test_write_run_layout(tmp_path):
    rec = run(small("maf1", theta=2, max_fes=3000))
    out = io.write_run(rec, tmp_path / io.run_dirname(rec))
    names = {p.name for p in out.iterdir()}
    assert {"config.json", "telemetry.csv", "population.txt", "events.csv", "references.tsv", "classifier.json"} <= names
    X, F = io.read_population(out / "population.txt")
    assert np.array_equal(X, rec.decisions) and np.array_equal(F, rec.objectives)
    assert loads((out / "config.json").read_text()) == [rec.config]
    clf = EffectiveAreaClassifier.load(out / "classifier.json")
    assert clf.trained


def write_config(tmp_path, **kw):
    path = tmp_path / "cfg.json"
    path.write_text(dumps(small(**kw)))
    return path


def test_cli_run(tmp_path, capsys):
    assert main(["run", str(write_config(tmp_path)), "--out", str(tmp_path / "o")]) == 0
    assert "IGD=" in capsys.readouterr().out
    assert any((tmp_path / "o").iterdir())


def test_cli_batch_and_ablate(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["batch", str(cfg), "--repeats", "2", "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "b" / "summary.csv").exists()
    assert main(["ablate", "adaptation", str(cfg), "--repeats", "1", "--out", str(tmp_path / "a")]) == 0
    assert (tmp_path / "a" / "dtlz2_M3_adaptation_activity.csv").exists()


def test_cli_config_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"problem": "dtlz2", "M": 3, "N": 1}')
    assert main(["run", str(bad)]) == 1
    assert main(["run", str(tmp_path / "missing.json")]) == 1
    assert "config error" in capsys.readouterr().err


def test_cli_pf_sample(tmp_path):
    out = tmp_path / "pf.tsv"
    assert main(["pf-sample", "dtlz2", "3", "--k", "100", "--out", str(out)]) == 0
    pts = np.loadtxt(out)
    assert pts.shape[1] == 3 and np.allclose((pts**2).sum(axis=1), 1.0)
    assert main(["pf-sample", "nope", "3"]) == 1


def test_cli_score_field(tmp_path):
    rec = run(small("maf1", theta=2, max_fes=3000))
    out = io.write_run(rec, tmp_path / "r")
    field = tmp_path / "field.tsv"
    assert main(["score-field", str(out / "classifier.json"), "3", "--H", "10", "--out", str(field)]) == 0
    table = np.loadtxt(field)
    assert table.shape == (66, 4) and np.all((table[:, 3] > 0) & (table[:, 3] < 1))
    assert main(["score-field", str(tmp_path / "nothing.json"), "3"]) == 1
