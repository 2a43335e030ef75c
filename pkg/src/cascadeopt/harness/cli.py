"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from cascadeopt.harness import io
from cascadeopt.harness.config import ConfigError, load_configs
from cascadeopt.harness.runner import ablation_suite, run, run_batch
from cascadeopt.problems import get_problem
from cascadeopt.refgen import SimplexProjection, generate_simplex_lattice, project_to_simplex_plane
from cascadeopt.svm import EffectiveAreaClassifier

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("cascadeopt")


def _cmd_run(args) -> int:
    configs = load_configs(args.config)
    for cfg in configs:
        record = run(cfg)
        out = io.write_run(record, Path(args.out) / io.run_dirname(record))
        print(f"{cfg.problem} M={cfg.M} seed={cfg.seed}: IGD={record.final_igd:.6g} "
              f"active={record.final_active} events={len(record.learning_events)} -> {out}")
    return EXIT_OK


def _cmd_batch(args) -> int:
    configs = load_configs(args.config)
    records, summary = run_batch(configs, args.repeats, args.jobs)
    out = Path(args.out)
    for r in records:
        io.write_run(r, out / "runs" / io.run_dirname(r))
    io.write_summary(out / "summary.csv", summary)
    for row in summary:
        print(f"{row.problem} M={row.M} {row.scalarizer} adapt={row.adaptation}: "
              f"median IGD={row.median_igd:.6g} ({row.runs - row.failed}/{row.runs} ok)")
    return EXIT_OK if all(r.ok for r in records) else EXIT_RUNTIME


def _cmd_ablate(args) -> int:
    configs = load_configs(args.config)
    out = Path(args.out)
    ok = True
    for base in configs:
        res = ablation_suite(args.kind, base, args.repeats, args.jobs)
        tag = f"{base.problem}_M{base.M}_{args.kind}"
        io.write_summary(out / f"{tag}_summary.csv", res.summary)
        io.write_curves(out / f"{tag}_activity.csv", res.activity_curves())
        for r in res.records:
            io.write_run(r, out / "runs" / io.run_dirname(r))
            ok &= r.ok
        for row in res.summary:
            print(f"{tag}: {row.scalarizer} adapt={row.adaptation} median IGD={row.median_igd:.6g}")
    return EXIT_OK if ok else EXIT_RUNTIME


def _cmd_pf_sample(args) -> int:
    try:
        problem = get_problem(args.problem, args.M, args.D)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    pts = problem.pf_sample(args.k)
    np.savetxt(args.out if args.out else sys.stdout, pts, delimiter="\t", fmt="%.17g")
    return EXIT_OK


def _cmd_score_field(args) -> int:
    try:
        clf = EffectiveAreaClassifier.load(args.classifier)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load classifier snapshot: {exc}") from exc
    grid = generate_simplex_lattice(args.M, args.H).points
    proj = SimplexProjection.for_dim(args.M)
    coords = project_to_simplex_plane(grid, proj)
    if coords.shape[1] != clf.support_points.shape[1] and not clf.degenerate:
        raise ConfigError(f"snapshot was trained for a different M than {args.M}")
    scores = clf.score(coords)
    table = np.column_stack([grid, scores])
    np.savetxt(args.out if args.out else sys.stdout, table, delimiter="\t", fmt="%.10g")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cascadeopt", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run each config in a file once")
    r.add_argument("config")
    r.add_argument("--out", default="results")
    r.set_defaults(func=_cmd_run)

    b = sub.add_parser("batch", help="repeat configs with derived seeds and summarize")
    b.add_argument("config")
    b.add_argument("--repeats", type=int, default=20)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out", default="results")
    b.set_defaults(func=_cmd_batch)

    a = sub.add_parser("ablate", help="matched runs differing in one switch")
    a.add_argument("kind", choices=["scalarizer", "adaptation"])
    a.add_argument("config")
    a.add_argument("--repeats", type=int, default=10)
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--out", default="results")
    a.set_defaults(func=_cmd_ablate)

    s = sub.add_parser("pf-sample", help="write a true-front sample as a TSV table")
    s.add_argument("problem")
    s.add_argument("M", type=int)
    s.add_argument("--k", type=int, default=None)
    s.add_argument("--D", type=int, default=None)
    s.add_argument("--out", default=None)
    s.set_defaults(func=_cmd_pf_sample)

    f = sub.add_parser("score-field", help="classifier scores over a simplex lattice")
    f.add_argument("classifier", help="classifier.json snapshot from a run directory")
    f.add_argument("M", type=int)
    f.add_argument("--H", type=int, default=40)
    f.add_argument("--out", default=None)
    f.set_defaults(func=_cmd_score_field)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
