"""On-disk layout of run results.

Each run directory holds::

    config.json       the (seeded) config that produced it
    telemetry.csv     generation, fe_count, igd, active_refs, total_refs, event
    population.txt    "# decisions" block then "# objectives" block
    events.csv        one row per learning event
    references.tsv    final reference points
    classifier.json   classifier snapshot, when one was trained
"""

from __future__ import annotations

import csv
from dataclasses import asdict
from pathlib import Path

import numpy as np

from cascadeopt.harness.config import dumps
from cascadeopt.harness.runner import SummaryRow
from cascadeopt.refgen import save_reference_set

EVENT_FIELDS = (
    "generation", "old_count", "new_count", "generated_count", "delta", "density_after",
    "active_before", "skipped", "reason", "upper_bound", "igd_lower_bound",
)


def write_population(path, decisions: np.ndarray, objectives: np.ndarray) -> None:
    with open(Path(path), "w") as fh:
        fh.write("# decisions\n")
        np.savetxt(fh, decisions, fmt="%.17g")
        fh.write("\n# objectives\n")
        np.savetxt(fh, objectives, fmt="%.17g")


def read_population(path) -> tuple[np.ndarray, np.ndarray]:
    blocks: dict[str, list[list[float]]] = {}
    current = None
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line.startswith("#"):
            current = line[1:].strip()
            blocks[current] = []
        elif line:
            blocks[current].append([float(v) for v in line.split()])
    return np.array(blocks["decisions"]), np.array(blocks["objectives"])


def write_events(path, events) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVENT_FIELDS)
        for e in events:
            d = asdict(e)
            d["density_after"] = "/".join(str(h) for h in e.density_after)
            w.writerow([d[k] for k in EVENT_FIELDS])


def write_run(record, directory) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(dumps(record.config))
    if not record.ok:
        (out / "error.txt").write_text(record.error)
        return out
    record.telemetry.write_csv(out / "telemetry.csv")
    write_population(out / "population.txt", record.decisions, record.objectives)
    write_events(out / "events.csv", record.events)
    if record.refs is not None:
        save_reference_set(record.refs, out / "references.tsv")
    if record.classifier is not None:
        record.classifier.save(out / "classifier.json")
    return out


def run_dirname(record) -> str:
    c = record.config
    return f"{c.problem}_M{c.M}_N{c.N}_{c.digest()}_seed{c.seed}"


def _open_new(path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline="")


def write_summary(path, rows: list[SummaryRow]) -> None:
    with _open_new(path) as fh:
        w = csv.writer(fh)
        w.writerow(SummaryRow.HEADER)
        for r in rows:
            w.writerow(r.as_row())


def write_curves(path, curves: dict[str, np.ndarray]) -> None:
    names = list(curves)
    n = min((len(v) for v in curves.values()), default=0)
    with _open_new(path) as fh:
        w = csv.writer(fh)
        w.writerow(["generation", *names])
        for g in range(n):
            w.writerow([g + 1, *(curves[k][g] for k in names)])
