"""IGD and the ideal-case bounds used to read activity/IGD curves."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from cascadeopt.core import ContractError
from cascadeopt.problems import Problem
from cascadeopt.refgen import ReferenceSet, generate


def _min_distances(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """For each row of A, Euclidean distance to its nearest row of B."""
    dist, _ = cKDTree(B).query(A, k=1)
    return dist


def igd(pf_ref, pop_objs) -> float:
    """Mean distance from each reference-front point to the closest obtained point."""
    R = np.atleast_2d(np.asarray(pf_ref, dtype=float))
    P = np.atleast_2d(np.asarray(pop_objs, dtype=float))
    if R.size == 0 or P.size == 0:
        raise ContractError("IGD needs non-empty reference and population sets")
    if R.shape[1] != P.shape[1]:
        raise ContractError("objective dimension mismatch")
    return float(_min_distances(R, P).mean())


def _full_lattice(refs: ReferenceSet) -> np.ndarray:
    return generate(refs.n_obj, refs.density).points


def activity_upper_bound(refs: ReferenceSet, problem: Problem) -> int:
    """Lattice points at the current density whose rays meet the true front."""
    return int(problem.effective_mask(_full_lattice(refs)).sum())


def igd_lower_bound(refs: ReferenceSet, problem: Problem, pf_ref=None) -> float:
    """IGD of a population sitting exactly on every ray/front intersection at this density."""
    Z = _full_lattice(refs)
    Z = Z[problem.effective_mask(Z)]
    pts = problem.ray_intersection(Z)
    pf_ref = problem.pf_sample() if pf_ref is None else pf_ref
    return igd(pf_ref, pts)


@dataclass
class TelemetryRecord:
    generation: int
    fe_count: int
    igd: float
    active_refs: int
    total_refs: int
    event: bool = False


@dataclass
class TelemetrySeries:
    records: list[TelemetryRecord] = field(default_factory=list)

    def append(self, rec: TelemetryRecord) -> None:
        if self.records and rec.fe_count <= self.records[-1].fe_count:
            raise ContractError("fe_count must be strictly increasing")
        if not 0 <= rec.active_refs <= rec.total_refs:
            raise ContractError("need 0 <= active_refs <= total_refs")
        self.records.append(rec)

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def write_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["generation", "fe_count", "igd", "active_refs", "total_refs", "event"])
            for r in self.records:
                w.writerow([r.generation, r.fe_count, repr(r.igd), r.active_refs, r.total_refs, int(r.event)])

    @classmethod
    def read_csv(cls, path) -> TelemetrySeries:
        series = cls()
        with open(Path(path), newline="") as fh:
            for row in csv.DictReader(fh):
                series.append(
                    TelemetryRecord(
                        int(row["generation"]),
                        int(row["fe_count"]),
                        float(row["igd"]),
                        int(row["active_refs"]),
                        int(row["total_refs"]),
                        bool(int(row["event"])),
                    )
                )
        return series

    def to_dicts(self) -> list[dict]:
        return [asdict(r) for r in self.records]
