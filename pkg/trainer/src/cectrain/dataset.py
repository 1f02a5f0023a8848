"""Dataset assembly: join dumped features with measured engine runtimes.

Inputs are two CSV files produced on the prover side: a features table
(submiter_id + the 32-column feature schema, header row first) and a
labels table (submiter_id, engine, seconds).  The join key is
submiter_id; instances whose num_PIs is 22 or below are discarded
because exhaustive simulation settles them long before either SAT or
BDD would be consulted, and runtimes are capped at the labelling
cutoff.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

RUNTIME_CAP = 1200.0
PI_FILTER = 22.0  # num_PIs <= 22 rows never reach the learned models
ENGINES = ("SAT", "BDD")


class CollectError(ValueError):
    """Malformed or inconsistent input tables; aborts collection."""


class InsufficientData(ValueError):
    pass


@dataclass(frozen=True)
class LabeledSample:
    submiter_id: int
    features: tuple[float, ...]
    engine: str  # SAT | BDD
    runtime: float  # seconds, capped

    def __post_init__(self) -> None:
        if self.engine not in ENGINES:
            raise CollectError(f"unknown engine {self.engine!r}")
        if not 0.0 <= self.runtime <= RUNTIME_CAP:
            raise CollectError(f"runtime {self.runtime} outside [0, {RUNTIME_CAP}]")


@dataclass
class Dataset:
    feature_names: tuple[str, ...]
    samples: dict[str, list[LabeledSample]] = field(default_factory=dict)

    def matrix(self, engine: str) -> tuple[np.ndarray, np.ndarray]:
        rows = self.samples.get(engine, [])
        x = np.array([s.features for s in rows], dtype=np.float64)
        y = np.array([s.runtime for s in rows], dtype=np.float64)
        return x, y

    def counts(self) -> dict[str, int]:
        return {e: len(v) for e, v in self.samples.items()}


def _read_features(path: str) -> tuple[tuple[str, ...], dict[int, tuple[float, ...]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CollectError(f"{path}: empty features file")
        if not header or header[0] != "submiter_id":
            raise CollectError(f"{path}: first column must be submiter_id")
        names = tuple(header[1:])
        if "num_PIs" not in names:
            raise CollectError(f"{path}: schema lacks num_PIs")
        table: dict[int, tuple[float, ...]] = {}
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(names) + 1:
                raise CollectError(f"{path}:{ln}: expected {len(names) + 1} "
                                   f"columns, got {len(row)}")
            table[int(row[0])] = tuple(float(v) for v in row[1:])
    return names, table


def _read_labels(path: str) -> list[tuple[int, str, float]]:
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise CollectError(f"{path}: empty labels file")
        if [c.strip() for c in header[:3]] != ["submiter_id", "engine", "seconds"]:
            raise CollectError(f"{path}: header must be submiter_id,engine,seconds")
        for ln, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3:
                raise CollectError(f"{path}:{ln}: short row")
            out.append((int(row[0]), row[1].strip().upper(), float(row[2])))
    return out


def collect(labels_csv: str, features_csv: str) -> Dataset:
    """Join the two tables into per-engine training sets.

    Labels without a matching feature row abort (a silent drop would
    make label/feature drift invisible); feature rows without labels are
    fine, they are simply unlabeled.
    """
    names, feats = _read_features(features_csv)
    labels = _read_labels(labels_csv)
    pi_col = names.index("num_PIs")

    ds = Dataset(feature_names=names, samples={e: [] for e in ENGINES})
    missing = [sid for sid, _, _ in labels if sid not in feats]
    if missing:
        raise CollectError(
            f"{len(missing)} labeled ids missing from the features table "
            f"(first few: {sorted(set(missing))[:5]})")
    kept = 0
    for sid, engine, seconds in labels:
        row = feats[sid]
        if row[pi_col] <= PI_FILTER:
            continue
        ds.samples.setdefault(engine, []).append(LabeledSample(
            submiter_id=sid, features=row, engine=engine,
            runtime=min(max(seconds, 0.0), RUNTIME_CAP)))
        kept += 1
    if kept == 0:
        raise CollectError("empty join: no labeled sample survived the "
                           f"num_PIs > {PI_FILTER:g} filter")
    return ds
