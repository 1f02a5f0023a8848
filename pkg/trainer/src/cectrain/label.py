"""Measure per-engine runtimes on dumped sub-miters via the prover CLI.

Talks to the prover only through its command line (`prove --engine
sat|bdd --threads 1`), so the trainer never links against it.  Each
instance gets the labelling cap as its timeout; instances the engine
cannot settle inside the cap are recorded at the cap (censored, the
same convention the runtime targets use).
"""

from __future__ import annotations

import csv
import os
import subprocess
import sys
import time
from dataclasses import dataclass

from .dataset import RUNTIME_CAP


@dataclass(frozen=True)
class LabelConfig:
    dump_dir: str
    out_csv: str
    engines: tuple[str, ...] = ("sat", "bdd")
    cap: float = RUNTIME_CAP
    prover: str = "cecprove"
    seed: int = 0


def _submiter_ids(dump_dir: str) -> list[int]:
    manifest = os.path.join(dump_dir, "manifest.csv")
    with open(manifest, newline="", encoding="utf-8") as fh:
        return [int(row["id"]) for row in csv.DictReader(fh)]


def _time_one(cfg: LabelConfig, path: str, engine: str) -> float:
    cmd = [cfg.prover, "prove", path, "--engine", engine, "--threads", "1",
           "--timeout", str(cfg.cap), "--seed", str(cfg.seed)]
    t0 = time.monotonic()
    proc = subprocess.run(cmd, stdout=subprocess.DEVNULL,
                          stderr=subprocess.DEVNULL,
                          timeout=cfg.cap * 2 + 120)
    elapsed = time.monotonic() - t0
    if proc.returncode not in (0, 1):  # not settled: censor at the cap
        return cfg.cap
    return min(elapsed, cfg.cap)


def run_labels(cfg: LabelConfig, log=sys.stderr) -> int:
    ids = _submiter_ids(cfg.dump_dir)
    written = 0
    with open(cfg.out_csv, "w", newline="", encoding="utf-8") as fh:
        out = csv.writer(fh)
        out.writerow(("submiter_id", "engine", "seconds"))
        for sm_id in ids:
            path = os.path.join(cfg.dump_dir, f"submiter_{sm_id:05d}.aag")
            for engine in cfg.engines:
                seconds = _time_one(cfg, path, engine)
                out.writerow((sm_id, engine.upper(), f"{seconds:.4f}"))
                fh.flush()
                written += 1
                print(f"labeled {sm_id} {engine} {seconds:.2f}s", file=log)
    return written
