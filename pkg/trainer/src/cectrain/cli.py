"""Trainer command line: label dumped sub-miters, train, export."""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from .dataset import CollectError, InsufficientData, collect
from .label import LabelConfig, run_labels
from .train import train_and_export


def cmd_label(args) -> int:
    cfg = LabelConfig(dump_dir=args.dump, out_csv=args.out,
                      engines=tuple(e.lower() for e in args.engines),
                      cap=args.cap, prover=args.prover, seed=args.seed)
    n = run_labels(cfg)
    print(f"wrote {n} labels to {args.out}")
    return 0


def cmd_train(args) -> int:
    ds = collect(args.labels, args.features)
    engines = ("SAT", "BDD") if args.engine == "both" else (args.engine,)
    merged: dict[str, dict] = {}
    for engine in engines:
        with tempfile.NamedTemporaryFile("r", suffix=".json",
                                         delete=False) as tmp:
            tmp_path = tmp.name
        try:
            rep = train_and_export(ds, engine, tmp_path, seed=args.seed)
            with open(tmp_path, encoding="utf-8") as fh:
                merged.update(json.load(fh))
        finally:
            os.unlink(tmp_path)
        print(f"{engine}: n={rep.n_samples} cv_mse={rep.cv_mse:.4f} "
              f"cv_mse_sub_cap={rep.cv_mse_sub_cap:.4f} "
              f"baseline_mse={rep.baseline_mse:.4f} "
              f"parity={rep.parity_max_abs:.2e}")
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(merged, fh)
    print(f"wrote {args.out}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="cectrain")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("label", help="measure engine runtimes on a dump dir")
    p.add_argument("--dump", required=True, metavar="DIR")
    p.add_argument("--out", required=True, metavar="CSV")
    p.add_argument("--engines", nargs="+", default=["sat", "bdd"],
                   choices=["sat", "bdd"])
    p.add_argument("--cap", type=float, default=1200.0)
    p.add_argument("--prover", default="cecprove")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_label)

    p = sub.add_parser("train", help="fit and export runtime models")
    p.add_argument("--labels", required=True, metavar="CSV")
    p.add_argument("--features", required=True, metavar="CSV")
    p.add_argument("--out", required=True, metavar="JSON")
    p.add_argument("--engine", choices=["SAT", "BDD", "both"], default="both")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_train)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (CollectError, InsufficientData, OSError) as exc:
        print(f"cectrain: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
