"""Command-line surface: prove, bench, gen, features, eval.

The CLI owns the global deadline; everything below it receives a budget
and a cancellation signal derived from --timeout.  Exit codes are a
stable contract: 0 proven equivalent, 1 counterexample found, 2 verdict
unknown, 3 usage or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import glob
import json
import os
import sys
import time

from .aiger import AigerError, parse_aiger, write_aiger
from .eval import evaluate
from .features import FEATURE_NAMES, extract_features
from .miter import (InterfaceMismatch, WidthOutOfRange, build_miter,
                    gen_multiplier_miter)
from .sweep import SubMiter, SweepConfig, sweep
from .verdict import COUNTEREXAMPLE, EQUIVALENT
from .xag import Xag

MAX_DEFAULT_THREADS = 32
ENGINES = ("auto", "sat", "es", "bdd", "portfolio-even")


class CliError(Exception):
    """Anything that should end the process with exit code 3."""


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; the contract here says 3
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(3)


def resolve_threads(requested: int | None) -> int:
    """--threads wins; FASTLEC_THREADS is consulted only when it is absent;
    otherwise the machine's core count capped at 32."""
    if requested is not None:
        if requested < 1:
            raise CliError("--threads must be >= 1")
        return requested
    env = os.environ.get("FASTLEC_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError:
            raise CliError(f"FASTLEC_THREADS must be an integer, got {env!r}")
        if n < 1:
            raise CliError(f"FASTLEC_THREADS must be >= 1, got {n}")
        return n
    return min(os.cpu_count() or 1, MAX_DEFAULT_THREADS)


def _load_circuit(path: str) -> Xag:
    """Parse an AIGER file and recover XOR gates from their AND encoding;
    the feature extractor and the partitioner both key on XOR structure."""
    from .transform import detect_xors

    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}")
    try:
        return detect_xors(parse_aiger(data))
    except AigerError as exc:
        raise CliError(f"{path}: {exc}")


def _load_miter(path: str, path2: str | None) -> Xag:
    a = _load_circuit(path)
    if path2 is not None:
        c = _load_circuit(path2)
        try:
            return build_miter(a, c)
        except InterfaceMismatch as exc:
            raise CliError(str(exc))
    if len(a.outputs) != 1:
        raise CliError(f"{path}: a miter needs exactly one output, found "
                       f"{len(a.outputs)}; pass two circuit files to compare")
    return a


def _verdict_word(res) -> str:
    if res.verdict == EQUIVALENT:
        return "EQ"
    if res.verdict == COUNTEREXAMPLE:
        return "NEQ"
    return "UNKNOWN"


def _witness_bits(res) -> str:
    return "".join(str(b) for b in res.witness)


def run_stats(res, *, threads: int, engine_mode: str, seed: int,
              wall: float) -> dict:
    """The --stats json document; schema documented in the README."""
    s = res.stats
    doc = {
        "verdict": _verdict_word(res),
        "wall_seconds": round(wall, 6),
        "threads": threads,
        "engine_mode": engine_mode,
        "seed": seed,
        "engine": res.engine or None,
        "reason": res.reason or None,
        "witness": _witness_bits(res) if res.witness is not None else None,
        "pairs_proven": s.get("merges"),
        "pairs_refuted": s.get("refinements"),
        "merges": s.get("merges"),
        "structural_merges": s.get("structural_merges"),
        "submiters": s.get("engine_calls"),
        "unknown_pairs": s.get("unknown_pairs"),
        "sim_patterns": s.get("sim_patterns"),
        "plan": s.get("plan"),
        "engine_stats": {k: v for k, v in s.items()
                         if k in ("conflicts", "decisions", "propagations",
                                  "wall_time", "words_done", "bdd_nodes",
                                  "engines", "predictions")},
    }
    return doc


def _load_models(path: str | None):
    if not path:
        return None
    from .sched import load_model

    try:
        return load_model(path)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load model {path}: {exc}")


def _sweep_config(args, threads: int, budget: float) -> SweepConfig:
    return SweepConfig(
        threads=threads,
        engine=args.engine,
        budget=budget,
        seed=args.seed,
        models=_load_models(args.model),
        select_only=getattr(args, "select_only", False),
        dump_dir=getattr(args, "dump_submiters", None),
        sat_log=getattr(args, "sat_log", None),
        bdd_max_nodes=getattr(args, "bdd_max_nodes", None),
    )


def cmd_prove(args) -> int:
    miter = _load_miter(args.path, args.path2)
    threads = resolve_threads(args.threads)
    cfg = _sweep_config(args, threads, args.timeout)
    t0 = time.monotonic()
    res = sweep(miter, cfg)
    wall = time.monotonic() - t0
    word = _verdict_word(res)
    print(f"NEQ {_witness_bits(res)}" if word == "NEQ" else word)
    if args.stats == "json":
        print(json.dumps(run_stats(res, threads=threads,
                                   engine_mode=args.engine, seed=args.seed,
                                   wall=wall), indent=2))
    return {"EQ": 0, "NEQ": 1, "UNKNOWN": 2}[word]


def par2(rows, cutoff: float) -> float:
    """Penalized average runtime: unsolved instances cost twice the cutoff.

    rows: iterable of (verdict, seconds) or (name, verdict, seconds).
    """
    total = 0.0
    count = 0
    for row in rows:
        verdict, seconds = row[-2], row[-1]
        total += float(seconds) if verdict in ("EQ", "NEQ") else 2.0 * cutoff
        count += 1
    if count == 0:
        raise ValueError("no instances")
    return total / count


def cmd_bench(args) -> int:
    if not os.path.isdir(args.dir):
        raise CliError(f"not a directory: {args.dir}")
    paths = sorted(glob.glob(os.path.join(args.dir, "*.aag"))
                   + glob.glob(os.path.join(args.dir, "*.aig")))
    if not paths:
        raise CliError(f"no AIGER instances under {args.dir}")
    threads = resolve_threads(args.threads)
    models = _load_models(args.model)
    rows = []
    print("name,verdict,seconds")
    for path in paths:
        miter = _load_miter(path, None)
        cfg = SweepConfig(threads=threads, engine=args.engine,
                          budget=args.cutoff, seed=args.seed, models=models)
        t0 = time.monotonic()
        res = sweep(miter, cfg)
        seconds = time.monotonic() - t0
        word = _verdict_word(res)
        name = os.path.basename(path)
        rows.append((name, word, seconds))
        print(f"{name},{word},{seconds:.3f}", flush=True)
    solved = sum(1 for _, w, _ in rows if w in ("EQ", "NEQ"))
    print(f"# solved,{solved}/{len(rows)}")
    print(f"# par2,{par2(rows, args.cutoff):.2f}")
    return 0


def cmd_gen(args) -> int:
    if args.kind != "mult":
        raise CliError(f"unknown generator kind {args.kind!r}")
    try:
        miter = gen_multiplier_miter(args.width, "array", "diagonal")
    except WidthOutOfRange as exc:
        raise CliError(str(exc))
    try:
        with open(args.out, "wb") as fh:
            fh.write(write_aiger(miter))
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc.strerror or exc}")
    return 0


def _feature_row(xag: Xag, sm_id: int, seed: int) -> list[str]:
    sm = SubMiter(circuit=xag, origin=(0, 0), merged_history={},
                  pi_map=tuple(range(1, xag.num_pis + 1)), id=sm_id)
    fv = extract_features(sm, seed=seed)
    return [f"{v:.10g}" for v in fv.values]


def cmd_features(args) -> int:
    out = csv.writer(sys.stdout, lineterminator="\n")
    if os.path.isdir(args.path):
        # a --dump-submiters directory: join ids from its manifest
        manifest = os.path.join(args.path, "manifest.csv")
        if not os.path.isfile(manifest):
            raise CliError(f"{args.path}: no manifest.csv; not a dump directory")
        out.writerow(("submiter_id",) + FEATURE_NAMES)
        with open(manifest, newline="", encoding="utf-8") as fh:
            for rec in csv.DictReader(fh):
                sm_id = int(rec["id"])
                sub = os.path.join(args.path, f"submiter_{sm_id:05d}.aag")
                xag = _load_circuit(sub)
                out.writerow([sm_id] + _feature_row(xag, sm_id, args.seed))
        return 0
    xag = _load_circuit(args.path)
    if len(xag.outputs) != 1:
        raise CliError(f"{args.path}: features need a single-output miter")
    out.writerow(FEATURE_NAMES)
    out.writerow(_feature_row(xag, 0, args.seed))
    return 0


def cmd_eval(args) -> int:
    xag = _load_miter(args.path, None)
    if len(args.bits) != xag.num_pis or set(args.bits) - {"0", "1"}:
        raise CliError(f"need {xag.num_pis} bits of 0/1, got {args.bits!r}")
    print(evaluate(xag, args.bits))
    return 0


def _add_common(p, *, timeout_flag: str = "--timeout") -> None:
    p.add_argument("--threads", type=int, default=None, metavar="N",
                   help="worker threads (default: cores, capped at "
                        f"{MAX_DEFAULT_THREADS}; else FASTLEC_THREADS)")
    p.add_argument(timeout_flag, type=float,
                   default=3600.0, metavar="S",
                   help="wall-clock budget in seconds (default 3600)")
    p.add_argument("--engine", choices=ENGINES, default="auto")
    p.add_argument("--seed", type=int, default=0, metavar="K")
    p.add_argument("--model", metavar="FILE",
                   help="runtime-prediction model JSON")


def build_parser() -> _Parser:
    parser = _Parser(prog="cecprove", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("prove", help="decide one miter or compare two circuits")
    p.add_argument("path")
    p.add_argument("path2", nargs="?", default=None)
    _add_common(p)
    p.add_argument("--select-only", action="store_true",
                   help="choose one engine by the cost ratio; no allocation")
    p.add_argument("--dump-submiters", metavar="DIR",
                   help="write every dispatched sub-miter plus manifest.csv")
    p.add_argument("--stats", choices=("none", "json"), default="none")
    p.add_argument("--sat-log", metavar="FILE",
                   help="append divide-and-conquer task events")
    p.add_argument("--bdd-max-nodes", type=int, metavar="N")
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("bench", help="run a directory of miters, report PAR2")
    p.add_argument("dir")
    _add_common(p, timeout_flag="--cutoff")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("gen", help="generate a benchmark miter")
    p.add_argument("kind", choices=("mult",))
    p.add_argument("width", type=int)
    p.add_argument("out")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("features", help="print the 32-feature CSV")
    p.add_argument("path", help="miter file, or a --dump-submiters directory")
    p.add_argument("--seed", type=int, default=0, metavar="K")
    p.set_defaults(fn=cmd_features)

    p = sub.add_parser("eval", help="evaluate a miter on an input bit string")
    p.add_argument("path")
    p.add_argument("bits")
    p.set_defaults(fn=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CliError as exc:
        print(f"cecprove: error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 3


if __name__ == "__main__":
    sys.exit(main())
