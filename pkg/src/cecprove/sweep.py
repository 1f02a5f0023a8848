"""Simulation-guided sweeping: the top-level proving flow.

Random simulation proposes potentially equivalent node pairs, each pair
becomes a small sub-miter (fanin cones only, with every previously
proven node merged into its representative), the engine layer decides
it, and counterexamples refine the candidate classes.  The run ends by
discharging the final output obligation on the fully reduced miter.
"""

from __future__ import annotations

import os
import random
import time
import zlib
from dataclasses import dataclass, field

import numpy as np

from .eval import evaluate
from .verdict import COUNTEREXAMPLE, EQUIVALENT, UNKNOWN, CheckResult
from .sim import random_pi_words, simulate
from .xag import FALSE, GateKind, Lit, Xag, XagBuilder

_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


@dataclass(frozen=True)
class Signature:
    """Canonical simulation signature; complements share one key."""

    node: int
    bits: bytes  # min(raw, ~raw) in byte order
    canonical_polarity: bool  # True when raw was complemented


@dataclass
class PeClass:
    members: list[tuple[int, bool]]  # (node, polarity vs canonical bits)
    representative: int  # topologically earliest member


@dataclass
class SubMiter:
    """Localized equivalence obligation extracted from the parent miter."""

    circuit: Xag  # single output: XOR of the pair, polarity-corrected
    origin: tuple[int, int]  # (a, b) node pair in the parent
    merged_history: dict[int, Lit]  # parent node -> representative literal
    pi_map: tuple[int, ...]  # sub PI i+1 -> parent PI pi_map[i]
    id: int = 0


def _signatures(vals: np.ndarray) -> list[Signature]:
    sigs = []
    for node in range(vals.shape[0]):
        raw = vals[node].tobytes()
        inv = (vals[node] ^ _ONES).tobytes()
        if inv < raw:
            sigs.append(Signature(node, inv, True))
        else:
            sigs.append(Signature(node, raw, False))
    return sigs


def random_simulate(xag: Xag, num_words: int = 64, seed: int = 0) -> list[Signature]:
    """Seeded word-parallel simulation, one canonical signature per node."""
    if num_words < 1:
        raise ValueError("num_words must be >= 1")
    return _signatures(simulate(xag, random_pi_words(xag.num_pis, num_words, seed)))


def build_pe_classes(signatures: list[Signature]) -> list[PeClass]:
    """Group nodes by canonical signature; singletons are dropped."""
    groups: dict[bytes, list[tuple[int, bool]]] = {}
    for s in signatures:
        groups.setdefault(s.bits, []).append((s.node, s.canonical_polarity))
    classes = [PeClass(sorted(g), min(n for n, _ in g))
               for g in groups.values() if len(g) >= 2]
    classes.sort(key=lambda c: c.representative)
    return classes


def _resolve(node: int, merges: dict[int, Lit]) -> tuple[int, bool]:
    neg = False
    while node in merges:
        rep = merges[node]
        node, neg = rep.node, neg != rep.neg
    return node, neg


def extract_submiter(xag: Xag, a: int, b: int, merges: dict[int, Lit],
                     polarity: bool = False, sm_id: int = 0) -> SubMiter:
    """Cone-local miter for the claim a == b XOR polarity.

    Fanin cones are walked through the merge map, so proven nodes
    collapse into their representatives; support PIs are renumbered
    densely.  Structural hashing may fold the output to a constant.
    """
    an, aneg = _resolve(a, merges)
    bn, bneg = _resolve(b, merges)

    # support scan over the merged graph
    support: set[int] = set()
    seen: set[int] = set()
    stack = [an, bn]
    while stack:
        node = stack.pop()
        if node in seen or node == 0:
            continue
        seen.add(node)
        if xag.is_pi(node):
            support.add(node)
            continue
        g = xag.gate_at(node)
        stack.append(_resolve(g.in0.node, merges)[0])
        stack.append(_resolve(g.in1.node, merges)[0])

    pi_map = tuple(sorted(support))
    pi_index = {orig: i + 1 for i, orig in enumerate(pi_map)}
    bld = XagBuilder(len(pi_map))
    memo: dict[int, Lit] = {0: FALSE}

    def mapped(lit: Lit) -> Lit:
        node, neg = _resolve(lit.node, merges)
        got = memo[node]
        return Lit(got.node, got.neg ^ neg ^ lit.neg)

    # iterative post-order rebuild of both cones
    seen.clear()
    stack = [(an, False), (bn, False)]
    while stack:
        node, expanded = stack.pop()
        if node == 0 or node in memo:
            continue
        if xag.is_pi(node):
            memo[node] = bld.pi(pi_index[node])
            continue
        if expanded:
            g = xag.gate_at(node)
            l0, l1 = mapped(g.in0), mapped(g.in1)
            memo[node] = (bld.add_and(l0, l1) if g.kind == GateKind.AND
                          else bld.add_xor(l0, l1))
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        g = xag.gate_at(node)
        stack.append((_resolve(g.in0.node, merges)[0], False))
        stack.append((_resolve(g.in1.node, merges)[0], False))

    la = Lit(memo[an].node, memo[an].neg != aneg)
    lb = Lit(memo[bn].node, memo[bn].neg != bneg)
    out = bld.add_xor(la, lb)
    if polarity:
        out = ~out
    return SubMiter(bld.finish([out]), (a, b), dict(merges), pi_map, sm_id)


def refine_with_cex(xag: Xag, classes: list[PeClass],
                    pattern: tuple[int, ...]) -> list[PeClass]:
    """Split classes using a counterexample and 63 of its perturbations.

    The perturbation RNG is seeded from the pattern, so reapplying the
    same counterexample is idempotent.
    """
    if len(pattern) != xag.num_pis:
        raise ValueError(f"pattern must assign all {xag.num_pis} PIs")
    rng = random.Random(zlib.crc32(bytes(pattern)))
    pi_words = np.zeros((xag.num_pis, 1), dtype=np.uint64)
    for i, bit in enumerate(pattern):
        if bit:
            pi_words[i, 0] = np.uint64(1)
    for p in range(1, 64):
        for i in range(xag.num_pis):
            bit = pattern[i] ^ (rng.random() < 0.125)
            if bit:
                pi_words[i, 0] |= np.uint64(1 << p)
    vals = simulate(xag, pi_words)
    refined: list[PeClass] = []
    for cls in classes:
        groups: dict[int, list[tuple[int, bool]]] = {}
        for node, pol in cls.members:
            word = int(vals[node, 0])
            if pol:
                word ^= 0xFFFFFFFFFFFFFFFF
            groups.setdefault(word, []).append((node, pol))
        for g in groups.values():
            if len(g) >= 2:
                refined.append(PeClass(g, g[0][0]))
    refined.sort(key=lambda c: c.representative)
    return refined


@dataclass
class SweepConfig:
    threads: int = 1
    engine: str = "auto"  # auto | sat | es | bdd | portfolio-even
    budget: float | None = None  # global wall budget
    pair_budget: float = 5.0  # per sub-miter; final obligation gets the rest
    seed: int = 0
    sim_words: int = 64
    models: dict | None = None
    select_only: bool = False  # cost-ratio engine choice, no allocation policy
    dump_dir: str | None = None
    sat_log: str | None = None
    bdd_max_nodes: int | None = None


def _even_plan(n: int):
    """Fixed portfolio: split SAT/ES evenly, then SAT donates one thread
    to BDD when it can still keep one for itself."""
    from .sched import EnginePlan

    sat = (n + 1) // 2
    es = n - sat
    bdd = 0
    if sat >= 2:
        sat -= 1
        bdd = 1
    return EnginePlan(sat_threads=sat, es_threads=es, bdd_threads=bdd)


def _check_submiter(sm: SubMiter, cfg: SweepConfig,
                    budget: float | None) -> CheckResult:
    if cfg.engine == "auto":
        from .sched import PRED_CAP, auto_check

        cutoff = budget if budget is not None else float(PRED_CAP)
        return auto_check(sm, threads=cfg.threads, cutoff=cutoff,
                          models=cfg.models, seed=cfg.seed, budget=budget,
                          bdd_max_nodes=cfg.bdd_max_nodes,
                          select_only=cfg.select_only)
    if cfg.engine == "sat":
        from .partition import sat_check

        return sat_check(sm, threads=cfg.threads, budget=budget,
                         seed=cfg.seed, sat_log=cfg.sat_log)
    if cfg.engine == "es":
        from .es import es_check

        return es_check(sm, workers=cfg.threads, budget=budget)
    if cfg.engine == "bdd":
        from .bdd import BddLimits, bdd_check

        limits = (BddLimits(max_nodes=cfg.bdd_max_nodes)
                  if cfg.bdd_max_nodes else BddLimits())
        return bdd_check(sm, limits=limits, budget=budget)
    if cfg.engine == "portfolio-even":
        from .sched import dispatch

        return dispatch(sm, _even_plan(cfg.threads), budget=budget,
                        bdd_max_nodes=cfg.bdd_max_nodes)
    raise ValueError(f"unknown engine {cfg.engine!r}")


def _expand_witness(sm: SubMiter, witness: tuple[int, ...],
                    num_pis: int) -> tuple[int, ...]:
    bits = [0] * num_pis
    for i, orig in enumerate(sm.pi_map):
        bits[orig - 1] = witness[i]
    return tuple(bits)


class _Dumper:
    def __init__(self, directory: str | None) -> None:
        self.dir = directory
        if directory is not None:
            os.makedirs(directory, exist_ok=True)
            self.manifest = open(os.path.join(directory, "manifest.csv"), "w",
                                 encoding="utf-8")
            self.manifest.write("id,origin_a,origin_b,num_pis\n")

    def dump(self, sm: SubMiter) -> None:
        if self.dir is None:
            return
        from .aiger import write_aiger

        path = os.path.join(self.dir, f"submiter_{sm.id:05d}.aag")
        with open(path, "wb") as fh:
            fh.write(write_aiger(sm.circuit))
        self.manifest.write(
            f"{sm.id},{sm.origin[0]},{sm.origin[1]},{sm.circuit.num_pis}\n")
        self.manifest.flush()

    def close(self) -> None:
        if self.dir is not None:
            self.manifest.close()


def sweep(miter: Xag, config: SweepConfig = SweepConfig()) -> CheckResult:
    """Full sweeping run on a single-output miter."""
    t0 = time.monotonic()
    deadline = None if config.budget is None else t0 + config.budget
    stats = {"engine_calls": 0, "merges": 0, "structural_merges": 0,
             "refinements": 0, "unknown_pairs": 0, "sim_patterns": 0}

    def finish(res: CheckResult) -> CheckResult:
        stats["wall_time"] = time.monotonic() - t0
        res.stats = {**res.stats, **stats}
        return res

    dumper = _Dumper(config.dump_dir)
    merges: dict[int, Lit] = {}
    attempted: set[tuple[int, int]] = set()
    sm_counter = 0

    def remaining() -> float | None:
        return None if deadline is None else deadline - time.monotonic()

    try:
        pi_words = random_pi_words(miter.num_pis, config.sim_words,
                                   config.seed)
        vals = simulate(miter, pi_words)
        stats["sim_patterns"] = config.sim_words * 64

        # the first simulation round doubles as a cheap refutation attempt
        out = miter.output
        out_word = vals[out.node] ^ (_ONES if out.neg else np.uint64(0))
        hit = np.flatnonzero(out_word)
        if hit.size:
            w = int(hit[0])
            b = int(out_word[w]).bit_length() - 1
            pattern = tuple(int(pi_words[i, w] >> np.uint64(b)) & 1
                            for i in range(miter.num_pis))
            if evaluate(miter, pattern) != 1:
                raise AssertionError("simulation witness failed re-check")
            return finish(CheckResult(COUNTEREXAMPLE, witness=pattern,
                                      engine="sim"))

        classes = build_pe_classes(_signatures(vals))
        rescan = True
        while rescan:
            rescan = False
            for cls in classes:
                rep = cls.representative
                rep_pol = next(p for n, p in cls.members if n == rep)
                for node, pol in cls.members:
                    if node == rep or node in merges:
                        continue
                    if (rep, node) in attempted:
                        continue
                    rem = remaining()
                    if rem is not None and rem <= 0:
                        return finish(CheckResult(UNKNOWN, reason="timeout"))
                    rel = pol != rep_pol
                    sm = extract_submiter(miter, rep, node, merges,
                                          polarity=rel, sm_id=sm_counter)
                    sm_counter += 1
                    o = sm.circuit.output
                    if o.node == 0:
                        if o.neg:  # constant 1: candidates proven distinct
                            attempted.add((rep, node))
                        else:
                            merges[node] = Lit(rep, rel)
                            stats["structural_merges"] += 1
                        continue
                    dumper.dump(sm)
                    budget = config.pair_budget if rem is None else min(
                        config.pair_budget, rem)
                    res = _check_submiter(sm, config, budget)
                    stats["engine_calls"] += 1
                    if res.verdict == EQUIVALENT:
                        merges[node] = Lit(rep, rel)
                        stats["merges"] += 1
                    elif res.verdict == COUNTEREXAMPLE:
                        pattern = _expand_witness(sm, res.witness,
                                                  miter.num_pis)
                        classes = refine_with_cex(miter, classes, pattern)
                        stats["refinements"] += 1
                        attempted.add((rep, node))
                        rescan = True
                        break
                    else:
                        attempted.add((rep, node))
                        stats["unknown_pairs"] += 1
                if rescan:
                    break

        # final obligation: the output against constant zero
        final = extract_submiter(miter, out.node, 0, merges,
                                 polarity=out.neg, sm_id=sm_counter)
        o = final.circuit.output
        if o.node == 0:
            if not o.neg:
                return finish(CheckResult(EQUIVALENT, engine="sweep"))
            # constant 1: every input is a counterexample
            pattern = (0,) * miter.num_pis
            if evaluate(miter, pattern) != 1:
                raise AssertionError("constant-one discharge failed re-check")
            return finish(CheckResult(COUNTEREXAMPLE, witness=pattern,
                                      engine="sweep"))
        dumper.dump(final)
        res = _check_submiter(final, config, remaining())
        stats["engine_calls"] += 1
        if res.verdict == EQUIVALENT:
            return finish(CheckResult(EQUIVALENT, engine=res.engine,
                                      stats=res.stats))
        if res.verdict == COUNTEREXAMPLE:
            pattern = _expand_witness(final, res.witness, miter.num_pis)
            if evaluate(miter, pattern) != 1:
                raise AssertionError("sweep witness failed re-check")
            return finish(CheckResult(COUNTEREXAMPLE, witness=pattern,
                                      engine=res.engine, stats=res.stats))
        return finish(CheckResult(UNKNOWN, reason=res.reason or "timeout",
                                  engine=res.engine, stats=res.stats))
    finally:
        dumper.close()
