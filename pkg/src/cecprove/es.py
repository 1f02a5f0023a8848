"""Exhaustive simulation engine.

The single-output XAG is compiled into a branch-free register program,
then every one of the 2^PI assignments is swept bit-parallel: the low
six inputs ride the 64 lanes of a machine word and the next eight index
a 256-word block, so one inner batch covers 2^14 patterns.  The
remaining high inputs are fixed per chunk; chunks go round-robin to
worker threads and the batch kernel drops the GIL, so workers overlap
on multicore hosts.  Registers are recycled under reference-count
guidance with a LIFO free pool, which keeps the working set hot.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .verdict import COUNTEREXAMPLE, EQUIVALENT, UNKNOWN, CheckResult
from .xag import GateKind, Xag

MAX_ES_PIS = 40  # past this even perfect parallel enumeration is hopeless

OP_LOAD_PI = 0
OP_AND = 1
OP_XOR = 2
OP_OUTPUT = 3

_OP_NAMES = {OP_LOAD_PI: "load", OP_AND: "and", OP_XOR: "xor", OP_OUTPUT: "out"}

EXHAUSTED_ZERO = "EXHAUSTED_ZERO"
ES_COUNTEREXAMPLE = "COUNTEREXAMPLE"
BUDGET_EXCEEDED = "BUDGET_EXCEEDED"


class TooManyInputs(ValueError):
    pass


@dataclass(frozen=True)
class Instr:
    """One register operation; src register -1 denotes the constant-zero rail."""

    op: int
    dst: int = 0
    src0: int = -1
    neg0: bool = False
    src1: int = -1
    neg1: bool = False
    pi: int = 0  # 1-based, LOAD_PI only

    def render(self) -> str:
        if self.op == OP_LOAD_PI:
            return f"r{self.dst} = load pi{self.pi}"
        a = f"{'~' if self.neg0 else ''}r{self.src0}" if self.src0 >= 0 else (
            "const1" if self.neg0 else "const0")
        if self.op == OP_OUTPUT:
            return f"out {a}"
        b = f"{'~' if self.neg1 else ''}r{self.src1}"
        return f"r{self.dst} = {a} {_OP_NAMES[self.op]} {b}"


@dataclass(frozen=True)
class InstrProgram:
    instrs: tuple[Instr, ...]
    num_registers: int
    num_pis: int

    def dump(self) -> str:
        return "\n".join(i.render() for i in self.instrs)


@dataclass
class EsResult:
    verdict: str  # EXHAUSTED_ZERO | COUNTEREXAMPLE | BUDGET_EXCEEDED
    witness: tuple[int, ...] | None = None
    patterns_evaluated: int = 0

    def __post_init__(self) -> None:
        if (self.witness is not None) != (self.verdict == ES_COUNTEREXAMPLE):
            raise ValueError("witness present iff verdict is COUNTEREXAMPLE")


def compile_program(xag: Xag) -> InstrProgram:
    """Schedule the output cone as register code, recycling dead registers.

    Fanin reference counts are decremented as instructions consume them;
    a register whose value hits zero references returns to a LIFO free
    pool, and the destination is allocated afterwards so it may reuse a
    register freed by the same instruction.  PIs load lazily right
    before their first use.
    """
    out = xag.output
    if xag.num_pis > MAX_ES_PIS:
        raise TooManyInputs(f"{xag.num_pis} PIs exceeds the {MAX_ES_PIS} ceiling")
    if out.node == 0:
        return InstrProgram(
            (Instr(OP_OUTPUT, src0=-1, neg0=out.neg),), 0, xag.num_pis)

    needed = [False] * xag.num_nodes
    needed[out.node] = True
    first_gate = xag.first_gate
    for node in range(xag.num_nodes - 1, first_gate - 1, -1):
        if not needed[node]:
            continue
        g = xag.gate_at(node)
        needed[g.in0.node] = True
        needed[g.in1.node] = True

    refs = [0] * xag.num_nodes
    refs[out.node] += 1
    for node in range(first_gate, xag.num_nodes):
        if needed[node]:
            g = xag.gate_at(node)
            refs[g.in0.node] += 1
            refs[g.in1.node] += 1

    instrs: list[Instr] = []
    reg_of: dict[int, int] = {}
    pool: list[int] = []
    peak = 0

    def alloc() -> int:
        nonlocal peak
        if pool:
            return pool.pop()
        peak += 1
        return peak - 1

    def consume(node: int) -> None:
        refs[node] -= 1
        if refs[node] == 0:
            pool.append(reg_of[node])

    def ensure_pi(node: int) -> None:
        if node not in reg_of:
            r = alloc()
            reg_of[node] = r
            instrs.append(Instr(OP_LOAD_PI, dst=r, pi=node))

    for node in range(first_gate, xag.num_nodes):
        if not needed[node]:
            continue
        g = xag.gate_at(node)
        for fan in (g.in0, g.in1):
            if xag.is_pi(fan.node):
                ensure_pi(fan.node)
        r0 = reg_of[g.in0.node]
        r1 = reg_of[g.in1.node]
        consume(g.in0.node)
        consume(g.in1.node)
        d = alloc()
        reg_of[node] = d
        op = OP_AND if g.kind == GateKind.AND else OP_XOR
        instrs.append(Instr(op, dst=d, src0=r0, neg0=g.in0.neg,
                            src1=r1, neg1=g.in1.neg))
    if xag.is_pi(out.node):
        ensure_pi(out.node)
    instrs.append(Instr(OP_OUTPUT, src0=reg_of[out.node], neg0=out.neg))
    return InstrProgram(tuple(instrs), peak, xag.num_pis)


# word patterns giving lane b of PI j (0-based, j < 6) the value (b >> j) & 1
_LANE_MASKS = np.array(
    [0xAAAAAAAAAAAAAAAA, 0xCCCCCCCCCCCCCCCC, 0xF0F0F0F0F0F0F0F0,
     0xFF00FF00FF00FF00, 0xFFFF0000FFFF0000, 0xFFFFFFFF00000000],
    dtype=np.uint64)

_ALL_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


@njit(cache=True, nogil=True)
def _run_batch(ops, dst, s0, m0, s1, m1, pin, lane_masks, regs, nw,
               lane_valid, hi, out_info):
    """Evaluate one batch (nw words x 64 lanes) under fixed high bits.

    Returns 1 with (word, lane) in out_info when the output has a set
    bit, else 0.  m0/m1 are full-word complement masks.
    """
    for i in range(ops.shape[0]):
        op = ops[i]
        if op == 0:
            j = pin[i] - 1
            d = dst[i]
            if j < 6:
                m = lane_masks[j]
                for w in range(nw):
                    regs[d, w] = m
            elif j < 14:
                sh = j - 6
                for w in range(nw):
                    regs[d, w] = np.uint64(0) - np.uint64((w >> sh) & 1)
            else:
                m = np.uint64(0) - np.uint64((hi >> (j - 14)) & 1)
                for w in range(nw):
                    regs[d, w] = m
        elif op == 1:
            d = dst[i]
            a = s0[i]
            b = s1[i]
            ma = m0[i]
            mb = m1[i]
            for w in range(nw):
                regs[d, w] = (regs[a, w] ^ ma) & (regs[b, w] ^ mb)
        elif op == 2:
            d = dst[i]
            a = s0[i]
            b = s1[i]
            ma = m0[i]
            mb = m1[i]
            for w in range(nw):
                regs[d, w] = (regs[a, w] ^ ma) ^ (regs[b, w] ^ mb)
        else:
            a = s0[i]
            ma = m0[i]
            for w in range(nw):
                x = (regs[a, w] ^ ma) & lane_valid
                if x != np.uint64(0):
                    lane = 0
                    while (x >> np.uint64(lane)) & np.uint64(1) == np.uint64(0):
                        lane += 1
                    out_info[0] = w
                    out_info[1] = lane
                    return 1
            return 0
    return 0


def _encode(p: InstrProgram):
    n = len(p.instrs)
    ops = np.zeros(n, dtype=np.int8)
    dst = np.zeros(n, dtype=np.int32)
    s0 = np.zeros(n, dtype=np.int32)
    m0 = np.zeros(n, dtype=np.uint64)
    s1 = np.zeros(n, dtype=np.int32)
    m1 = np.zeros(n, dtype=np.uint64)
    pin = np.zeros(n, dtype=np.int32)
    for i, ins in enumerate(p.instrs):
        ops[i] = ins.op
        dst[i] = ins.dst
        s0[i] = max(ins.src0, 0)
        m0[i] = _ALL_ONES if ins.neg0 else 0
        s1[i] = max(ins.src1, 0)
        m1[i] = _ALL_ONES if ins.neg1 else 0
        pin[i] = ins.pi
    return ops, dst, s0, m0, s1, m1, pin


def run_exhaustive(p: InstrProgram, workers: int = 1,
                   budget: float | None = None, cancel=None) -> EsResult:
    """Sweep all 2^num_pis assignments; first nonzero output bit wins.

    The top bits are fixed per chunk so that the chunk count reaches 8x
    the worker count when enough input bits exist; workers take chunks
    round-robin and poll the stop cell between batches.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    P = p.num_pis
    total = 1 << P

    last = p.instrs[-1]
    if last.src0 < 0:  # constant output, no evaluation needed
        if last.neg0:
            return EsResult(ES_COUNTEREXAMPLE, witness=(0,) * P,
                            patterns_evaluated=0)
        return EsResult(EXHAUSTED_ZERO, patterns_evaluated=total)

    n_lanes = 1 << min(P, 6)
    lane_valid = _ALL_ONES if n_lanes == 64 else np.uint64((1 << n_lanes) - 1)
    nw = 1 << min(max(P - 6, 0), 8)
    batch_patterns = n_lanes * nw
    hi_bits = max(P - 14, 0)
    # fix enough top bits that chunks >= 8x workers, if the width allows
    want = 8 * workers
    k = 0
    while (1 << k) < want and k < hi_bits:
        k += 1
    n_chunks = 1 << k
    batches_per_chunk = 1 << (hi_bits - k)

    args = _encode(p)
    deadline = None if budget is None else time.monotonic() + budget
    stop = np.zeros(1, dtype=np.int64)
    lock = threading.Lock()
    found: list[tuple[int, ...]] = []
    counts = [0] * workers
    ran_out = [False] * workers

    def work(wid: int) -> None:
        regs = np.empty((max(p.num_registers, 1), 256), dtype=np.uint64)
        out_info = np.zeros(2, dtype=np.int64)
        done = 0
        for chunk in range(wid, n_chunks, workers):
            for batch in range(batches_per_chunk):
                if stop[0]:
                    counts[wid] = done
                    return
                if deadline is not None and time.monotonic() >= deadline:
                    ran_out[wid] = True
                    counts[wid] = done
                    return
                if cancel is not None and cancel():
                    ran_out[wid] = True
                    counts[wid] = done
                    return
                hi = batch + (chunk << (hi_bits - k))
                hit = _run_batch(*args, _LANE_MASKS, regs, nw, lane_valid,
                                 hi, out_info)
                done += batch_patterns
                if hit:
                    pattern = (int(out_info[1]) | (int(out_info[0]) << 6)
                               | (hi << 14))
                    with lock:
                        if not found:
                            found.append(
                                tuple((pattern >> i) & 1 for i in range(P)))
                        stop[0] = 1
                    counts[wid] = done
                    return
        counts[wid] = done

    threads = [threading.Thread(target=work, args=(w,))
               for w in range(min(workers, max(n_chunks, 1)))]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    evaluated = sum(counts)
    if found:
        return EsResult(ES_COUNTEREXAMPLE, witness=found[0],
                        patterns_evaluated=evaluated)
    if any(ran_out):
        return EsResult(BUDGET_EXCEEDED, patterns_evaluated=evaluated)
    return EsResult(EXHAUSTED_ZERO, patterns_evaluated=evaluated)


def es_check(sm, workers: int = 1, budget: float | None = None,
             cancel=None) -> CheckResult:
    """Compile and sweep a sub-miter; counterexamples re-verify by evaluation."""
    from .eval import evaluate

    t0 = time.monotonic()
    try:
        prog = compile_program(sm.circuit)
    except TooManyInputs:
        return CheckResult(UNKNOWN, reason="ineligible", engine="es")
    r = run_exhaustive(prog, workers=workers, budget=budget, cancel=cancel)
    stats = {"patterns": r.patterns_evaluated,
             "registers": prog.num_registers,
             "wall_time": time.monotonic() - t0}
    if r.verdict == EXHAUSTED_ZERO:
        return CheckResult(EQUIVALENT, engine="es", stats=stats)
    if r.verdict == ES_COUNTEREXAMPLE:
        assert r.witness is not None
        if evaluate(sm.circuit, r.witness) != 1:
            raise AssertionError("exhaustive-simulation witness failed re-check")
        return CheckResult(COUNTEREXAMPLE, witness=r.witness, engine="es",
                           stats=stats)
    reason = "cancelled" if (cancel is not None and cancel()) else "timeout"
    return CheckResult(UNKNOWN, reason=reason, engine="es", stats=stats)
