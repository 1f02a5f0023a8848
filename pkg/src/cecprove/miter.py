"""Miter construction and benchmark circuit generators.

The miter XORs corresponding outputs of the two circuits and ORs the
results (OR written as complemented AND of complemented terms, keeping
the two-operator algebra).  Multiplier generators provide two unsigned
architectures that compute identical functions through very different
structure: "array" accumulates partial-product rows one at a time, each
add fully propagating its carries, while "diagonal" keeps the running
product in carry-save form.  Both finish with plain ripple-carry adders;
only the accumulation order differs.
"""

from __future__ import annotations

import random

from . import eval as xeval
from .xag import FALSE, Gate, GateKind, Lit, Xag, XagBuilder


class InterfaceMismatch(ValueError):
    pass


class WidthOutOfRange(ValueError):
    pass


def copy_into(b: XagBuilder, xag: Xag, pi_lits: list[Lit] | None = None) -> list[Lit]:
    """Replay a circuit into a builder, returning its mapped output literals."""
    lit_of: list[Lit] = [FALSE]
    if pi_lits is None:
        pi_lits = [b.pi(i) for i in range(1, xag.num_pis + 1)]
    lit_of.extend(pi_lits)
    for g in xag.gates:
        a = Lit(lit_of[g.in0.node].node, lit_of[g.in0.node].neg != g.in0.neg)
        c = Lit(lit_of[g.in1.node].node, lit_of[g.in1.node].neg != g.in1.neg)
        lit_of.append(b.add_and(a, c) if g.kind == GateKind.AND else b.add_xor(a, c))
    return [Lit(lit_of[o.node].node, lit_of[o.node].neg != o.neg) for o in xag.outputs]


def or_reduce(b: XagBuilder, lits: list[Lit]) -> Lit:
    """Balanced OR tree; empty input is constant FALSE."""
    if not lits:
        return FALSE
    while len(lits) > 1:
        lits = [b.add_or(lits[k], lits[k + 1]) if k + 1 < len(lits) else lits[k]
                for k in range(0, len(lits), 2)]
    return lits[0]


def build_miter(a: Xag, c: Xag) -> Xag:
    if a.num_pis != c.num_pis:
        raise InterfaceMismatch(f"PI counts differ: {a.num_pis} vs {c.num_pis}")
    if len(a.outputs) != len(c.outputs):
        raise InterfaceMismatch(
            f"output counts differ: {len(a.outputs)} vs {len(c.outputs)}")
    b = XagBuilder(a.num_pis)
    outs_a = copy_into(b, a)
    outs_c = copy_into(b, c)
    diffs = [b.add_xor(x, y) for x, y in zip(outs_a, outs_c)]
    return b.finish([or_reduce(b, diffs)])


def _full_add(b: XagBuilder, x: Lit, y: Lit, cin: Lit) -> tuple[Lit, Lit]:
    t = b.add_xor(x, y)
    s = b.add_xor(t, cin)
    carry = b.add_or(b.add_and(x, y), b.add_and(t, cin))
    return s, carry


def _ripple_add(b: XagBuilder, xs: list[Lit], ys: list[Lit]) -> list[Lit]:
    width = max(len(xs), len(ys))
    xs = xs + [FALSE] * (width - len(xs))
    ys = ys + [FALSE] * (width - len(ys))
    out, carry = [], FALSE
    for x, y in zip(xs, ys):
        s, carry = _full_add(b, x, y, carry)
        out.append(s)
    out.append(carry)
    return out


def _mult_array(b: XagBuilder, aa: list[Lit], bb: list[Lit]) -> list[Lit]:
    n = len(aa)
    acc = [b.add_and(aa[j], bb[0]) for j in range(n)]
    for i in range(1, n):
        row = [FALSE] * i + [b.add_and(aa[j], bb[i]) for j in range(n)]
        acc = _ripple_add(b, acc, row)
    return acc[: 2 * n]


def _mult_diagonal(b: XagBuilder, aa: list[Lit], bb: list[Lit]) -> list[Lit]:
    """Carry-save accumulation: each row's carries shift one diagonal over.

    The running product is held as a sum/carry pair; every partial-product
    row is folded in with a rank of full adders, and only the final merge
    propagates carries (through the shared ripple-carry adder).
    """
    n = len(aa)
    width = 2 * n
    sums = [FALSE] * width
    carries = [FALSE] * width
    for i in range(n):
        row = [FALSE] * width
        for j in range(n):
            row[i + j] = b.add_and(aa[j], bb[i])
        next_s = [FALSE] * width
        next_c = [FALSE] * width
        for k in range(width):
            s, c = _full_add(b, sums[k], carries[k], row[k])
            next_s[k] = s
            if k + 1 < width:
                next_c[k + 1] = c
        sums, carries = next_s, next_c
    return _ripple_add(b, sums, carries)[:width]


_ARCHS = {"array": _mult_array, "diagonal": _mult_diagonal}


def gen_multiplier(width: int, arch: str) -> Xag:
    """Unsigned width x width multiplier, 2*width product outputs, LSB first.

    PIs 1..width are operand A (LSB first), width+1..2*width operand B.
    """
    if not 2 <= width <= 32:
        raise WidthOutOfRange(f"width {width} outside [2, 32]")
    if arch not in _ARCHS:
        raise ValueError(f"unknown architecture {arch!r}")
    b = XagBuilder(2 * width)
    aa = [b.pi(i) for i in range(1, width + 1)]
    bb = [b.pi(i) for i in range(width + 1, 2 * width + 1)]
    return b.finish(_ARCHS[arch](b, aa, bb))


def gen_multiplier_miter(width: int, arch_a: str, arch_b: str) -> Xag:
    return build_miter(gen_multiplier(width, arch_a), gen_multiplier(width, arch_b))


def mutate(xag: Xag, seed: int, check_pis: int = 16) -> Xag:
    """Flip one gate's kind (AND <-> XOR), guaranteeing a functional change.

    When the circuit has at most check_pis inputs the mutation is verified
    against the truth table and re-drawn until the output function really
    differs; beyond that the structural change is returned unchecked.
    """
    if not xag.gates:
        raise ValueError("no gates to mutate")
    rng = random.Random(seed)
    verify = xag.num_pis <= check_pis and len(xag.outputs) == 1
    before = xeval.truth_table(xag) if verify else None
    for _ in range(10 * len(xag.gates)):
        idx = rng.randrange(len(xag.gates))
        g = xag.gates[idx]
        flipped = Gate(GateKind.XOR if g.kind == GateKind.AND else GateKind.AND,
                       g.in0, g.in1)
        mutant = Xag(xag.num_pis, xag.gates[:idx] + (flipped,) + xag.gates[idx + 1:],
                     xag.outputs)
        if not verify or xeval.truth_table(mutant) != before:
            return mutant
    raise ValueError("could not find a function-changing mutation")
