"""Direct circuit evaluation: the reference oracle for every engine.

Two paths: a scalar per-input evaluator used to verify witnesses, and a
word-parallel exhaustive evaluator over Python big ints used as the
truth-table oracle in tests.  Neither shares code with the compiled
simulation engine, the BDD package, or the CNF pipeline.
"""

from __future__ import annotations

from typing import Sequence

from .xag import GateKind, Lit, Xag


def parse_bits(bits: str | Sequence[int]) -> list[int]:
    if isinstance(bits, str):
        return [1 if c == "1" else 0 for c in bits]
    return [1 if v else 0 for v in bits]


def evaluate(xag: Xag, bits: str | Sequence[int]) -> int:
    """Evaluate the single output on one input assignment (bit i -> PI i+1)."""
    values = parse_bits(bits)
    if len(values) != xag.num_pis:
        raise ValueError(f"expected {xag.num_pis} input bits, got {len(values)}")
    vals = [0] * xag.num_nodes
    for i in range(xag.num_pis):
        vals[1 + i] = values[i]
    base = xag.first_gate
    for i, g in enumerate(xag.gates):
        a = vals[g.in0.node] ^ int(g.in0.neg)
        b = vals[g.in1.node] ^ int(g.in1.neg)
        vals[base + i] = (a & b) if g.kind == GateKind.AND else (a ^ b)
    out = xag.output
    return vals[out.node] ^ int(out.neg)


def evaluate_all(xag: Xag, bits: str | Sequence[int]) -> list[int]:
    """Evaluate every output on one input assignment (bit i -> PI i+1)."""
    values = parse_bits(bits)
    if len(values) != xag.num_pis:
        raise ValueError(f"expected {xag.num_pis} input bits, got {len(values)}")
    vals = [0] * xag.num_nodes
    for i in range(xag.num_pis):
        vals[1 + i] = values[i]
    base = xag.first_gate
    for i, g in enumerate(xag.gates):
        a = vals[g.in0.node] ^ int(g.in0.neg)
        b = vals[g.in1.node] ^ int(g.in1.neg)
        vals[base + i] = (a & b) if g.kind == GateKind.AND else (a ^ b)
    return [vals[o.node] ^ int(o.neg) for o in xag.outputs]


def pi_pattern(num_pis: int, pi_index: int) -> int:
    """Exhaustive-enumeration pattern for one PI as a 2^num_pis-bit int.

    Bit p of the pattern is the value of PI ``pi_index`` (1-based) on
    input row p, where row p assigns PI j the bit (p >> (j-1)) & 1.
    """
    j = pi_index - 1
    block = ((1 << (1 << j)) - 1) << (1 << j)
    total = 1 << num_pis
    reps = total // (1 << (j + 1))
    period = 1 << (j + 1)
    return block * (((1 << total) - 1) // ((1 << period) - 1)) if reps > 1 else block


def truth_table(xag: Xag, max_pis: int = 22) -> int:
    """All 2^num_pis output values packed into one int (bit p = row p)."""
    if xag.num_pis > max_pis:
        raise ValueError(f"truth table over {xag.num_pis} PIs exceeds cap {max_pis}")
    total = 1 << xag.num_pis
    mask = (1 << total) - 1
    vals = [0] * xag.num_nodes
    for i in range(1, xag.num_pis + 1):
        vals[i] = pi_pattern(xag.num_pis, i)
    base = xag.first_gate
    for i, g in enumerate(xag.gates):
        a = vals[g.in0.node] ^ (mask if g.in0.neg else 0)
        b = vals[g.in1.node] ^ (mask if g.in1.neg else 0)
        vals[base + i] = (a & b) if g.kind == GateKind.AND else (a ^ b)
    out = xag.output
    return vals[out.node] ^ (mask if out.neg else 0)


def first_one_row(table: int, num_pis: int) -> list[int] | None:
    """Decode the lowest set bit of a truth table into an input assignment."""
    if table == 0:
        return None
    p = (table & -table).bit_length() - 1
    return [(p >> j) & 1 for j in range(num_pis)]


def table_of_node(xag: Xag, lit: Lit, max_pis: int = 22) -> int:
    """Truth table of an arbitrary literal (used by transformation tests)."""
    probe = Xag(xag.num_pis, xag.gates, (lit,))
    return truth_table(probe, max_pis)
