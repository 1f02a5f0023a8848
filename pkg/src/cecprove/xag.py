"""XOR-AND-inverter graphs with complemented edges.

Node indexing convention: node 0 is the constant FALSE, primary inputs
occupy 1..num_pis, gate nodes follow in topological order.  A literal is
a node index plus a complement flag, so Lit(0, True) denotes TRUE.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Iterable, NamedTuple, Sequence


class GateKind(IntEnum):
    AND = 0
    XOR = 1


class Lit(NamedTuple):
    node: int
    neg: bool = False

    def __invert__(self) -> "Lit":
        return Lit(self.node, not self.neg)

    def pack(self) -> int:
        return self.node * 2 + int(self.neg)

    @staticmethod
    def unpack(packed: int) -> "Lit":
        return Lit(packed >> 1, bool(packed & 1))


FALSE = Lit(0, False)
TRUE = Lit(0, True)


class Gate(NamedTuple):
    kind: GateKind
    in0: Lit
    in1: Lit


# A cube is a conjunction of literals over node indices.
Cube = tuple[Lit, ...]


class ContradictoryCube(ValueError):
    """Cube assigns both polarities of the same node."""


def check_cube(cube: Iterable[Lit], num_nodes: int) -> dict[int, bool]:
    """Validate a cube and return it as a node -> value map.

    The assigned value of Lit(v, neg) is ``not neg`` (the literal must
    hold, i.e. the node equals 1 when the literal is positive).
    """
    values: dict[int, bool] = {}
    for lit in cube:
        if not 0 < lit.node < num_nodes:
            raise ValueError(f"cube literal references unknown node {lit.node}")
        value = not lit.neg
        if values.get(lit.node, value) != value:
            raise ContradictoryCube(f"node {lit.node} assigned both polarities")
        values[lit.node] = value
    return values


@dataclass(frozen=True)
class Xag:
    """Immutable XOR-AND graph; safe to share across workers."""

    num_pis: int
    gates: tuple[Gate, ...]
    outputs: tuple[Lit, ...]

    @property
    def num_gates(self) -> int:
        return len(self.gates)

    @property
    def num_nodes(self) -> int:
        """Total node count including the constant node 0."""
        return 1 + self.num_pis + len(self.gates)

    @property
    def first_gate(self) -> int:
        return 1 + self.num_pis

    @property
    def output(self) -> Lit:
        if len(self.outputs) != 1:
            raise ValueError(f"expected single output, found {len(self.outputs)}")
        return self.outputs[0]

    def is_pi(self, node: int) -> bool:
        return 1 <= node <= self.num_pis

    def gate_at(self, node: int) -> Gate:
        if node < self.first_gate:  # a negative index would wrap silently
            raise ValueError(f"node {node} is not a gate")
        return self.gates[node - self.first_gate]

    def validate(self) -> None:
        """Check topological ordering and literal sanity; raises on violation."""
        for i, g in enumerate(self.gates):
            node = self.first_gate + i
            for lit in (g.in0, g.in1):
                if not 0 <= lit.node < node:
                    raise ValueError(f"gate {node} fanin {lit.node} not earlier")
        for lit in self.outputs:
            if not 0 <= lit.node < self.num_nodes:
                raise ValueError(f"output references unknown node {lit.node}")

    def fanout_counts(self) -> list[int]:
        """Fanout of every node (each complemented edge counted once); outputs count."""
        counts = [0] * self.num_nodes
        for g in self.gates:
            counts[g.in0.node] += 1
            counts[g.in1.node] += 1
        for lit in self.outputs:
            counts[lit.node] += 1
        return counts


class XagBuilder:
    """Constructs Xags with structural hashing and local simplification.

    Hashing key is (kind, min fanin, max fanin) after polarity
    normalization: XOR fanins are stored positive with the parity folded
    into the returned literal, so complement variants of the same
    function share one node.
    """

    def __init__(self, num_pis: int):
        self.num_pis = num_pis
        self._gates: list[Gate] = []
        self._strash: dict[tuple[int, int, int], int] = {}

    def pi(self, index: int) -> Lit:
        if not 1 <= index <= self.num_pis:
            raise ValueError(f"PI index {index} out of range")
        return Lit(index, False)

    @property
    def num_nodes(self) -> int:
        return 1 + self.num_pis + len(self._gates)

    def _emit(self, kind: GateKind, a: Lit, b: Lit) -> Lit:
        if b.pack() < a.pack():
            a, b = b, a
        key = (int(kind), a.pack(), b.pack())
        node = self._strash.get(key)
        if node is None:
            node = self.num_nodes
            self._gates.append(Gate(kind, a, b))
            self._strash[key] = node
        return Lit(node, False)

    def add_and(self, a: Lit, b: Lit) -> Lit:
        if a == FALSE or b == FALSE:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE:
            return a
        if a == b:
            return a
        if a.node == b.node:  # complementary pair
            return FALSE
        return self._emit(GateKind.AND, a, b)

    def add_xor(self, a: Lit, b: Lit) -> Lit:
        if a.node == 0:
            return ~b if a.neg else b
        if b.node == 0:
            return ~a if b.neg else a
        if a == b:
            return FALSE
        if a.node == b.node:
            return TRUE
        out_neg = a.neg != b.neg
        lit = self._emit(GateKind.XOR, Lit(a.node), Lit(b.node))
        return Lit(lit.node, out_neg)

    def add_or(self, a: Lit, b: Lit) -> Lit:
        return ~self.add_and(~a, ~b)

    def finish(self, outputs: Sequence[Lit]) -> Xag:
        return Xag(self.num_pis, tuple(self._gates), tuple(outputs))


def random_xag(num_pis: int, num_gates: int, seed: int) -> Xag:
    """Seeded random single-output Xag; builder simplification may shrink it."""
    rng = random.Random(seed)
    b = XagBuilder(num_pis)
    lits = [b.pi(i) for i in range(1, num_pis + 1)]
    for _ in range(num_gates):
        a = Lit(rng.choice(lits).node, rng.random() < 0.5)
        c = Lit(rng.choice(lits).node, rng.random() < 0.5)
        lit = b.add_xor(a, c) if rng.random() < 0.45 else b.add_and(a, c)
        lits.append(lit)
    out = lits[-1] if rng.random() < 0.9 else rng.choice(lits)
    return b.finish([Lit(out.node, out.neg != (rng.random() < 0.5))])
