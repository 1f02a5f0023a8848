"""Tseitin encoding of single-output XAGs.

One CNF variable per PI and per gate, numbered by node index.  AND gates
cost 3 clauses, XOR gates 4; asserting the output adds one unit clause.
The formula is satisfiable iff some input drives the output to 1.
"""

from __future__ import annotations

from typing import NamedTuple

from .xag import GateKind, Lit, Xag


class CnfFormula(NamedTuple):
    num_vars: int
    clauses: tuple[tuple[int, ...], ...]


def _enc(lit: Lit) -> int:
    return -lit.node if lit.neg else lit.node


def tseitin(xag: Xag, assert_output_true: bool = True) -> CnfFormula:
    out = xag.output
    num_vars = xag.num_pis + xag.num_gates
    clauses: list[tuple[int, ...]] = []
    for i, g in enumerate(xag.gates):
        z = xag.first_gate + i
        x, y = _enc(g.in0), _enc(g.in1)
        if g.kind == GateKind.AND:
            clauses.append((-z, x))
            clauses.append((-z, y))
            clauses.append((z, -x, -y))
        else:
            clauses.append((-z, x, y))
            clauses.append((-z, -x, -y))
            clauses.append((z, -x, y))
            clauses.append((z, x, -y))
    if assert_output_true:
        if out.node == 0:
            if out.neg:  # constant TRUE: nothing to assert
                pass
            else:  # constant FALSE: force a contradiction without an empty clause
                num_vars = max(num_vars, 1)
                clauses.append((1,))
                clauses.append((-1,))
        else:
            clauses.append((_enc(out),))
    return CnfFormula(num_vars, tuple(clauses))
