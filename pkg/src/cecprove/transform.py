"""Structural transformations: XOR recovery, cones, constant propagation.

All transformations rebuild through XagBuilder, so structural hashing and
local simplification apply again; functions of the outputs are preserved
(propagate_constants preserves the cofactor, condition the conjunction).
"""

from __future__ import annotations

from typing import Sequence

from .xag import (FALSE, TRUE, ContradictoryCube, Cube, Gate, GateKind, Lit,
                  Xag, XagBuilder, check_cube)


def _reachable(xag: Xag, roots: Sequence[Lit]) -> set[int]:
    seen: set[int] = {0}
    stack = [lit.node for lit in roots]
    while stack:
        n = stack.pop()
        if n in seen:
            continue
        seen.add(n)
        if not xag.is_pi(n):
            g = xag.gate_at(n)
            stack.append(g.in0.node)
            stack.append(g.in1.node)
    return seen


def _rebuild(xag: Xag, roots: Sequence[Lit], keep_all_pis: bool,
             ) -> tuple[Xag, tuple[int, ...], dict[int, Lit]]:
    """Rebuild the sub-graph feeding roots.

    Returns (new xag with outputs = mapped roots, original PI index per new
    PI, old-node -> new-literal map for every retained node).
    """
    alive = _reachable(xag, roots)
    if keep_all_pis:
        pi_map = tuple(range(1, xag.num_pis + 1))
    else:
        pi_map = tuple(i for i in range(1, xag.num_pis + 1) if i in alive)
    b = XagBuilder(len(pi_map))
    lit_of: dict[int, Lit] = {0: FALSE}
    for new_i, old_i in enumerate(pi_map, start=1):
        lit_of[old_i] = Lit(new_i)

    def remap(lit: Lit) -> Lit:
        base = lit_of[lit.node]
        return Lit(base.node, base.neg != lit.neg)

    for i, g in enumerate(xag.gates):
        node = xag.first_gate + i
        if node not in alive:
            continue
        if g.kind == GateKind.AND:
            lit_of[node] = b.add_and(remap(g.in0), remap(g.in1))
        else:
            lit_of[node] = b.add_xor(remap(g.in0), remap(g.in1))
    return b.finish([remap(r) for r in roots]), pi_map, lit_of


def tfi_cone(xag: Xag, roots: Sequence[Lit]) -> tuple[Xag, tuple[int, ...]]:
    """Sub-graph induced by the fanin cones of roots, PIs renumbered densely.

    The second element maps each new PI (position k holds the original
    index of PI k+1) back into the parent circuit.
    """
    cone, pi_map, _ = _rebuild(xag, roots, keep_all_pis=False)
    return cone, pi_map


def select_outputs(xag: Xag, indices: Sequence[int]) -> Xag:
    """Same circuit restricted to a subset of its outputs; PIs untouched."""
    roots = [xag.outputs[i] for i in indices]
    return _rebuild(xag, roots, keep_all_pis=True)[0]


def detect_xors(xag: Xag) -> Xag:
    """Fold the three-AND XOR pattern back into XOR gates.

    A gate g = AND(~n1, ~n2) where n1 = AND(u, v) and n2's fanins equal
    {~u, ~v} computes u XOR v regardless of the polarities inside u and v.
    Interior nodes losing their last fanout are dropped.
    """
    is_and = [g.kind == GateKind.AND for g in xag.gates]
    b = XagBuilder(xag.num_pis)
    lit_of: dict[int, Lit] = {0: FALSE}
    for i in range(1, xag.num_pis + 1):
        lit_of[i] = Lit(i)

    def remap(lit: Lit) -> Lit:
        base = lit_of[lit.node]
        return Lit(base.node, base.neg != lit.neg)

    def and_fanins(node: int) -> tuple[Lit, Lit] | None:
        if xag.is_pi(node) or node == 0:
            return None
        if not is_and[node - xag.first_gate]:
            return None
        g = xag.gate_at(node)
        return g.in0, g.in1

    for i, g in enumerate(xag.gates):
        node = xag.first_gate + i
        folded = None
        if g.kind == GateKind.AND and g.in0.neg and g.in1.neg:
            f1 = and_fanins(g.in0.node)
            f2 = and_fanins(g.in1.node)
            if f1 and f2 and {lit.pack() for lit in f2} == {(~f1[0]).pack(), (~f1[1]).pack()}:
                folded = b.add_xor(remap(f1[0]), remap(f1[1]))
        if folded is None:
            if g.kind == GateKind.AND:
                folded = b.add_and(remap(g.in0), remap(g.in1))
            else:
                folded = b.add_xor(remap(g.in0), remap(g.in1))
        lit_of[node] = folded
    rough = b.finish([remap(o) for o in xag.outputs])
    return _rebuild(rough, rough.outputs, keep_all_pis=True)[0]


def propagate_constants(xag: Xag, cube: Cube) -> tuple[Xag, dict[int, Lit]]:
    """Cofactor the circuit under the cube (pure substitution).

    Assigned nodes are replaced by constants everywhere downstream; the
    simplification rules of the builder (x AND 0 = 0, x XOR 1 = NOT x, ...)
    then shrink the graph, and dead gates are dropped.  The PI space is
    unchanged.  Returns the reduced circuit plus a map from old node index
    to its new literal (absent when the node died).

    Raises ContradictoryCube when the cube assigns both polarities.
    """
    assign = check_cube(cube, xag.num_nodes)
    b = XagBuilder(xag.num_pis)
    lit_of: dict[int, Lit] = {0: FALSE}
    for i in range(1, xag.num_pis + 1):
        lit_of[i] = TRUE if assign.get(i) else FALSE if i in assign else Lit(i)

    def remap(lit: Lit) -> Lit:
        base = lit_of[lit.node]
        return Lit(base.node, base.neg != lit.neg)

    for i, g in enumerate(xag.gates):
        node = xag.first_gate + i
        if node in assign:
            lit_of[node] = TRUE if assign[node] else FALSE
            continue
        if g.kind == GateKind.AND:
            lit_of[node] = b.add_and(remap(g.in0), remap(g.in1))
        else:
            lit_of[node] = b.add_xor(remap(g.in0), remap(g.in1))
    rough = b.finish([remap(o) for o in xag.outputs])
    pruned, _, prune_map = _rebuild(rough, rough.outputs, keep_all_pis=True)
    node_map: dict[int, Lit] = {}
    for old, mid in lit_of.items():
        if mid.node in prune_map:
            final = prune_map[mid.node]
            node_map[old] = Lit(final.node, final.neg != mid.neg)
    return pruned, node_map


def condition(xag: Xag, cube: Cube) -> Xag:
    """Conjoin the cube into the single output: result == output AND cube.

    Unlike propagate_constants this is an exact function transformer even
    for cube literals on interior gates: the substituted graph is
    strengthened with one consistency term per assigned gate (its rebuilt
    function forced to the assigned value), so satisfying assignments of
    the result are exactly those of the parent that also satisfy the cube.
    """
    out = xag.output
    assign = check_cube(cube, xag.num_nodes)
    b = XagBuilder(xag.num_pis)
    lit_of: dict[int, Lit] = {0: FALSE}
    terms: list[Lit] = []
    for i in range(1, xag.num_pis + 1):
        if i in assign:
            lit_of[i] = TRUE if assign[i] else FALSE
            terms.append(Lit(i, not assign[i]))
        else:
            lit_of[i] = Lit(i)

    def remap(lit: Lit) -> Lit:
        base = lit_of[lit.node]
        return Lit(base.node, base.neg != lit.neg)

    for i, g in enumerate(xag.gates):
        node = xag.first_gate + i
        if g.kind == GateKind.AND:
            rebuilt = b.add_and(remap(g.in0), remap(g.in1))
        else:
            rebuilt = b.add_xor(remap(g.in0), remap(g.in1))
        if node in assign:
            terms.append(rebuilt if assign[node] else ~rebuilt)
            lit_of[node] = TRUE if assign[node] else FALSE
        else:
            lit_of[node] = rebuilt
    terms.append(remap(out))
    while len(terms) > 1:  # balanced AND reduction
        terms = [b.add_and(terms[k], terms[k + 1]) if k + 1 < len(terms) else terms[k]
                 for k in range(0, len(terms), 2)]
    rough = b.finish([terms[0]])
    return _rebuild(rough, rough.outputs, keep_all_pis=True)[0]
