import pytest
from hypothesis import given, settings, strategies as st

from cecprove.eval import evaluate, truth_table
from cecprove.xag import (FALSE, TRUE, ContradictoryCube, GateKind, Lit, Xag,
                          XagBuilder, check_cube, random_xag)


def test_lit_invert_and_pack():
    a = Lit(3)
    assert (~a).node == 3 and (~a).neg
    assert ~~a == a
    assert a.pack() != (~a).pack()


def test_constants():
    assert FALSE == Lit(0, False)
    assert TRUE == Lit(0, True)
    assert TRUE == ~FALSE


def test_builder_basic_and():
    b = XagBuilder(2)
    o = b.add_and(b.pi(1), b.pi(2))
    x = b.finish([o])
    assert x.num_pis == 2
    assert x.num_gates == 1
    assert [evaluate(x, f"{i:02b}"[::-1]) for i in range(4)] == [0, 0, 0, 1]


def test_builder_strash_dedupes():
    b = XagBuilder(2)
    o1 = b.add_and(b.pi(1), b.pi(2))
    o2 = b.add_and(b.pi(2), b.pi(1))
    assert o1 == o2
    assert b.finish([o1]).num_gates == 1


def test_builder_local_simplification():
    b = XagBuilder(2)
    p = b.pi(1)
    assert b.add_and(p, FALSE) == FALSE
    assert b.add_and(p, TRUE) == p
    assert b.add_and(p, p) == p
    assert b.add_and(p, ~p) == FALSE
    assert b.add_xor(p, FALSE) == p
    assert b.add_xor(p, p) == FALSE
    assert b.add_xor(p, ~p) == TRUE


def test_xor_polarity_folding():
    # XOR fanins are stored positive; parity lands on the returned literal
    b = XagBuilder(2)
    g1 = b.add_xor(b.pi(1), b.pi(2))
    g2 = b.add_xor(~b.pi(1), b.pi(2))
    assert g1.node == g2.node
    assert g1.neg != g2.neg


def test_or_via_demorgan():
    b = XagBuilder(2)
    o = b.add_or(b.pi(1), b.pi(2))
    x = b.finish([o])
    assert [evaluate(x, f"{i:02b}"[::-1]) for i in range(4)] == [0, 1, 1, 1]


def test_validate_accepts_builder_output():
    random_xag(5, 40, seed=1).validate()


def test_gate_at_and_is_pi():
    b = XagBuilder(2)
    o = b.add_and(b.pi(1), b.pi(2))
    x = b.finish([o])
    assert x.is_pi(1) and x.is_pi(2) and not x.is_pi(o.node)
    assert x.gate_at(o.node).kind == GateKind.AND
    with pytest.raises(ValueError):
        x.gate_at(1)


def test_fanout_counts():
    b = XagBuilder(2)
    g = b.add_xor(b.pi(1), b.pi(2))
    o = b.add_and(g, b.pi(1))
    x = b.finish([o])
    fo = x.fanout_counts()
    assert fo[1] == 2  # feeds the XOR and the AND
    assert fo[g.node] == 1


def test_check_cube():
    assert check_cube((Lit(3, False), Lit(5, True)), 8) == {3: True, 5: False}
    with pytest.raises(ContradictoryCube):
        check_cube((Lit(3, False), Lit(3, True)), 8)
    with pytest.raises(ValueError):
        check_cube((Lit(9, False),), 8)


def test_random_xag_deterministic():
    a = random_xag(6, 50, seed=7)
    b = random_xag(6, 50, seed=7)
    assert a == b
    assert a != random_xag(6, 50, seed=8)


@given(st.integers(2, 8), st.integers(1, 80), st.integers(0, 500))
@settings(max_examples=40, deadline=None)
def test_random_xag_is_well_formed(num_pis, num_gates, seed):
    x = random_xag(num_pis, num_gates, seed)
    x.validate()
    assert x.num_pis == num_pis
    assert len(x.outputs) == 1
    assert x.num_gates <= num_gates  # strash may fold some away


@given(st.integers(0, 200))
@settings(max_examples=25, deadline=None)
def test_builder_never_changes_function_under_replay(seed):
    # replaying a circuit through a fresh builder is semantics-preserving
    x = random_xag(5, 30, seed)
    b = XagBuilder(x.num_pis)
    lit_of = [FALSE] + [b.pi(i) for i in range(1, x.num_pis + 1)]
    for g in x.gates:
        a0 = Lit(lit_of[g.in0.node].node, lit_of[g.in0.node].neg != g.in0.neg)
        a1 = Lit(lit_of[g.in1.node].node, lit_of[g.in1.node].neg != g.in1.neg)
        lit_of.append(b.add_and(a0, a1) if g.kind == GateKind.AND
                      else b.add_xor(a0, a1))
    o = x.output
    y = b.finish([Lit(lit_of[o.node].node, lit_of[o.node].neg != o.neg)])
    assert truth_table(x) == truth_table(y)
