import pytest
from hypothesis import given, settings, strategies as st

from cecprove.es import (ES_COUNTEREXAMPLE, EXHAUSTED_ZERO, OP_AND, OP_LOAD_PI,
                         OP_OUTPUT, OP_XOR, TooManyInputs, compile_program,
                         es_check, run_exhaustive)
from cecprove.eval import evaluate, truth_table
from cecprove.miter import build_miter, gen_multiplier_miter, mutate
from cecprove.sweep import SubMiter
from cecprove.verdict import COUNTEREXAMPLE, EQUIVALENT, UNKNOWN
from cecprove.xag import Xag, XagBuilder, random_xag


def as_sm(x: Xag) -> SubMiter:
    return SubMiter(circuit=x, origin=(0, 0), merged_history={},
                    pi_map=tuple(range(1, x.num_pis + 1)))


def test_compile_register_reuse():
    # a long AND chain needs few registers: operands die immediately
    b = XagBuilder(8)
    acc = b.pi(1)
    for i in range(2, 9):
        acc = b.add_and(acc, b.pi(i))
    p = compile_program(b.finish([acc]))
    assert p.num_registers <= 3
    kinds = [i.op for i in p.instrs]
    assert kinds.count(OP_LOAD_PI) == 8
    assert kinds.count(OP_AND) == 7
    assert kinds[-1] == OP_OUTPUT


def test_compile_rejects_oversized_inputs():
    b = XagBuilder(41)
    o = b.add_and(b.pi(1), b.pi(2))
    with pytest.raises(TooManyInputs):
        compile_program(b.finish([o]))


def test_exhaustive_zero_on_constant_false_cone():
    b = XagBuilder(4)
    g = b.add_and(b.pi(1), ~b.pi(1))
    r = run_exhaustive(compile_program(b.finish([g])))
    assert r.verdict == EXHAUSTED_ZERO
    assert r.patterns_evaluated == 16


def test_counterexample_with_witness():
    b = XagBuilder(4)
    g = b.add_and(b.add_and(b.pi(1), b.pi(2)),
                  b.add_and(b.pi(3), b.pi(4)))
    x = b.finish([g])
    r = run_exhaustive(compile_program(x))
    assert r.verdict == ES_COUNTEREXAMPLE
    assert evaluate(x, r.witness) == 1


@given(st.integers(0, 300))
@settings(max_examples=25, deadline=None)
def test_matches_truth_table(seed):
    x = random_xag(6, 40, seed)
    r = run_exhaustive(compile_program(x))
    if truth_table(x) == 0:
        assert r.verdict == EXHAUSTED_ZERO
    else:
        assert r.verdict == ES_COUNTEREXAMPLE
        assert evaluate(x, r.witness) == 1


@given(st.integers(0, 100), st.sampled_from([2, 3, 4]))
@settings(max_examples=10, deadline=None)
def test_workers_agree_on_verdict(seed, workers):
    x = random_xag(7, 50, seed)
    a = run_exhaustive(compile_program(x), workers=1)
    b = run_exhaustive(compile_program(x), workers=workers)
    assert a.verdict == b.verdict
    if b.witness is not None:
        assert evaluate(x, b.witness) == 1


def test_es_check_equivalent():
    m = gen_multiplier_miter(3, "array", "diagonal")
    r = es_check(as_sm(m))
    assert r.verdict == EQUIVALENT
    assert r.engine == "es"
    assert r.stats["patterns"] == 1 << m.num_pis


def test_es_check_counterexample():
    a = random_xag(6, 40, seed=2)
    m = build_miter(a, mutate(a, seed=4))
    if truth_table(m) == 0:
        pytest.skip("mutation cancelled out")
    r = es_check(as_sm(m))
    assert r.verdict == COUNTEREXAMPLE
    assert evaluate(m, r.witness) == 1


def test_es_check_ineligible():
    b = XagBuilder(41)
    o = b.add_and(b.pi(1), b.pi(41))
    r = es_check(as_sm(b.finish([o])))
    assert r.verdict == UNKNOWN and r.reason == "ineligible"


def test_es_check_budget():
    m = gen_multiplier_miter(11, "array", "diagonal")  # 22 PIs: 4M patterns
    r = es_check(as_sm(m), budget=0.0)
    assert r.verdict == UNKNOWN and r.reason == "timeout"


def test_register_compression_on_multiplier():
    m = gen_multiplier_miter(6, "array", "diagonal")
    p = compile_program(m)
    # liveness analysis keeps the register file far below the gate count
    assert p.num_registers / m.num_gates < 0.2
