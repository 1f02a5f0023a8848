import random

from hypothesis import given, settings, strategies as st

from cecprove.cnf import tseitin
from cecprove.eval import evaluate, truth_table
from cecprove.xag import FALSE, TRUE, XagBuilder, random_xag


def brute_force(cnf):
    """Reference SAT check over all assignments (tiny formulas only)."""
    for m in range(1 << cnf.num_vars):
        bits = [(m >> i) & 1 for i in range(cnf.num_vars)]
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in cnf.clauses):
            return bits
    return None


def test_variable_numbering_matches_nodes():
    b = XagBuilder(2)
    g = b.add_and(b.pi(1), b.pi(2))
    x = b.finish([g])
    cnf = tseitin(x)
    assert cnf.num_vars == x.num_pis + x.num_gates
    model = brute_force(cnf)
    # PIs are vars 1..num_pis; the only satisfying input is 11
    assert model is not None and model[0] == 1 and model[1] == 1


def test_clause_counts_per_gate_kind():
    b = XagBuilder(2)
    g = b.add_and(b.pi(1), b.pi(2))
    cnf_and = tseitin(b.finish([g]), assert_output_true=False)
    assert len(cnf_and.clauses) == 3
    b = XagBuilder(2)
    g = b.add_xor(b.pi(1), b.pi(2))
    cnf_xor = tseitin(b.finish([g]), assert_output_true=False)
    assert len(cnf_xor.clauses) == 4


def test_constant_outputs():
    b = XagBuilder(1)
    cnf = tseitin(b.finish([FALSE]))
    assert brute_force(cnf) is None  # constant false is unsatisfiable
    b = XagBuilder(1)
    cnf = tseitin(b.finish([TRUE]))
    assert brute_force(cnf) is not None


def test_inverted_output_assertion():
    b = XagBuilder(2)
    g = b.add_and(b.pi(1), b.pi(2))
    cnf = tseitin(b.finish([~g]))
    model = brute_force(cnf)
    assert model is not None
    assert not (model[0] and model[1])


@given(st.integers(0, 300))
@settings(max_examples=30, deadline=None)
def test_equisatisfiable_with_truth_table(seed):
    x = random_xag(4, 12, seed)
    cnf = tseitin(x)
    model = brute_force(cnf)
    if truth_table(x) == 0:
        assert model is None
    else:
        assert model is not None
        assert evaluate(x, model[:x.num_pis]) == 1


@given(st.integers(0, 300))
@settings(max_examples=20, deadline=None)
def test_every_brute_model_extends_circuit_values(seed):
    # any satisfying assignment restricted to the PIs drives the output to 1
    rng = random.Random(seed)
    x = random_xag(rng.randint(2, 4), rng.randint(2, 10), seed)
    model = brute_force(tseitin(x))
    if model is not None:
        assert evaluate(x, model[:x.num_pis]) == 1
