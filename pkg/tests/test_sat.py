import threading

import pytest
from hypothesis import given, settings, strategies as st

from cecprove.cnf import CnfFormula, tseitin
from cecprove.eval import evaluate, truth_table
from cecprove.miter import build_miter, mutate
from cecprove.sat import SatResult, solve_cdcl
from cecprove.xag import Lit, random_xag


def miter_pair(seed, equivalent):
    a = random_xag(6, 45, seed=seed)
    if equivalent:
        return build_miter(a, a)
    for s in range(seed, seed + 30):
        try:
            return build_miter(a, mutate(a, seed=s))
        except ValueError:
            continue
    pytest.skip("no function-changing mutation found")


def test_unsat_on_self_miter():
    r = solve_cdcl(tseitin(miter_pair(1, True)))
    assert r.verdict == "UNSAT"


def test_sat_with_verified_model():
    m = miter_pair(2, False)
    if truth_table(m) == 0:
        pytest.skip("mutation cancelled out")
    r = solve_cdcl(tseitin(m))
    assert r.verdict == "SAT"
    bits = [r.model[i] for i in range(m.num_pis)]
    assert evaluate(m, bits) == 1


@given(st.integers(0, 400), st.booleans(), st.booleans())
@settings(max_examples=30, deadline=None)
def test_verdict_matches_truth_table(seed, simplify, use_ema):
    x = random_xag(5, 35, seed)
    want = "SAT" if truth_table(x) != 0 else "UNSAT"
    r = solve_cdcl(tseitin(x), simplify=simplify,
                   restart="ema" if use_ema else "luby")
    assert r.verdict == want
    if want == "SAT":
        assert evaluate(x, [r.model[i] for i in range(x.num_pis)]) == 1


def test_assumptions_constrain_models():
    x = random_xag(5, 30, seed=11)
    if truth_table(x) == 0:
        pytest.skip("needs a satisfiable instance")
    cnf = tseitin(x)
    r = solve_cdcl(cnf, assumptions=(Lit(1, True),))  # force PI1 = 0
    if r.verdict == "SAT":
        assert not r.model[0]
    contradictory = solve_cdcl(
        CnfFormula(2, ((1,), (-1, 2))), assumptions=(Lit(1, True),))
    assert contradictory.verdict == "UNSAT"


def test_conflict_limit_yields_unknown():
    m = miter_pair(3, True)
    r = solve_cdcl(tseitin(m), conflict_limit=1)
    assert r.verdict in ("UNSAT", "UNKNOWN")
    if r.verdict == "UNKNOWN":
        assert r.reason == "conflict-limit"


def test_budget_timeout():
    from cecprove.miter import gen_multiplier_miter

    m = gen_multiplier_miter(8, "array", "diagonal")
    r = solve_cdcl(tseitin(m), budget=0.05)
    assert r.verdict == "UNKNOWN"
    assert r.reason == "timeout"


def test_cancellation_event():
    from cecprove.miter import gen_multiplier_miter

    m = gen_multiplier_miter(8, "array", "diagonal")
    ev = threading.Event()
    ev.set()
    r = solve_cdcl(tseitin(m), cancel=ev)
    assert r.verdict == "UNKNOWN"
    assert r.reason == "cancelled"


def test_stats_populated():
    from cecprove.miter import gen_multiplier_miter

    # structurally distinct equivalent circuits: the kernel has real work
    r = solve_cdcl(tseitin(gen_multiplier_miter(3, "array", "diagonal")),
                   simplify=False)
    assert isinstance(r, SatResult)
    assert r.verdict == "UNSAT"
    assert r.propagations > 0
    assert r.wall_time >= 0.0


def test_seed_changes_search_not_verdict():
    m = miter_pair(5, True)
    cnf = tseitin(m)
    r0 = solve_cdcl(cnf, seed=0)
    r1 = solve_cdcl(cnf, seed=12345)
    assert r0.verdict == r1.verdict == "UNSAT"


def test_trivial_formulas():
    assert solve_cdcl(CnfFormula(1, ((1,), (-1,)))).verdict == "UNSAT"
    assert solve_cdcl(CnfFormula(1, ((1,),))).verdict == "SAT"
    assert solve_cdcl(CnfFormula(0, ())).verdict == "SAT"
    assert solve_cdcl(CnfFormula(2, ((), ))).verdict == "UNSAT"
