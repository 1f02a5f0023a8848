import io
import random
import time

import pytest
from hypothesis import given, settings, strategies as st

from cecprove.cnf import tseitin
from cecprove.eval import evaluate, truth_table
from cecprove.miter import build_miter, mutate
from cecprove.partition import (NoSplittableTask, Task, dnc_solve, pick_split,
                                propagate_constants, sat_check,
                                score_partition_vars)
from cecprove.sat import solve_cdcl
from cecprove.xag import ContradictoryCube, Lit, XagBuilder, random_xag


def chain_over_towers():
    """Six 4-PI AND towers feeding a 5-XOR chain; the scoring example."""
    b = XagBuilder(24)
    avals = []
    for i in range(6):
        p, q, r, s = (b.pi(4 * i + j) for j in range(1, 5))
        avals.append(b.add_and(b.add_and(p, q), b.add_and(r, s)))
    g = b.add_xor(avals[0], avals[1])
    chain = [g.node]
    for i in range(2, 6):
        g = b.add_xor(g, avals[i])
        chain.append(g.node)
    return b.finish([g]), chain


def test_score_chain_example():
    # |chain| = 5, idis 3 throughout, odis 4..0; only the output escapes
    xag, chain = chain_over_towers()
    scores = score_partition_vars(xag, (), rounds=0)
    for idx, node in enumerate(chain[:4]):
        odis = 4 - idx
        want = 25.0 / (0.6 * odis + 0.4 * 3 + 1.0)
        assert scores[node] == pytest.approx(want, abs=1e-9)
    assert scores[chain[3]] == pytest.approx(25.0 / 2.8, abs=1e-9)
    assert scores[chain[4]] == pytest.approx(25.0 / 2.2 * 1.5, abs=1e-9)


def test_score_no_xor_is_zero():
    b = XagBuilder(3)
    o = b.add_and(b.add_and(b.pi(1), b.pi(2)), b.pi(3))
    scores = score_partition_vars(b.finish([o]), ())
    assert scores and all(v == 0.0 for v in scores.values())


def test_score_smoothing_spreads_mass():
    xag, chain = chain_over_towers()
    raw = score_partition_vars(xag, (), rounds=0)
    smoothed = score_partition_vars(xag, ())
    assert all(v >= 0.0 for v in smoothed.values())
    # towers score zero before smoothing, positive after (they neighbour XORs)
    tower_top = chain[0] - 1
    assert raw[tower_top] == 0.0
    assert smoothed[tower_top] > 0.0


def test_rebuild_identity():
    for t in range(10):
        x = random_xag(6, 40, seed=t)
        r, _ = propagate_constants(x, ())
        assert truth_table(r) == truth_table(x)


def test_propagate_contradiction():
    b = XagBuilder(2)
    w = b.add_and(b.pi(1), b.pi(2))
    x = b.finish([w])
    with pytest.raises(ContradictoryCube):
        propagate_constants(x, (Lit(w.node, False), Lit(1, True)))


@given(st.integers(0, 10_000))
@settings(max_examples=60, deadline=None)
def test_split_covers_parent(trial):
    # parent function == OR of the two children, even for gate-node cubes
    rng = random.Random(trial)
    x = random_xag(rng.randint(3, 8), rng.randint(5, 50), seed=1000 + trial)
    cube = []
    pool = list(range(1, x.num_nodes))
    rng.shuffle(pool)
    for v in pool[: rng.randint(0, 2)]:
        cube.append(Lit(v, rng.random() < 0.5))
    cube = tuple(cube)
    try:
        parent, _ = propagate_constants(x, cube)
        scores = score_partition_vars(x, cube)
    except ContradictoryCube:
        return
    if not scores:
        return
    var = rng.choice(sorted(scores))
    tts = []
    for neg in (False, True):
        try:
            child, _ = propagate_constants(x, cube + (Lit(var, neg),))
            tts.append(truth_table(child))
        except ContradictoryCube:
            tts.append(0)
    assert truth_table(parent) == tts[0] | tts[1]


def test_pick_split_longest_running_leaf():
    xag, _ = chain_over_towers()
    now = time.monotonic()
    t_a = Task(0, (), started_at=now - 9.0)
    t_b = Task(1, (), started_at=now - 5.0)
    task, var = pick_split({0: t_a, 1: t_b}, xag)
    assert task.id == 0
    scores = score_partition_vars(xag, ())
    best = max(scores.values())
    assert var == min(v for v, s in scores.items() if s == best)


def test_pick_split_fanout_fallback():
    b = XagBuilder(3)
    o = b.add_and(b.add_and(b.pi(1), b.pi(2)), b.pi(3))
    x = b.finish([o])
    _, var = pick_split({0: Task(0, ())}, x)
    fo = x.fanout_counts()
    assert var == max(range(1, x.num_nodes), key=lambda v: (fo[v], -v))


def test_pick_split_exhausted():
    b = XagBuilder(1)
    x = b.finish([b.pi(1)])
    with pytest.raises(NoSplittableTask):
        pick_split({0: Task(0, (Lit(1, False),))}, x)
    # a SPLIT leaf set is also unsplittable once every leaf is resolved
    done = Task(0, (), state="UNSAT")
    with pytest.raises(NoSplittableTask):
        pick_split({0: done}, x)


@pytest.mark.parametrize("threads", [1, 2])
def test_dnc_matches_monolithic(threads):
    rng = random.Random(threads)
    for trial in range(12):
        a = random_xag(rng.randint(4, 8), rng.randint(10, 60), seed=5000 + trial)
        if trial % 2 == 0:
            m = build_miter(a, a)
        else:
            mut = None
            for s in range(trial, trial + 20):
                try:
                    mut = mutate(a, seed=s)
                    break
                except ValueError:
                    continue
            if mut is None:
                continue
            m = build_miter(a, mut)
        ref = solve_cdcl(tseitin(m), seed=0)
        got = dnc_solve(m, threads, budget=60.0)
        assert got.verdict == ref.verdict
        if got.verdict == "SAT":
            bits = tuple(got.model[i] for i in range(m.num_pis))
            assert evaluate(m, bits) == 1


def test_dnc_budget_unknown():
    hard = random_xag(14, 300, seed=99)
    m = build_miter(hard, mutate(hard, seed=1))
    res = dnc_solve(m, threads=2, budget=0.0)
    assert res.verdict == "UNKNOWN"
    assert res.reason == "timeout"


def test_sat_check_verdicts():
    a = random_xag(8, 60, seed=42)
    eq = sat_check(build_miter(a, a), threads=1)
    assert eq.verdict == "EQUIVALENT"
    assert eq.engine == "sat"
    assert eq.stats["propagations"] >= 0
    m = build_miter(a, mutate(a, seed=3))
    cex = sat_check(m, threads=2)
    assert cex.verdict == "COUNTEREXAMPLE"
    assert evaluate(m, cex.witness) == 1


def test_sat_log_run_boundaries():
    a = random_xag(5, 25, seed=8)
    m = build_miter(a, a)
    log = io.StringIO()
    dnc_solve(m, threads=1, sat_log=log)
    dnc_solve(m, threads=2, budget=30.0, sat_log=log)
    lines = log.getvalue().splitlines()
    assert lines[0] == "# run threads=1"
    assert "# run threads=2" in lines
    # every data line parses as id,parent,cube,state,elapsed
    for ln in lines:
        if ln.startswith("#"):
            continue
        tid, parent, cube, state, elapsed = ln.split(",")
        int(tid), int(parent), int(cube), float(elapsed)
        assert state in ("RUNNING", "SPLIT_RUNNING", "UNSAT", "SAT", "CANCELLED")
