"""End-to-end acceptance gate: one test per shipping criterion.

Each test prints one PASS/FAIL line with its measured numbers (visible
under -s; pytest -v shows the per-criterion verdict either way).  The
runtime-trend and divide-and-conquer tests measure real solver runs and
take well over an hour combined; run this file on an otherwise idle
machine.
"""

import math
import random
import time

import pytest

from cecprove.aiger import write_aiger
from cecprove.bdd import bdd_check
from cecprove.cli import main, par2
from cecprove.cnf import tseitin
from cecprove.es import compile_program, es_check, run_exhaustive
from cecprove.eval import evaluate, truth_table
from cecprove.miter import build_miter, gen_multiplier, gen_multiplier_miter, mutate
from cecprove.partition import dnc_solve, sat_check
from cecprove.sat import solve_cdcl
from cecprove.sched import Predictions, analytic_es_time, plan_allocation
from cecprove.sweep import SubMiter, SweepConfig, sweep
from cecprove.transform import select_outputs, tfi_cone
from cecprove.xag import random_xag

pytestmark = pytest.mark.acceptance


def report(name: str, ok: bool, detail: str) -> None:
    print(f"[acceptance] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, f"{name}: {detail}"


def as_sm(xag, sm_id=0):
    return SubMiter(circuit=xag, origin=(0, 0), merged_history={},
                    pi_map=tuple(range(1, xag.num_pis + 1)), id=sm_id)


# --- fast criteria ---

def test_analytic_es_model():
    got = analytic_es_time(1000, 23)
    report("analytic-es-model", got == 0.3, f"analytic_es_time(1000, 23) = {got!r}")


def test_par2_harness():
    a = par2([("x", "EQ", 10.0), ("y", "EQ", 10.0), ("z", "UNKNOWN", 3600.0)], 3600.0)
    b = par2([("EQ", 0.0)] * 4, 3600.0)
    c = par2([("UNKNOWN", 50.0)] * 3, 60.0)
    ok = (abs(a - 2406.67) <= 0.01 and abs(b) <= 0.01 and abs(c - 120.0) <= 0.01)
    report("par2-harness", ok, f"{a:.2f} / {b:.2f} / {c:.2f}")


def test_scheduler_unit_table():
    sat_heavy = plan_allocation(32, Predictions(10.0, 5.0, 10.0), 3600.0)
    even = plan_allocation(32, Predictions(320.0, 400.0, 10.0), 3600.0)
    easy = plan_allocation(32, Predictions(100.0, 100.0, 1.0), 3600.0)
    table_ok = (
        (sat_heavy.sat_threads, sat_heavy.es_threads, sat_heavy.bdd_threads) == (30, 1, 1)
        and (even.sat_threads, even.es_threads, even.bdd_threads) == (16, 16, 0)
        and (easy.sat_threads, easy.es_threads, easy.bdd_threads) == (0, 32, 0))
    rng = random.Random(0)
    violations = 0
    for _ in range(10_000):
        n = rng.randint(2, 64)
        p = Predictions(t_sat=rng.uniform(0.0, 2000.0),
                        t_bdd=rng.uniform(0.0, 2000.0),
                        t_es=rng.uniform(0.0, 2000.0))
        plan = plan_allocation(n, p, rng.uniform(0.1, 3600.0))
        if plan.sat_threads + plan.es_threads + plan.bdd_threads != n:
            violations += 1
        if plan.bdd_threads > 1:
            violations += 1
    report("scheduler-unit-table", table_ok and violations == 0,
           f"table={'ok' if table_ok else 'wrong'}, violations={violations}/10000")


def test_oracle_agreement_500():
    rng = random.Random(2024)
    t0 = time.monotonic()
    checked = 0
    for k in range(500):
        x = random_xag(rng.randint(1, 14), rng.randint(0, 300), seed=k)
        want_zero = truth_table(x) == 0
        sm = as_sm(x, k)
        for engine, res in (("sat", sat_check(x, threads=1)),
                            ("bdd", bdd_check(sm)),
                            ("es", es_check(sm, workers=1))):
            got_zero = res.verdict == "EQUIVALENT"
            assert res.verdict != "UNKNOWN", (engine, k, res.reason)
            assert got_zero == want_zero, (engine, k)
            if not got_zero:
                assert evaluate(x, res.witness) == 1, (engine, k)
        checked += 1
    wall = time.monotonic() - t0
    report("oracle-agreement", checked == 500 and wall < 300.0,
           f"{checked}/500 instances x 3 engines agree, {wall:.1f}s")


def test_equivalence_suite_auto():
    worst = 0.0
    for n in range(2, 9):
        m = gen_multiplier_miter(n, "array", "diagonal")
        t0 = time.monotonic()
        res = sweep(m, SweepConfig(threads=8, engine="auto", budget=60.0))
        wall = time.monotonic() - t0
        assert res.verdict == "EQUIVALENT", (n, res.verdict, res.reason)
        assert wall < 60.0, (n, wall)
        worst = max(worst, wall)
    report("equivalence-suite", True, f"n=2..8 all EQ at 8 threads, worst {worst:.2f}s")


def test_mutation_suite(tmp_path, capsys):
    done = 0
    width = 2
    seed = 0
    while done < 100:
        width = 2 if width >= 8 else width + 1
        m = gen_multiplier_miter(width, "array", "diagonal")
        mut = None
        for s in range(seed, seed + 60):
            try:
                mut = mutate(m, seed=s)
                break
            except ValueError:
                continue
        seed += 60
        if mut is None:
            continue
        path = str(tmp_path / f"mut_{done:03d}.aag")
        with open(path, "wb") as fh:
            fh.write(write_aiger(mut))
        code = main(["prove", path, "--threads", "1"])
        out = capsys.readouterr().out.splitlines()
        assert code == 1, (width, done, out)
        word, bits = out[0].split()
        assert word == "NEQ"
        code = main(["eval", path, bits])
        out = capsys.readouterr().out.splitlines()
        assert code == 0 and out[0] == "1", (width, done)
        done += 1
    report("mutation-suite", done == 100,
           f"{done}/100 mutated miters NEQ with witnesses replaying to 1")


def test_es_register_compression():
    ratios = []
    for n in (4, 6, 8):
        m = gen_multiplier_miter(n, "array", "diagonal")
        prog = compile_program(m)
        ratios.append(prog.num_registers / m.num_gates)
    ok = ratios[0] >= ratios[1] >= ratios[2] and ratios[2] <= 0.15
    report("es-compression", ok,
           "register/gate " + " -> ".join(f"{r:.4f}" for r in ratios))


# --- measured criteria (minutes to hours) ---

def test_es_parallel_scaling():
    m = gen_multiplier_miter(12, "array", "diagonal")
    prog = compile_program(m)
    run_exhaustive(compile_program(gen_multiplier_miter(4, "array", "diagonal")))
    t0 = time.monotonic()
    r1 = run_exhaustive(prog, workers=1)
    t_1 = time.monotonic() - t0
    t0 = time.monotonic()
    r8 = run_exhaustive(prog, workers=8)
    t_8 = time.monotonic() - t0
    assert r1.verdict == r8.verdict == "EXHAUSTED_ZERO"
    report("es-parallel-scaling", t_8 <= 0.35 * t_1,
           f"1w {t_1:.2f}s, 8w {t_8:.2f}s, ratio {t_8 / t_1:.2f} (need <= 0.35)")


def test_runtime_trend():
    times = []
    for n in range(8, 13):
        m = gen_multiplier_miter(n, "array", "diagonal")
        cnf = tseitin(m)
        t0 = time.monotonic()
        res = solve_cdcl(cnf, budget=21600.0)
        wall = time.monotonic() - t0
        assert res.verdict == "UNSAT", (n, res.verdict, res.reason)
        times.append(wall)
    monotone = all(a < b for a, b in zip(times, times[1:]))
    avg_ratio = (times[-1] / times[0]) ** (1.0 / (len(times) - 1))
    m12 = gen_multiplier_miter(12, "array", "diagonal")
    t0 = time.monotonic()
    es = es_check(as_sm(m12), workers=1, budget=60.0)
    t_es = time.monotonic() - t0
    t0 = time.monotonic()
    bdd = bdd_check(as_sm(m12), budget=60.0)
    t_bdd = time.monotonic() - t0
    end_ok = (es.verdict == "EQUIVALENT" and t_es < 60.0
              and bdd.verdict == "EQUIVALENT" and t_bdd < 60.0)
    report("runtime-trend", monotone and avg_ratio >= 3.0 and end_ok,
           "cdcl " + "/".join(f"{t:.1f}" for t in times)
           + f"s, avg step x{avg_ratio:.2f}, es12 {t_es:.1f}s, bdd12 {t_bdd:.1f}s")


def _column_submiter(width, col):
    a = gen_multiplier(width, "array")
    b = gen_multiplier(width, "diagonal")
    m = build_miter(select_outputs(a, [col]), select_outputs(b, [col]))
    cone, pi_map = tfi_cone(m, m.outputs)
    return SubMiter(circuit=cone, origin=(0, col), merged_history={},
                    pi_map=pi_map, id=col)


# Hardness peaks a few columns below the top output and falls off fast
# toward the MSB; these mid columns all take the single-thread solver
# 20-800 s on the reference core, listed cheapest first so the scan
# stops as soon as ten qualify.
DNC_POOL = [(10, 14), (10, 13), (11, 17), (12, 20), (10, 12), (11, 16),
            (12, 19), (11, 15), (12, 18), (11, 14), (11, 13)]


def test_dnc_non_degradation():
    picked = []
    for width, col in DNC_POOL:
        if len(picked) == 10:
            break
        sm = _column_submiter(width, col)
        t0 = time.monotonic()
        res = solve_cdcl(tseitin(sm.circuit), budget=900.0)
        t_mono = time.monotonic() - t0
        if res.verdict != "UNSAT" or t_mono <= 20.0:
            continue
        t0 = time.monotonic()
        r8 = dnc_solve(sm, threads=8, budget=1800.0)
        t_dnc = time.monotonic() - t0
        # A timeout scores as the elapsed wall (ratio >= 2 fails the bound
        # on its own); any other verdict would be a soundness bug.
        assert r8.verdict in ("UNSAT", "UNKNOWN"), (width, col, r8.verdict)
        picked.append((width, col, t_mono, t_dnc))
    assert len(picked) == 10, f"only {len(picked)} pool instances exceeded 20s"
    worst_ratio = max(t_dnc / t_mono for _, _, t_mono, t_dnc in picked)
    geomean = math.exp(sum(math.log(t_mono / t_dnc)
                           for _, _, t_mono, t_dnc in picked) / len(picked))
    detail = ", ".join(f"{w}x{c} {tm:.0f}->{td:.0f}s"
                       for w, c, tm, td in picked)
    report("dnc-non-degradation",
           worst_ratio <= 1.2 and geomean >= 1.5,
           f"worst dnc/mono {worst_ratio:.2f} (need <=1.2), "
           f"geomean speedup {geomean:.2f} (need >=1.5); {detail}")
