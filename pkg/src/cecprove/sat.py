"""CDCL solving over the array kernel in _satcore.

The kernel runs in conflict-budget slices; between slices this wrapper
checks the wall-clock deadline and the cooperative cancellation token and
grows the clause arena on demand.  Single-threaded solving is
deterministic for a fixed seed; SAT models are always re-verified against
every clause before being returned.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

import numpy as np

from . import _satcore as core
from .cnf import CnfFormula
from .xag import Cube


@dataclass
class SatResult:
    verdict: str  # SAT | UNSAT | UNKNOWN
    model: tuple[int, ...] | None = None  # model[v-1] = value of variable v
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    wall_time: float = 0.0
    reason: str = ""  # for UNKNOWN: timeout | cancelled | conflict-limit

    def __post_init__(self) -> None:
        if self.verdict == "SAT" and self.model is None:
            raise ValueError("SAT result requires a model")


def _is_cancelled(cancel) -> bool:
    if cancel is None:
        return False
    if callable(cancel):
        return bool(cancel())
    return bool(cancel.is_set())


class Solver:
    """Incremental-state CDCL instance for one formula."""

    def __init__(self, cnf: CnfFormula, seed: int = 0,
                 restart: str = "luby"):
        nv = cnf.num_vars
        self.num_vars = nv
        self.failed = False  # top-level contradiction found during load
        self._problem = cnf.clauses  # kept only for final model verification
        clauses = []
        binaries = []
        ternaries = []
        for cl in cnf.clauses:
            lits = sorted({2 * abs(x) + (1 if x < 0 else 0) for x in cl})
            if any(x > 2 * nv + 1 for x in lits):
                raise ValueError("clause literal exceeds num_vars")
            if any(lits[i] >> 1 == lits[i + 1] >> 1 for i in range(len(lits) - 1)):
                continue  # tautology
            if len(lits) == 2:
                binaries.append(lits)
            elif len(lits) == 3:
                ternaries.append(lits)
            else:
                clauses.append(lits)
        db_len = sum(core.HDR + len(c) for c in clauses) + core.SCRATCH + (1 << 16)
        self.db = np.zeros(db_len, dtype=np.int32)

        # static implication lists: clause (a | b) appears under a^1 -> b
        # and under b^1 -> a
        counts = np.zeros(2 * nv + 3, dtype=np.int64)
        for a, b in binaries:
            counts[(a ^ 1) + 1] += 1
            counts[(b ^ 1) + 1] += 1
        self.bin_start = np.cumsum(counts).astype(np.int64)
        self.bin_lits = np.zeros(max(1, int(self.bin_start[-1])), dtype=np.int32)
        fill = self.bin_start[:-1].copy()
        for a, b in binaries:
            self.bin_lits[fill[a ^ 1]] = b
            fill[a ^ 1] += 1
            self.bin_lits[fill[b ^ 1]] = a
            fill[b ^ 1] += 1

        # ternary triple table plus a full-occurrence CSR over the
        # falsified-literal axis (clause t is listed under each of its
        # three literals)
        self.tern_lits3 = np.zeros(max(1, 3 * len(ternaries)), dtype=np.int32)
        counts = np.zeros(2 * nv + 3, dtype=np.int64)
        for t, lits in enumerate(ternaries):
            self.tern_lits3[3 * t:3 * t + 3] = lits
            for q in lits:
                counts[q + 1] += 1
        self.tern_start = np.cumsum(counts).astype(np.int64)
        self.tern_list = np.zeros(max(1, int(self.tern_start[-1])), dtype=np.int32)
        fill = self.tern_start[:-1].copy()
        for t, lits in enumerate(ternaries):
            for q in lits:
                self.tern_list[fill[q]] = t
                fill[q] += 1
        self.lbin_head = np.full(2 * nv + 2, -1, dtype=np.int64)
        self.lbin_lit = np.zeros(1 << 12, dtype=np.int32)
        self.lbin_next = np.full(1 << 12, -1, dtype=np.int64)
        self.watch_head = np.full(2 * nv + 2, -1, dtype=np.int64)
        self.assigns = np.full(nv + 1, -1, dtype=np.int8)
        self.level = np.zeros(nv + 1, dtype=np.int32)
        self.reason = np.full(nv + 1, -1, dtype=np.int64)
        self.trail = np.zeros(nv + 2, dtype=np.int32)
        # satisfied assumptions open empty levels, so allow 2*nv+2 of them
        self.trail_lim = np.zeros(2 * nv + 4, dtype=np.int32)
        self.phase = np.zeros(nv + 1, dtype=np.int8)
        self.heap = np.zeros(nv + 1, dtype=np.int32)
        self.heap_pos = np.full(nv + 1, -1, dtype=np.int32)
        self.activity = np.zeros(nv + 1, dtype=np.float64)
        self.seen = np.zeros(nv + 1, dtype=np.int8)
        self.learnt = np.zeros(nv + 2, dtype=np.int32)
        # minimization scratch: DFS stack pair plus the mark-undo list
        self.mstk_v = np.zeros(nv + 2, dtype=np.int32)
        self.mstk_k = np.zeros(nv + 2, dtype=np.int32)
        self.mclear = np.zeros(2 * nv + 8, dtype=np.int32)
        self.state = np.zeros(core.ST_SIZE, dtype=np.int64)
        self.params = np.zeros(core.PR_SIZE, dtype=np.float64)
        self.learnt_refs = np.zeros(1 << 14, dtype=np.int64)
        self.scratch = np.zeros(1 << 14, dtype=np.int32)
        self.assumps = np.zeros(1, dtype=np.int32)

        self.params[core.PR_VAR_INC] = 1.0
        self.params[core.PR_VAR_DECAY] = 0.95
        if restart not in ("luby", "ema"):
            raise ValueError(f"unknown restart mode {restart!r}")
        self.params[core.PR_RESTART_MODE] = 0.0 if restart == "luby" else 1.0
        self.state[core.ST_NEXT_RESTART] = 128
        self.state[core.ST_NEXT_REDUCE] = 4000

        rng = random.Random(seed)
        for v in range(1, nv + 1):
            self.activity[v] = rng.random() * 1e-6
        # a descending-activity array is already a valid max-heap
        order = np.argsort(-self.activity[1:]) + 1
        self.heap[:nv] = order
        self.heap_pos[order] = np.arange(nv, dtype=np.int32)
        self.state[core.ST_HEAP] = nv

        # scratch slot 0 for binary/ternary conflicts; lbd -1 keeps it off
        # scans (its size field is rewritten at each short conflict)
        self.db[0] = 2
        self.db[1] = -1
        used = core.SCRATCH
        for lits in clauses:
            if len(lits) == 1:
                if not self._enqueue_root(lits[0]):
                    self.failed = True
                continue
            c = used
            self.db[c] = len(lits)
            self.db[c + 1] = 0
            self.db[c + core.HDR:c + core.HDR + len(lits)] = lits
            used += core.HDR + len(lits)
            core.attach_clause(self.db, self.watch_head, c)
        self.state[core.ST_DB_USED] = used

    def _enqueue_root(self, lit: int) -> bool:
        v, want = lit >> 1, 1 - (lit & 1)
        cur = self.assigns[v]
        if cur >= 0:
            return cur == want
        self.assigns[v] = want
        self.level[v] = 0
        self.trail[self.state[core.ST_TRAIL]] = lit
        self.state[core.ST_TRAIL] += 1
        return True

    def _grow(self) -> None:
        used = self.state[core.ST_DB_USED]
        if used + self.num_vars + 64 + core.HDR > len(self.db):
            self.db = np.concatenate(
                [self.db, np.zeros(len(self.db), dtype=np.int32)])
        if self.state[core.ST_NLEARNT] + 2 >= len(self.learnt_refs):
            self.learnt_refs = np.concatenate(
                [self.learnt_refs, np.zeros(len(self.learnt_refs), dtype=np.int64)])
            self.scratch = np.zeros(len(self.learnt_refs), dtype=np.int32)
        if self.state[core.ST_LBIN_USED] + 4 >= len(self.lbin_lit):
            n = len(self.lbin_lit)
            self.lbin_lit = np.concatenate(
                [self.lbin_lit, np.zeros(n, dtype=np.int32)])
            self.lbin_next = np.concatenate(
                [self.lbin_next, np.full(n, -1, dtype=np.int64)])

    def solve(self, assumptions: Cube = (), budget: float | None = None,
              cancel=None, conflict_limit: int | None = None,
              slice_conflicts: int = 20_000) -> SatResult:
        t0 = time.monotonic()
        deadline = None if budget is None else t0 + budget
        st = self.state

        def result(verdict: str, model=None, reason: str = "") -> SatResult:
            return SatResult(verdict, model,
                             conflicts=int(st[core.ST_CONFL]),
                             decisions=int(st[core.ST_DECIS]),
                             propagations=int(st[core.ST_PROPS]),
                             wall_time=time.monotonic() - t0, reason=reason)

        if self.failed:
            return result("UNSAT")
        enc = []
        for lit in assumptions:
            if not 1 <= lit.node <= self.num_vars:
                raise ValueError(f"assumption on unknown variable {lit.node}")
            enc.append(2 * lit.node + int(lit.neg))
        self.assumps = np.asarray(enc or [0], dtype=np.int32)
        st[core.ST_ROOT] = len(enc)
        core._backtrack(self.assigns, self.level, self.reason, self.trail,
                        self.trail_lim, self.phase, self.heap, self.heap_pos,
                        self.activity, st, 0)

        while True:
            self._grow()
            base = int(st[core.ST_CONFL])
            step = slice_conflicts
            if conflict_limit is not None:
                step = min(step, max(1, conflict_limit - base))
            status = core.search(
                self.db, self.watch_head, self.bin_start, self.bin_lits,
                self.lbin_head, self.lbin_lit, self.lbin_next,
                self.tern_start, self.tern_list, self.tern_lits3,
                self.assigns, self.level, self.reason,
                self.trail, self.trail_lim, self.phase, self.heap, self.heap_pos,
                self.activity, self.seen, self.learnt, self.mstk_v,
                self.mstk_k, self.mclear, st, self.params,
                self.assumps, self.learnt_refs, self.scratch, step,
                len(self.db) - 8, len(self.learnt_refs) - 2)
            if status == core.RES_SAT:
                model = tuple(int(x) for x in self.assigns[1:self.num_vars + 1])
                self._verify_model(model)
                return result("SAT", model)
            if status == core.RES_UNSAT:
                return result("UNSAT")
            if status == core.RES_GROW:
                continue
            if _is_cancelled(cancel):
                return result("UNKNOWN", reason="cancelled")
            if deadline is not None and time.monotonic() >= deadline:
                return result("UNKNOWN", reason="timeout")
            if conflict_limit is not None and st[core.ST_CONFL] >= conflict_limit:
                return result("UNKNOWN", reason="conflict-limit")

    def _verify_model(self, model: tuple[int, ...]) -> None:
        for cl in self._problem:
            if not any(model[abs(l) - 1] == (1 if l > 0 else 0) for l in cl):
                raise AssertionError("model fails a problem clause")
        for a in self.assumps[:int(self.state[core.ST_ROOT])]:
            if not model[(int(a) >> 1) - 1] ^ (int(a) & 1):
                raise AssertionError("model fails an assumption")


def solve_cdcl(cnf: CnfFormula, assumptions: Cube = (),
               budget: float | None = None, seed: int = 0, cancel=None,
               conflict_limit: int | None = None,
               simplify: bool = True, restart: str = "luby") -> SatResult:
    """One-shot complete SAT check with learning, restarts, and VSIDS.

    With `simplify` the formula first goes through variable elimination;
    assumption variables are frozen so they survive, and SAT models are
    reconstructed over the original variables and re-verified against
    the original clauses.
    """
    t0 = time.monotonic()
    if not cnf.clauses:
        model = [0] * cnf.num_vars
        for lit in assumptions:
            model[lit.node - 1] = 0 if lit.neg else 1
        return SatResult("SAT", model=tuple(model))
    if not simplify:
        solver = Solver(cnf, seed=seed, restart=restart)
        return solver.solve(assumptions, budget=budget, cancel=cancel,
                            conflict_limit=conflict_limit)

    from .preprocess import preprocess

    pre = preprocess(cnf, freeze=tuple(lit.node for lit in assumptions))
    if pre.status == "UNSAT":
        return SatResult("UNSAT", wall_time=time.monotonic() - t0)
    left = None if budget is None else max(0.0, budget - (time.monotonic() - t0))
    if not pre.cnf.clauses:
        blank = [0] * cnf.num_vars
        for lit in assumptions:
            blank[lit.node - 1] = 0 if lit.neg else 1
        res = SatResult("SAT", model=tuple(blank))
    else:
        solver = Solver(pre.cnf, seed=seed, restart=restart)
        res = solver.solve(assumptions, budget=left, cancel=cancel,
                           conflict_limit=conflict_limit)
    res.wall_time = time.monotonic() - t0
    if res.verdict != "SAT":
        return res
    assert res.model is not None
    full = pre.reconstruct({v: bool(res.model[v - 1])
                            for v in range(1, cnf.num_vars + 1)})
    model = tuple(int(full[v]) for v in range(1, cnf.num_vars + 1))
    for cl in cnf.clauses:
        if not any(model[abs(l) - 1] == (l > 0) for l in cl):
            raise AssertionError("reconstructed model fails an original clause")
    for lit in assumptions:
        if model[lit.node - 1] == int(lit.neg):
            raise AssertionError("reconstructed model fails an assumption")
    res.model = model
    return res
