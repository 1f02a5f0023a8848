"""Divide-and-conquer CDCL over a master-worker task tree.

The master owns the tree: it splits the longest-running leaf on a
structurally scored variable and hands re-encoded child formulas to
workers, which run independent solver instances (no clause sharing).
The root keeps solving its full formula after a split, so every verdict
path stays sound even if splitting never helps.
"""

from __future__ import annotations

import os
import queue
import threading
import time
from dataclasses import dataclass

from .cnf import CnfFormula, tseitin
from .eval import evaluate
from .features import distances, xor_chains
from .sat import SatResult, _is_cancelled, solve_cdcl
from .verdict import COUNTEREXAMPLE, EQUIVALENT, UNKNOWN, CheckResult
from .xag import (FALSE, TRUE, ContradictoryCube, Cube, GateKind, Lit, Xag,
                  XagBuilder, check_cube)

RUNNING = "RUNNING"
SPLIT_RUNNING = "SPLIT_RUNNING"
UNSAT = "UNSAT"
SAT = "SAT"
CANCELLED = "CANCELLED"

ALPHA_DIST = 0.6  # output-distance weight in the scoring denominator
BUMP = 1.5  # multiplier for chain cut points
FACTOR = 0.7  # self weight per smoothing round
ROUNDS = 2
SPLIT_COOLDOWN = 1.0  # min seconds between splits; prevents split storms
RESTART_MODE = "ema"  # measured faster than luby on XOR-heavy miters


class NoSplittableTask(RuntimeError):
    """No RUNNING leaf offers an unassigned variable to split on."""


@dataclass
class Task:
    """One node of the task tree; mutated only by the master."""

    id: int
    cube: Cube
    parent: int | None = None
    children: tuple[int, int] | None = None
    state: str = RUNNING
    started_at: float = 0.0


def propagate_constants(xag: Xag, cube: Cube) -> tuple[Xag, list[Lit]]:
    """Re-encode a circuit under a cube.

    Every assigned node keeps its defining cone through an equality
    side constraint and becomes a constant for its fanouts, so the
    rebuilt output is exactly (original output) AND (node == value) for
    each cube literal.  That conjunction is what keeps the task tree
    sound: a parent's function is the OR of its two children's.

    Returns the rebuilt circuit plus the literal every original node
    maps to (a constant for nodes fixed by the cube).  Raises
    ContradictoryCube when some constraint folds to constant false,
    i.e. no input can satisfy the cube.
    """
    values = check_cube(cube, xag.num_nodes)
    b = XagBuilder(xag.num_pis)
    lit_of: list[Lit] = [FALSE]
    constraints: list[Lit] = []

    def fix(node: int, lit: Lit) -> Lit:
        want = values[node]
        target = lit if want else ~lit
        if target == FALSE:
            raise ContradictoryCube(f"node {node} propagates against its cube value")
        if target != TRUE:
            constraints.append(target)
        return TRUE if want else FALSE

    for i in range(1, xag.num_pis + 1):
        lit = b.pi(i)
        if i in values:
            lit = fix(i, lit)
        lit_of.append(lit)
    for g in xag.gates:
        f0, f1 = lit_of[g.in0.node], lit_of[g.in1.node]
        a = Lit(f0.node, f0.neg != g.in0.neg)
        c = Lit(f1.node, f1.neg != g.in1.neg)
        lit = b.add_and(a, c) if g.kind == GateKind.AND else b.add_xor(a, c)
        node = len(lit_of)
        if node in values:
            lit = fix(node, lit)
        lit_of.append(lit)
    o = lit_of[xag.output.node]
    out = Lit(o.node, o.neg != xag.output.neg)
    for lit in constraints:
        out = b.add_and(out, lit)
    return b.finish([out]), lit_of


def score_partition_vars(xag: Xag, cube: Cube, alpha_dist: float = ALPHA_DIST,
                         bump: float = BUMP, factor: float = FACTOR,
                         rounds: int = ROUNDS) -> dict[int, float]:
    """Score original-graph nodes as split candidates under a cube.

    On the rebuilt graph each XOR-chain member earns
    |chain|^2 / (alpha_dist*odis + (1-alpha_dist)*idis + 1), cut points
    (a fanout edge escaping the chain) are multiplied by `bump`, then
    `rounds` passes of sc' = factor*sc + (1-factor)*mean(neighbour sc)
    diffuse the mass.  Only nodes still alive under the cube get
    entries; scores are keyed by original node index.
    """
    task, lit_of = propagate_constants(xag, cube)
    n = task.num_nodes
    sc = [0.0] * n
    idis, odis = distances(task)
    consumers: list[list[int]] = [[] for _ in range(n)]
    for k, g in enumerate(task.gates):
        z = task.first_gate + k
        consumers[g.in0.node].append(z)
        consumers[g.in1.node].append(z)
    out_node = task.output.node
    for chain in xor_chains(task):
        members = set(chain)
        weight = float(len(chain)) ** 2
        for v in chain:
            d = alpha_dist * odis[v] + (1.0 - alpha_dist) * idis[v] + 1.0
            s = weight / d  # inf distance outside the cone gives 0.0
            if v == out_node or any(u not in members for u in consumers[v]):
                s *= bump
            sc[v] = s
    if rounds > 0:
        neighbours: list[list[int]] = [[] for _ in range(n)]
        for k, g in enumerate(task.gates):
            z = task.first_gate + k
            for fan in (g.in0.node, g.in1.node):
                if fan != 0:
                    neighbours[z].append(fan)
                    neighbours[fan].append(z)
        for _ in range(rounds):
            nxt = sc[:]
            for v in range(1, n):
                nb = neighbours[v]
                mean = sum(sc[u] for u in nb) / len(nb) if nb else 0.0
                nxt[v] = factor * sc[v] + (1.0 - factor) * mean
            sc = nxt
    scores: dict[int, float] = {}
    for node in range(1, xag.num_nodes):
        lit = lit_of[node]
        if lit.node != 0:
            scores[node] = sc[lit.node]
    return scores


def pick_split(tasks, xag: Xag, now: float | None = None,
               fanouts: list[int] | None = None) -> tuple[Task, int]:
    """Pick (longest-running RUNNING leaf, best split variable).

    Leaf ties break toward the lower task id, score ties toward the
    lower node index; an all-zero score map falls back to the
    highest-fanout alive variable.  Leaves whose cube assigns every
    variable (or contradicts the circuit) are skipped.
    """
    if now is None:
        now = time.monotonic()
    pool = tasks.values() if isinstance(tasks, dict) else tasks
    leaves = [t for t in pool if t.state == RUNNING and t.children is None]
    leaves.sort(key=lambda t: (t.started_at - now, t.id))
    for task in leaves:
        try:
            scores = score_partition_vars(xag, task.cube)
        except ContradictoryCube:
            continue
        if not scores:
            continue
        best = max(scores.values())
        if best > 0.0:
            var = min(v for v, s in scores.items() if s == best)
        else:
            if fanouts is None:
                fanouts = xag.fanout_counts()
            var = max(scores, key=lambda v: (fanouts[v], -v))
        return task, var
    raise NoSplittableTask("no RUNNING leaf with an unassigned variable")


def _node_values(xag: Xag, bits) -> list[int]:
    vals = [0] * xag.num_nodes
    for i in range(xag.num_pis):
        vals[1 + i] = bits[i] & 1
    first = xag.first_gate
    for k, g in enumerate(xag.gates):
        a = vals[g.in0.node] ^ int(g.in0.neg)
        c = vals[g.in1.node] ^ int(g.in1.neg)
        vals[first + k] = a & c if g.kind == GateKind.AND else a ^ c
    return vals


def _open_log(dest):
    if dest is None:
        return None, False
    if hasattr(dest, "write"):
        return dest, False
    return open(os.fspath(dest), "a", encoding="utf-8"), True


def _log_line(fh, task_id: int, parent: int | None, cube_size: int,
              state: str, elapsed: float) -> None:
    if fh is None:
        return
    p = -1 if parent is None else parent
    fh.write(f"{task_id},{p},{cube_size},{state},{elapsed:.3f}\n")
    fh.flush()


class _Master:
    """Owns the task tree; workers only run solvers and report back."""

    def __init__(self, xag: Xag, threads: int, budget: float | None,
                 seed: int, cancel, log) -> None:
        self.xag = xag
        self.threads = threads
        self.deadline = None if budget is None else time.monotonic() + budget
        self.seed = seed
        self.cancel = cancel
        self.log = log
        self.tasks: dict[int, Task] = {}
        self.cnfs: dict[int, CnfFormula] = {}
        self.events: dict[int, threading.Event] = {}
        self.ready: queue.Queue[int] = queue.Queue()
        self.results: queue.Queue = queue.Queue()
        self.fanouts = xag.fanout_counts()
        self.busy = 0
        self.busy_lock = threading.Lock()
        self.stop = threading.Event()
        self.last_split: float | None = None
        self.next_id = 0
        self.published: SatResult | None = None
        self.conflicts = 0
        self.decisions = 0
        self.propagations = 0

    def run(self) -> SatResult:
        t0 = time.monotonic()
        root = self._create_task((), None, tseitin(self.xag))
        self.ready.put(root.id)
        workers = [threading.Thread(target=self._worker, daemon=True)
                   for _ in range(self.threads)]
        for w in workers:
            w.start()
        try:
            while self.published is None:
                if self.deadline is not None and time.monotonic() >= self.deadline:
                    self._publish(SatResult("UNKNOWN", reason="timeout"))
                    break
                if _is_cancelled(self.cancel):
                    self._publish(SatResult("UNKNOWN", reason="cancelled"))
                    break
                try:
                    tid, res = self.results.get(timeout=0.05)
                except queue.Empty:
                    self._maybe_split()
                    continue
                if isinstance(res, Exception):
                    raise res
                self.conflicts += res.conflicts
                self.decisions += res.decisions
                self.propagations += res.propagations
                self._handle(tid, res)
                self._maybe_split()
        finally:
            self.stop.set()
            for ev in self.events.values():
                ev.set()
            for w in workers:
                w.join(timeout=30.0)
        res = self.published
        assert res is not None
        return SatResult(res.verdict, model=res.model, conflicts=self.conflicts,
                         decisions=self.decisions, propagations=self.propagations,
                         wall_time=time.monotonic() - t0, reason=res.reason)

    # master-side tree operations

    def _create_task(self, cube: Cube, parent: int | None,
                     cnf: CnfFormula | None) -> Task:
        task = Task(self.next_id, cube, parent, started_at=time.monotonic())
        self.next_id += 1
        self.tasks[task.id] = task
        self.events[task.id] = threading.Event()
        if cnf is not None:
            self.cnfs[task.id] = cnf
        self._log(task)
        return task

    def _log(self, task: Task) -> None:
        _log_line(self.log, task.id, task.parent, len(task.cube), task.state,
                  time.monotonic() - task.started_at)

    def _publish(self, res: SatResult) -> None:
        if self.published is None:
            self.published = res
            for ev in self.events.values():
                ev.set()

    def _handle(self, tid: int, res: SatResult) -> None:
        task = self.tasks[tid]
        if self.published is not None or task.state in (UNSAT, SAT, CANCELLED):
            return
        if res.verdict == "SAT":
            assert res.model is not None
            bits = tuple(res.model[i] for i in range(self.xag.num_pis))
            if evaluate(self.xag, bits) != 1:
                raise RuntimeError("divide-and-conquer model failed evaluation")
            task.state = SAT
            self._log(task)
            full = tuple(_node_values(self.xag, bits)[1:])
            self._publish(SatResult("SAT", model=full))
        elif res.verdict == "UNSAT":
            self._on_unsat(task)
        elif res.reason == "timeout":
            self._publish(SatResult("UNKNOWN", reason="timeout"))
        # a cancelled result for a live task only happens during teardown

    def _on_unsat(self, task: Task) -> None:
        task.state = UNSAT
        self.events[task.id].set()
        self._log(task)
        self._cancel_descendants(task)
        node = task
        while node.parent is not None:
            parent = self.tasks[node.parent]
            if parent.state in (UNSAT, SAT, CANCELLED) or parent.children is None:
                break
            a, b = parent.children
            if not (self.tasks[a].state == UNSAT and self.tasks[b].state == UNSAT):
                break
            parent.state = UNSAT
            self.events[parent.id].set()
            self._log(parent)
            node = parent
        if self.tasks[0].state == UNSAT:
            self._publish(SatResult("UNSAT"))

    def _cancel_descendants(self, task: Task) -> None:
        stack = list(task.children or ())
        while stack:
            t = self.tasks[stack.pop()]
            stack.extend(t.children or ())
            if t.state in (UNSAT, SAT, CANCELLED):
                continue
            t.state = CANCELLED
            self.events[t.id].set()
            self._log(t)

    def _maybe_split(self) -> None:
        if self.published is not None:
            return
        now = time.monotonic()
        if self.last_split is not None and now - self.last_split < SPLIT_COOLDOWN:
            return
        if not self.ready.empty():
            return
        with self.busy_lock:
            if self.busy >= self.threads:
                return
        try:
            task, var = pick_split(self.tasks, self.xag, now=now,
                                   fanouts=self.fanouts)
        except NoSplittableTask:
            return
        self._split(task, var)
        self.last_split = time.monotonic()

    def _split(self, task: Task, var: int) -> None:
        kids: list[int] = []
        dead: list[int] = []
        for neg in (False, True):  # v=1 branch first, then v=0
            cube = task.cube + (Lit(var, neg),)
            cnf = None
            try:
                sub, _ = propagate_constants(self.xag, cube)
                cnf = tseitin(sub)
            except ContradictoryCube:
                pass
            child = self._create_task(cube, task.id, cnf)
            kids.append(child.id)
            if cnf is None:
                dead.append(child.id)
        task.children = (kids[0], kids[1])
        if task.state == RUNNING:
            task.state = SPLIT_RUNNING  # keeps solving its own formula
            self._log(task)
        for kid in kids:
            if kid not in dead:
                self.ready.put(kid)
        for kid in dead:
            self._on_unsat(self.tasks[kid])

    # worker side

    def _worker(self) -> None:
        while not self.stop.is_set():
            try:
                tid = self.ready.get(timeout=0.05)
            except queue.Empty:
                continue
            with self.busy_lock:
                self.busy += 1
            try:
                res = self._run_task(tid)
            except Exception as exc:
                self.results.put((tid, exc))
                return
            finally:
                with self.busy_lock:
                    self.busy -= 1
            self.results.put((tid, res))

    def _run_task(self, tid: int) -> SatResult:
        ev = self.events[tid]
        if ev.is_set():
            return SatResult("UNKNOWN", reason="cancelled")
        remaining = None
        if self.deadline is not None:
            remaining = self.deadline - time.monotonic()
            if remaining <= 0:
                return SatResult("UNKNOWN", reason="timeout")
        return solve_cdcl(self.cnfs[tid], budget=remaining, seed=self.seed + tid,
                          cancel=ev, restart=RESTART_MODE)


def dnc_solve(sm, threads: int, budget: float | None = None, *, seed: int = 0,
              cancel=None, sat_log=None) -> SatResult:
    """Check satisfiability of a (sub-)miter with `threads` workers.

    With one thread this is exactly solve_cdcl on the root formula.
    With more, the master splits the longest-running leaf whenever a
    worker is idle and the youngest split is at least SPLIT_COOLDOWN
    old.  Verdicts: SAT publishes an evaluation-verified model, UNSAT
    requires the root resolved (directly or through both children),
    budget expiry or cancellation yields UNKNOWN.

    `sat_log` appends one line per task transition:
    id,parent,cube-size,state,elapsed.
    """
    xag: Xag = getattr(sm, "circuit", sm)
    if threads < 1:
        raise ValueError("threads must be >= 1")
    log, own = _open_log(sat_log)
    if log is not None:  # run boundary, so appended logs stay replayable
        log.write(f"# run threads={threads}\n")
    try:
        if threads == 1:
            t0 = time.monotonic()
            _log_line(log, 0, None, 0, RUNNING, 0.0)
            res = solve_cdcl(tseitin(xag), budget=budget, seed=seed,
                             cancel=cancel, restart=RESTART_MODE)
            state = {"SAT": SAT, "UNSAT": UNSAT}.get(res.verdict, CANCELLED)
            _log_line(log, 0, None, 0, state, time.monotonic() - t0)
            return res
        return _Master(xag, threads, budget, seed, cancel, log).run()
    finally:
        if own:
            log.close()


def sat_check(sm, threads: int = 1, budget: float | None = None,
              cancel=None, seed: int = 0, sat_log=None) -> CheckResult:
    """CDCL engine front end; threads > 1 enables divide-and-conquer."""
    xag: Xag = getattr(sm, "circuit", sm)
    res = dnc_solve(xag, threads, budget, seed=seed, cancel=cancel,
                    sat_log=sat_log)
    stats = {"conflicts": res.conflicts, "decisions": res.decisions,
             "propagations": res.propagations, "wall_time": res.wall_time}
    if res.verdict == "UNSAT":
        return CheckResult(EQUIVALENT, engine="sat", stats=stats)
    if res.verdict == "SAT":
        assert res.model is not None
        bits = tuple(res.model[i] for i in range(xag.num_pis))
        if evaluate(xag, bits) != 1:
            raise AssertionError("CDCL witness failed re-check")
        return CheckResult(COUNTEREXAMPLE, witness=bits, engine="sat",
                           stats=stats)
    return CheckResult(UNKNOWN, reason=res.reason or "timeout", engine="sat",
                       stats=stats)
