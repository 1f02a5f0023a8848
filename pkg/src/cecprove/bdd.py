"""Reduced ordered BDD engine with complement edges.

The miter cone is compiled bottom-up, one apply per gate, over a shared
unique table; the circuits are equivalent exactly when the root lands on
the zero terminal.  Complement flags live on low edges and roots only,
so negation is a bit flip and one terminal serves both constants.  The
computed cache is direct-mapped and lossy; garbage collection is
reference-counted and runs between gate steps once the table passes 75%
occupancy.  There is no variable reordering: a blown node budget is
reported as LIMIT and the caller falls back to another engine.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .verdict import COUNTEREXAMPLE, EQUIVALENT, UNKNOWN, CheckResult
from .xag import GateKind, Xag

ZERO = "ZERO"
NONZERO = "NONZERO"
LIMIT = "LIMIT"

# node-ref encoding: (index << 1) | complement; index 0 is the ONE terminal
_ONE = 0
_ZERO = 1
_FULL = np.int64(-1)  # apply result meaning the node table ran out

_OP_AND = 1
_OP_XOR = 2

_INF_LEVEL = np.int32(0x7FFFFFFF)

ST_BUMP = 0
ST_FREE_HEAD = 1
ST_FREE_CNT = 2


@dataclass(frozen=True)
class BddLimits:
    max_nodes: int = 1 << 22
    max_cache: int = 1 << 20

    def __post_init__(self) -> None:
        if self.max_nodes < 2:
            raise ValueError("max_nodes must be >= 2")
        if self.max_cache < 1 or self.max_cache & (self.max_cache - 1):
            raise ValueError("max_cache must be a power of two")


@dataclass
class BddOutcome:
    status: str  # ZERO | NONZERO | LIMIT
    witness: tuple[int, ...] | None = None
    limit_kind: str = ""  # nodes | budget | cancelled, LIMIT only
    peak_nodes: int = 0
    gc_runs: int = 0


@njit(cache=True)
def _hash3(a, b, c):
    h = (np.uint64(a) * np.uint64(0x9E3779B97F4A7C15)
         ^ np.uint64(b) * np.uint64(0xBF58476D1CE4E5B9)
         ^ np.uint64(c) * np.uint64(0x94D049BB133111EB))
    return np.int64(h)


@njit(cache=True)
def _mk(v, low, high, var_a, low_a, high_a, ref_a, uniq, umask, state):
    if low == high:
        return low
    neg = high & 1
    if neg:
        low ^= 1
        high ^= 1
    s = _hash3(v, low, high) & umask
    while True:
        e = uniq[s]
        if e < 0:
            break
        if var_a[e] == v and low_a[e] == low and high_a[e] == high:
            return (e << 1) | neg
        s = (s + 1) & umask
    if state[ST_FREE_HEAD] >= 0:
        idx = state[ST_FREE_HEAD]
        state[ST_FREE_HEAD] = low_a[idx]
        state[ST_FREE_CNT] -= 1
    elif state[ST_BUMP] < var_a.shape[0]:
        idx = state[ST_BUMP]
        state[ST_BUMP] += 1
    else:
        return _FULL
    var_a[idx] = v
    low_a[idx] = low
    high_a[idx] = high
    ref_a[idx] = 0
    c = low >> 1
    if c != 0:
        ref_a[c] += 1
    c = high >> 1
    if c != 0:
        ref_a[c] += 1
    uniq[s] = idx
    return (idx << 1) | neg


@njit(cache=True)
def _apply(op, f0_, g0_, var_a, low_a, high_a, ref_a, uniq, umask, state,
           c_f, c_g, c_r, cmask, fr_f, fr_g, fr_ph, fr_lo, fr_ng):
    """Iterative apply; returns a node-ref or _FULL when allocation fails.

    Frames hold (f, g, phase, low-result, lifted-complement); terminal
    and cache probes run at phase 0, children are pushed one at a time,
    and phase 2 builds the node and stores the cache line.
    """
    fr_f[0] = f0_
    fr_g[0] = g0_
    fr_ph[0] = 0
    fr_ng[0] = 0
    sp = 1
    ret = np.int64(0)
    while sp > 0:
        i = sp - 1
        ph = fr_ph[i]
        if ph == 0:
            f = fr_f[i]
            g = fr_g[i]
            neg = np.int64(0)
            done = False
            if op == _OP_AND:
                if f == _ZERO or g == _ZERO:
                    ret = _ZERO
                    done = True
                elif f == _ONE:
                    ret = g
                    done = True
                elif g == _ONE:
                    ret = f
                    done = True
                elif f == g:
                    ret = f
                    done = True
                elif f == (g ^ 1):
                    ret = _ZERO
                    done = True
            else:
                if f == _ZERO:
                    ret = g
                    done = True
                elif g == _ZERO:
                    ret = f
                    done = True
                elif f == _ONE:
                    ret = g ^ 1
                    done = True
                elif g == _ONE:
                    ret = f ^ 1
                    done = True
                elif f == g:
                    ret = _ZERO
                    done = True
                elif f == (g ^ 1):
                    ret = _ONE
                    done = True
                else:
                    # complements lift out of XOR, improving cache reuse
                    neg = (f & 1) ^ (g & 1)
                    f &= ~np.int64(1)
                    g &= ~np.int64(1)
            if done:
                sp -= 1
                continue
            if f > g:
                t = f
                f = g
                g = t
            slot = (_hash3(f, g, op) ^ op) & cmask
            if c_f[slot] == ((f << 2) | op) and c_g[slot] == g:
                ret = c_r[slot] ^ neg
                sp -= 1
                continue
            fr_f[i] = f
            fr_g[i] = g
            fr_ng[i] = neg
            fr_ph[i] = 1
            lf = var_a[f >> 1]
            lg = var_a[g >> 1]
            top = lf if lf < lg else lg
            cn = f & 1
            n = f >> 1
            f0 = low_a[n] ^ cn if lf == top else f
            cn = g & 1
            n = g >> 1
            g0 = low_a[n] ^ cn if lg == top else g
            fr_f[sp] = f0
            fr_g[sp] = g0
            fr_ph[sp] = 0
            fr_ng[sp] = 0
            sp += 1
        elif ph == 1:
            fr_lo[i] = ret
            f = fr_f[i]
            g = fr_g[i]
            lf = var_a[f >> 1]
            lg = var_a[g >> 1]
            top = lf if lf < lg else lg
            cn = f & 1
            n = f >> 1
            f1 = high_a[n] ^ cn if lf == top else f
            cn = g & 1
            n = g >> 1
            g1 = high_a[n] ^ cn if lg == top else g
            fr_ph[i] = 2
            fr_f[sp] = f1
            fr_g[sp] = g1
            fr_ph[sp] = 0
            fr_ng[sp] = 0
            sp += 1
        else:
            f = fr_f[i]
            g = fr_g[i]
            lf = var_a[f >> 1]
            lg = var_a[g >> 1]
            top = lf if lf < lg else lg
            r = _mk(top, fr_lo[i], ret, var_a, low_a, high_a, ref_a,
                    uniq, umask, state)
            if r == _FULL:
                return _FULL
            slot = (_hash3(f, g, op) ^ op) & cmask
            c_f[slot] = (f << 2) | op
            c_g[slot] = g
            c_r[slot] = r
            ret = r ^ fr_ng[i]
            sp -= 1
    return ret


@njit(cache=True)
def _rebuild(uniq, umask, var_a, low_a, high_a, state):
    uniq[:] = -1
    for idx in range(1, state[ST_BUMP]):
        if var_a[idx] >= 0:
            s = _hash3(var_a[idx], low_a[idx], high_a[idx]) & umask
            while uniq[s] >= 0:
                s = (s + 1) & umask
            uniq[s] = idx


@njit(cache=True)
def _collect(var_a, low_a, high_a, ref_a, uniq, umask, state, wl):
    """Free every node whose reference count cascaded to zero."""
    n = 0
    for idx in range(1, state[ST_BUMP]):
        if var_a[idx] >= 0 and ref_a[idx] == 0:
            wl[n] = idx
            n += 1
    freed = 0
    while n > 0:
        n -= 1
        idx = wl[n]
        if var_a[idx] < 0:
            continue
        lo = low_a[idx] >> 1
        hi = high_a[idx] >> 1
        var_a[idx] = -1
        low_a[idx] = state[ST_FREE_HEAD]
        state[ST_FREE_HEAD] = idx
        state[ST_FREE_CNT] += 1
        freed += 1
        if lo != 0:
            ref_a[lo] -= 1
            if ref_a[lo] == 0:
                wl[n] = lo
                n += 1
        if hi != 0:
            ref_a[hi] -= 1
            if ref_a[hi] == 0:
                wl[n] = hi
                n += 1
    _rebuild(uniq, umask, var_a, low_a, high_a, state)
    return freed


class _Manager:
    """One single-threaded node table; never shared between checks."""

    _START_CAP = 1 << 14

    def __init__(self, limits: BddLimits):
        self.limits = limits
        self._alloc_tables(min(self._START_CAP, max(limits.max_nodes, 2)))
        cm = limits.max_cache
        self.c_f = np.full(cm, -1, dtype=np.int64)
        self.c_g = np.zeros(cm, dtype=np.int64)
        self.c_r = np.zeros(cm, dtype=np.int64)
        self.cmask = np.int64(cm - 1)
        self.gc_runs = 0
        self.peak = 1
        self.gc_at = max(2, int(0.75 * limits.max_nodes))

    def _alloc_tables(self, cap: int) -> None:
        self.cap = cap
        self.var_a = np.full(cap, -1, dtype=np.int32)
        self.low_a = np.zeros(cap, dtype=np.int64)
        self.high_a = np.zeros(cap, dtype=np.int64)
        self.ref_a = np.zeros(cap, dtype=np.int32)
        self.var_a[0] = _INF_LEVEL  # the terminal; immortal, never hashed
        usz = 1
        while usz < 2 * cap:
            usz *= 2
        self.uniq = np.full(usz, -1, dtype=np.int64)
        self.umask = np.int64(usz - 1)
        self.state = np.zeros(4, dtype=np.int64)
        self.state[ST_BUMP] = 1
        self.state[ST_FREE_HEAD] = -1

    @property
    def live(self) -> int:
        return int(self.state[ST_BUMP] - self.state[ST_FREE_CNT])

    def _grow(self) -> None:
        old = (self.var_a, self.low_a, self.high_a, self.ref_a, self.state)
        n = int(old[4][ST_BUMP])
        self._alloc_tables(min(self.cap * 2, self.limits.max_nodes))
        self.var_a[:n] = old[0][:n]
        self.low_a[:n] = old[1][:n]
        self.high_a[:n] = old[2][:n]
        self.ref_a[:n] = old[3][:n]
        self.state[:] = old[4]
        _rebuild(self.uniq, self.umask, self.var_a, self.low_a, self.high_a,
                 self.state)

    def gc(self) -> int:
        wl = np.empty(self.cap, dtype=np.int64)
        freed = _collect(self.var_a, self.low_a, self.high_a, self.ref_a,
                         self.uniq, self.umask, self.state, wl)
        self.c_f.fill(-1)  # cache lines may name dead slots; drop them all
        self.gc_runs += 1
        return freed

    def maybe_gc(self) -> None:
        if self.cap == self.limits.max_nodes and self.live >= self.gc_at:
            self.gc()
            floor = max(2, int(0.75 * self.limits.max_nodes))
            # back off while the survivors keep the table crowded
            self.gc_at = max(floor, self.live + max(1024, self.cap // 16))

    def ref(self, r: int) -> None:
        if (r >> 1) != 0:
            self.ref_a[r >> 1] += 1

    def deref(self, r: int) -> None:
        if (r >> 1) != 0:
            self.ref_a[r >> 1] -= 1

    def projection(self, level: int) -> int:
        gc_tried = False
        while True:
            r = _mk(np.int32(level), np.int64(_ZERO), np.int64(_ONE),
                    self.var_a, self.low_a, self.high_a, self.ref_a,
                    self.uniq, self.umask, self.state)
            if r != _FULL:
                return int(r)
            if self.cap < self.limits.max_nodes:
                self._grow()
            elif not gc_tried:
                self.gc()
                gc_tried = True
            else:
                return -1

    def apply_gate(self, op: int, f: int, g: int, depth: int) -> int:
        """Apply with grow/collect retries; -1 means the node budget is spent."""
        fr = np.empty(depth + 2, dtype=np.int64)
        gr = np.empty(depth + 2, dtype=np.int64)
        ph = np.empty(depth + 2, dtype=np.int64)
        lo = np.empty(depth + 2, dtype=np.int64)
        ng = np.empty(depth + 2, dtype=np.int64)
        gc_tried = False
        while True:
            r = _apply(op, np.int64(f), np.int64(g), self.var_a, self.low_a,
                       self.high_a, self.ref_a, self.uniq, self.umask,
                       self.state, self.c_f, self.c_g, self.c_r, self.cmask,
                       fr, gr, ph, lo, ng)
            if r != _FULL:
                if self.live > self.peak:
                    self.peak = self.live
                return int(r)
            if self.cap < self.limits.max_nodes:
                self._grow()
            elif not gc_tried:
                self.gc()
                gc_tried = True
            else:
                return -1


def _pi_levels(num_pis: int, order) -> list[int]:
    if order is None:
        order = range(1, num_pis + 1)
    order = list(order)
    if sorted(order) != list(range(1, num_pis + 1)):
        raise ValueError("order must be a permutation of the PI indices")
    level_of = [0] * (num_pis + 1)
    for lvl, pi in enumerate(order):
        level_of[pi] = lvl
    return level_of


def _find_one(man: _Manager, root: int, num_levels: int) -> list[int]:
    """Pick one satisfying assignment by level; don't-cares become zero.

    The loop keeps the invariant "the current ref must evaluate to 1" by
    folding the wanted child value into the child's complement bit.
    """
    assign = [0] * num_levels
    ref = root
    while ref >> 1 != 0:
        n = ref >> 1
        want = 1 ^ (ref & 1)  # value the branch node itself must take
        h = int(man.high_a[n])
        hval = 1 if h == _ONE else (0 if h == _ZERO else -1)
        if hval == -1 or hval == want:
            assign[int(man.var_a[n])] = 1
            ref = h
        else:
            ref = int(man.low_a[n])
        if want == 0:
            ref ^= 1
    return assign


def build_bdd(xag: Xag, order=None, limits: BddLimits = BddLimits(),
              budget: float | None = None, cancel=None) -> BddOutcome:
    """Compile the output cone bottom-up; ZERO means the function is 0."""
    out = xag.output
    level_of = _pi_levels(xag.num_pis, order)
    man = _Manager(limits)
    deadline = None if budget is None else time.monotonic() + budget

    if out.node == 0:
        root = _ZERO ^ (1 if out.neg else 0)
        return BddOutcome(ZERO if root == _ZERO else NONZERO,
                          witness=None if root == _ZERO else (0,) * xag.num_pis,
                          peak_nodes=man.peak)

    needed = [False] * xag.num_nodes
    needed[out.node] = True
    first_gate = xag.first_gate
    for node in range(xag.num_nodes - 1, first_gate - 1, -1):
        if needed[node]:
            g = xag.gate_at(node)
            needed[g.in0.node] = True
            needed[g.in1.node] = True

    refs = [0] * xag.num_nodes
    refs[out.node] += 1
    for node in range(first_gate, xag.num_nodes):
        if needed[node]:
            g = xag.gate_at(node)
            refs[g.in0.node] += 1
            refs[g.in1.node] += 1

    val = [0] * xag.num_nodes
    for node in range(1, xag.num_pis + 1):
        if needed[node]:
            r = man.projection(level_of[node])
            if r < 0:
                return BddOutcome(LIMIT, limit_kind="nodes",
                                  peak_nodes=man.peak, gc_runs=man.gc_runs)
            val[node] = r
            man.ref_a[r >> 1] += refs[node]

    depth = xag.num_pis

    def consume(node: int) -> None:
        refs[node] -= 1
        if refs[node] == 0:
            man.deref(val[node])

    for node in range(first_gate, xag.num_nodes):
        if not needed[node]:
            continue
        if deadline is not None and time.monotonic() >= deadline:
            return BddOutcome(LIMIT, limit_kind="budget",
                              peak_nodes=man.peak, gc_runs=man.gc_runs)
        if cancel is not None and cancel():
            return BddOutcome(LIMIT, limit_kind="cancelled",
                              peak_nodes=man.peak, gc_runs=man.gc_runs)
        g = xag.gate_at(node)
        f = val[g.in0.node] ^ (1 if g.in0.neg else 0)
        h = val[g.in1.node] ^ (1 if g.in1.neg else 0)
        op = _OP_AND if g.kind == GateKind.AND else _OP_XOR
        r = man.apply_gate(op, f, h, depth)
        if r < 0:
            return BddOutcome(LIMIT, limit_kind="nodes",
                              peak_nodes=man.peak, gc_runs=man.gc_runs)
        val[node] = r
        man.ref(r)
        consume(g.in0.node)
        consume(g.in1.node)
        man.maybe_gc()

    root = val[out.node] ^ (1 if out.neg else 0)
    if root == _ZERO:
        return BddOutcome(ZERO, peak_nodes=man.peak, gc_runs=man.gc_runs)
    assign_by_level = _find_one(man, root, xag.num_pis)
    ordered = list(order) if order is not None else list(range(1, xag.num_pis + 1))
    witness = [0] * xag.num_pis
    for lvl, bit in enumerate(assign_by_level):
        witness[ordered[lvl] - 1] = bit
    return BddOutcome(NONZERO, witness=tuple(witness),
                      peak_nodes=man.peak, gc_runs=man.gc_runs)


def bdd_check(sm, limits: BddLimits = BddLimits(), budget: float | None = None,
              cancel=None, order=None) -> CheckResult:
    """Engine-contract wrapper; node exhaustion surfaces as a resource miss."""
    from .eval import evaluate

    t0 = time.monotonic()
    out = build_bdd(sm.circuit, order=order, limits=limits, budget=budget,
                    cancel=cancel)
    stats = {"peak_nodes": out.peak_nodes, "gc_runs": out.gc_runs,
             "wall_time": time.monotonic() - t0}
    if out.status == ZERO:
        return CheckResult(EQUIVALENT, engine="bdd", stats=stats)
    if out.status == NONZERO:
        assert out.witness is not None
        if evaluate(sm.circuit, out.witness) != 1:
            raise AssertionError("BDD witness failed re-evaluation")
        return CheckResult(COUNTEREXAMPLE, witness=out.witness, engine="bdd",
                           stats=stats)
    reason = {"nodes": "resource", "budget": "timeout",
              "cancelled": "cancelled"}[out.limit_kind]
    return CheckResult(UNKNOWN, reason=reason, engine="bdd", stats=stats)
