"""Array-based CDCL kernel, JIT-compiled.

All solver state lives in numpy arrays owned by the wrapper in sat.py, so
one search slice can stop on a conflict budget and a later slice resumes
where it left off.  Layout of a clause at offset c in the db array:

    db[c]   size
    db[c+1] lbd (0 for problem clauses, -1 when deleted)
    db[c+2] next watch pointer for slot 0 (encoded c*2+0 links)
    db[c+3] next watch pointer for slot 1
    db[c+4 .. c+4+size) literals; slots 0/1 = the watched pair

Literal encoding: variable v (1-based) -> 2v positive, 2v+1 negated.
Watch lists are singly linked through the clause headers; watch_head is
indexed by literal.  Heap is a max-heap on VSIDS activity.

Binary and ternary problem clauses never enter the db.  Problem
binaries live in a static CSR built by the wrapper (literal p maps to
every q with a clause (~p | q) through bin_start/bin_lits); learnt
binaries go to an append-only linked arena (lbin_*).  Problem ternaries
sit in a flat triple table (tern_lits3) with a full-occurrence CSR
(tern_start/tern_list): each falsified literal rechecks its clauses
directly, which trades a third more visits for contiguous reads and no
watch updates.  The reason for a binary implication is encoded as
-other_literal - 2, a ternary one as -TBASE - index, so non-negative
reasons stay db refs and -1 stays the decision marker.  db offset 0 is
a reserved scratch slot through which binary and ternary conflicts
reach the analyzer as an ordinary clause.
"""

from __future__ import annotations

import numpy as np
from numba import njit

HDR = 4  # header ints before the literal block
SCRATCH = HDR + 3  # reserved db prefix: the short-conflict scratch clause
TBASE = 1 << 28  # ternary reasons encode as -TBASE - index

ST_QHEAD = 0
ST_TRAIL = 1  # trail size
ST_LEVEL = 2  # decision level
ST_DB_USED = 3
ST_NLEARNT = 4
ST_HEAP = 5  # heap size
ST_CONFL = 6  # total conflicts
ST_DECIS = 7  # total decisions
ST_PROPS = 8  # total propagations
ST_RESTARTS = 9
ST_NEXT_RESTART = 10  # conflict count triggering next restart (luby mode)
ST_LUBY_I = 11
ST_NEXT_REDUCE = 12  # conflict count triggering next reduction
ST_NREDUCE = 13
ST_GARBAGE = 14  # ints occupied by deleted clauses
ST_ROOT = 15  # number of assumption literals
ST_LAST_RESTART = 16  # conflict count at the most recent restart
ST_LBIN_USED = 17  # nodes used in the learnt-binary arena
ST_SIZE = 18

PR_VAR_INC = 0
PR_VAR_DECAY = 1
PR_EMA_FAST = 2  # fast/slow LBD averages driving ema-mode restarts
PR_EMA_SLOW = 3
PR_EMA_TRAIL = 4
PR_RESTART_MODE = 5  # 0 = luby, 1 = lbd ema
PR_SIZE = 6

RES_LIMIT = 0
RES_SAT = 10
RES_UNSAT = 20
RES_GROW = 30  # an arena is exhausted; wrapper must grow and re-enter


@njit(cache=True, inline="always")
def _lit_value(assigns, lit):
    a = assigns[lit >> 1]
    if a < 0:
        return -1
    return a ^ (lit & 1)


@njit(cache=True)
def _heap_sift_up(heap, heap_pos, activity, i):
    v = heap[i]
    a = activity[v]
    while i > 0:
        p = (i - 1) >> 1
        if activity[heap[p]] >= a:
            break
        heap[i] = heap[p]
        heap_pos[heap[i]] = i
        i = p
    heap[i] = v
    heap_pos[v] = i


@njit(cache=True)
def _heap_sift_down(heap, heap_pos, activity, i, size):
    v = heap[i]
    a = activity[v]
    while True:
        c = 2 * i + 1
        if c >= size:
            break
        if c + 1 < size and activity[heap[c + 1]] > activity[heap[c]]:
            c += 1
        if activity[heap[c]] <= a:
            break
        heap[i] = heap[c]
        heap_pos[heap[i]] = i
        i = c
    heap[i] = v
    heap_pos[v] = i


@njit(cache=True)
def _heap_insert(heap, heap_pos, activity, state, v):
    if heap_pos[v] >= 0:
        return
    i = state[ST_HEAP]
    heap[i] = v
    heap_pos[v] = i
    state[ST_HEAP] += 1
    _heap_sift_up(heap, heap_pos, activity, i)


@njit(cache=True)
def _heap_pop(heap, heap_pos, activity, state):
    v = heap[0]
    state[ST_HEAP] -= 1
    size = state[ST_HEAP]
    heap_pos[v] = -1
    if size > 0:
        heap[0] = heap[size]
        heap_pos[heap[0]] = 0
        _heap_sift_down(heap, heap_pos, activity, 0, size)
    return v


@njit(cache=True)
def _bump_var(activity, heap, heap_pos, params, v):
    activity[v] += params[PR_VAR_INC]
    if activity[v] > 1e100:  # rescale to preserve relative order
        for u in range(activity.shape[0]):
            activity[u] *= 1e-100
        params[PR_VAR_INC] *= 1e-100
    if heap_pos[v] >= 0:
        _heap_sift_up(heap, heap_pos, activity, heap_pos[v])


@njit(cache=True)
def attach_clause(db, watch_head, c):
    for s in range(2):
        lit = db[c + HDR + s]
        db[c + 2 + s] = watch_head[lit]
        watch_head[lit] = c * 2 + s


@njit(cache=True)
def _detach_watch(db, watch_head, c, s):
    lit = db[c + HDR + s]
    enc = c * 2 + s
    cur = watch_head[lit]
    if cur == enc:
        watch_head[lit] = db[c + 2 + s]
        return
    while cur != -1:
        pc = cur >> 1
        ps = cur & 1
        nxt = db[pc + 2 + ps]
        if nxt == enc:
            db[pc + 2 + ps] = db[c + 2 + s]
            return
        cur = nxt


@njit(cache=True, inline="always")
def _enqueue(assigns, level, reason, trail, state, lit, why):
    v = lit >> 1
    assigns[v] = 1 - (lit & 1)
    level[v] = state[ST_LEVEL]
    reason[v] = why
    trail[state[ST_TRAIL]] = lit
    state[ST_TRAIL] += 1


@njit(cache=True)
def _propagate(db, watch_head, bin_start, bin_lits, lbin_head, lbin_lit,
               lbin_next, tern_start, tern_list, tern_lits3, assigns, level,
               reason, trail, state):
    """Unit propagation; returns a conflicting clause ref or -1.

    Scan order per falsified literal: static binary CSR, learnt-binary
    arena, the ternary table, then the watched long clauses.  Binary and
    ternary conflicts are written into the scratch slot (ref 0).
    """
    while state[ST_QHEAD] < state[ST_TRAIL]:
        p = trail[state[ST_QHEAD]]
        state[ST_QHEAD] += 1
        state[ST_PROPS] += 1
        false_lit = p ^ 1

        for j in range(bin_start[p], bin_start[p + 1]):
            q = bin_lits[j]
            qv = _lit_value(assigns, q)
            if qv == 1:
                continue
            if qv == 0:
                db[0] = 2
                db[HDR] = q
                db[HDR + 1] = false_lit
                state[ST_QHEAD] = state[ST_TRAIL]
                return 0
            _enqueue(assigns, level, reason, trail, state, q, -(false_lit + 2))

        k = lbin_head[p]
        while k != -1:
            q = lbin_lit[k]
            k = lbin_next[k]
            qv = _lit_value(assigns, q)
            if qv == 1:
                continue
            if qv == 0:
                db[0] = 2
                db[HDR] = q
                db[HDR + 1] = false_lit
                state[ST_QHEAD] = state[ST_TRAIL]
                return 0
            _enqueue(assigns, level, reason, trail, state, q, -(false_lit + 2))

        for j in range(tern_start[false_lit], tern_start[false_lit + 1]):
            t = tern_list[j]
            base = 3 * t
            l0 = tern_lits3[base]
            l1 = tern_lits3[base + 1]
            l2 = tern_lits3[base + 2]
            if l0 == false_lit:
                o1, o2 = l1, l2
            elif l1 == false_lit:
                o1, o2 = l0, l2
            else:
                o1, o2 = l0, l1
            v1 = _lit_value(assigns, o1)
            if v1 == 1:
                continue
            v2 = _lit_value(assigns, o2)
            if v2 == 1:
                continue
            if v1 == 0:
                if v2 == 0:
                    db[0] = 3
                    db[HDR] = o1
                    db[HDR + 1] = o2
                    db[HDR + 2] = false_lit
                    state[ST_QHEAD] = state[ST_TRAIL]
                    return 0
                _enqueue(assigns, level, reason, trail, state, o2, -TBASE - t)
            elif v2 == 0:
                _enqueue(assigns, level, reason, trail, state, o1, -TBASE - t)

        prev = -1
        cur = watch_head[false_lit]
        while cur != -1:
            c = cur >> 1
            s = cur & 1
            nxt = db[c + 2 + s]
            other = db[c + HDR + (1 - s)]
            ov = _lit_value(assigns, other)
            if ov == 1:
                prev = cur
                cur = nxt
                continue
            size = db[c]
            moved = False
            for k2 in range(2, size):
                lk = db[c + HDR + k2]
                if _lit_value(assigns, lk) != 0:
                    db[c + HDR + s] = lk
                    db[c + HDR + k2] = false_lit
                    if prev == -1:
                        watch_head[false_lit] = nxt
                    else:
                        db[(prev >> 1) + 2 + (prev & 1)] = nxt
                    db[c + 2 + s] = watch_head[lk]
                    watch_head[lk] = cur
                    moved = True
                    break
            if moved:
                cur = nxt
                continue
            if ov == 0:  # every other literal false: conflict
                state[ST_QHEAD] = state[ST_TRAIL]
                return c
            _enqueue(assigns, level, reason, trail, state, other, c)
            prev = cur
            cur = nxt
    return -1


@njit(cache=True)
def _backtrack(assigns, level, reason, trail, trail_lim, phase, heap, heap_pos,
               activity, state, target):
    if state[ST_LEVEL] <= target:
        return
    bound = trail_lim[target]
    for i in range(state[ST_TRAIL] - 1, bound - 1, -1):
        lit = trail[i]
        v = lit >> 1
        phase[v] = assigns[v]
        assigns[v] = -1
        reason[v] = -1
        _heap_insert(heap, heap_pos, activity, state, v)
    state[ST_TRAIL] = bound
    state[ST_QHEAD] = bound
    state[ST_LEVEL] = target


@njit(cache=True)
def _lit_redundant(db, tern_lits3, level, reason, seen, stk_v, stk_k, mclear,
                   nclear0, v0, mask):
    """Depth-first test whether v0's literal is implied by the learnt clause.

    Walks antecedent chains; seen doubles as a memo (1 = clause literal,
    2 = proven removable, 3 = proven blocked).  mask holds the decision
    levels present in the clause, hashed to 64 bits, so chains reaching a
    foreign level abort early.  Returns (redundant, new mclear length).
    """
    nclear = nclear0
    stk_v[0] = v0
    stk_k[0] = 0
    top = 1
    ok = True
    while top > 0:
        v = stk_v[top - 1]
        k = stk_k[top - 1]
        r = reason[v]
        nant = 0
        u = -1
        if r >= 0:
            nant = db[r]
            if k < nant:
                u = db[r + HDR + k]
        elif r <= -TBASE:
            nant = 3
            if k < 3:
                u = tern_lits3[3 * (-r - TBASE) + k]
        else:
            nant = 1
            if k < 1:
                u = -(r + 2)
        if k >= nant:  # every antecedent literal accounted for
            top -= 1
            if seen[v] == 0:
                seen[v] = 2
                mclear[nclear] = v
                nclear += 1
            continue
        stk_k[top - 1] = k + 1
        uv = u >> 1
        if uv == v or level[uv] == 0 or seen[uv] == 1 or seen[uv] == 2:
            continue
        if (seen[uv] == 3 or reason[uv] == -1
                or ((mask >> (np.int64(level[uv]) & 63)) & np.int64(1)) == 0):
            ok = False
            break
        stk_v[top] = uv
        stk_k[top] = 0
        top += 1
    if ok:
        return True, nclear
    for t in range(top):  # the whole chain depends on the blocked literal
        w = stk_v[t]
        if seen[w] == 0:
            seen[w] = 3
            mclear[nclear] = w
            nclear += 1
    return False, nclear


@njit(cache=True)
def _analyze(db, tern_lits3, assigns, level, reason, trail, state, seen,
             learnt, mstk_v, mstk_k, mclear, activity, heap, heap_pos,
             params, confl):
    """First-UIP conflict analysis with recursive minimization.

    Returns (learnt size, backtrack level, lbd); learnt[0] is the
    asserting literal, learnt[1] watches the backtrack level.  Negative
    antecedents are binary reasons carrying their single other literal
    or ternary reasons indexing the triple table.
    """
    n_learnt = 1
    path_c = 0
    p = -1
    idx = state[ST_TRAIL] - 1
    cur_level = state[ST_LEVEL]
    while True:
        if confl >= 0:
            size = db[confl]
            for k in range(size):
                q = db[confl + HDR + k]
                if q == p:
                    continue
                v = q >> 1
                if seen[v] == 0 and level[v] > 0:
                    seen[v] = 1
                    _bump_var(activity, heap, heap_pos, params, v)
                    if level[v] >= cur_level:
                        path_c += 1
                    else:
                        learnt[n_learnt] = q
                        n_learnt += 1
        elif confl > -TBASE:
            q = -(confl + 2)  # binary reason: the single other literal
            v = q >> 1
            if seen[v] == 0 and level[v] > 0:
                seen[v] = 1
                _bump_var(activity, heap, heap_pos, params, v)
                if level[v] >= cur_level:
                    path_c += 1
                else:
                    learnt[n_learnt] = q
                    n_learnt += 1
        else:
            base = 3 * (-confl - TBASE)  # ternary reason: scan the triple
            for k in range(3):
                q = tern_lits3[base + k]
                if q == p:
                    continue
                v = q >> 1
                if seen[v] == 0 and level[v] > 0:
                    seen[v] = 1
                    _bump_var(activity, heap, heap_pos, params, v)
                    if level[v] >= cur_level:
                        path_c += 1
                    else:
                        learnt[n_learnt] = q
                        n_learnt += 1
        while seen[trail[idx] >> 1] == 0:
            idx -= 1
        p = trail[idx]
        idx -= 1
        v = p >> 1
        seen[v] = 0
        path_c -= 1
        if path_c == 0:
            break
        confl = reason[v]
    learnt[0] = p ^ 1

    # minimization: drop literals whose antecedent chains stay within the
    # clause; dropped literals keep seen = 1 so later drops may lean on
    # them, and every mark is undone at the end through mclear
    mask = np.int64(0)
    for i in range(1, n_learnt):
        mask |= np.int64(1) << (np.int64(level[learnt[i] >> 1]) & 63)
    nclear = 0
    out = 1
    for i in range(1, n_learnt):
        q = learnt[i]
        v = q >> 1
        mclear[nclear] = v
        nclear += 1
        drop = False
        if reason[v] != -1:
            drop, nclear = _lit_redundant(db, tern_lits3, level, reason, seen,
                                          mstk_v, mstk_k, mclear, nclear, v,
                                          mask)
        if not drop:
            learnt[out] = q
            out += 1
    for i in range(nclear):
        seen[mclear[i]] = 0
    n_learnt = out

    bt = 0
    if n_learnt > 1:
        best = 1
        for i in range(2, n_learnt):
            if level[learnt[i] >> 1] > level[learnt[best] >> 1]:
                best = i
        tmp = learnt[1]
        learnt[1] = learnt[best]
        learnt[best] = tmp
        bt = level[learnt[1] >> 1]

    lbd = 0
    for i in range(n_learnt):
        lv = level[learnt[i] >> 1]
        tagged = False
        for j in range(i):
            if level[learnt[j] >> 1] == lv:
                tagged = True
                break
        if not tagged:
            lbd += 1
    return n_learnt, bt, lbd


@njit(cache=True)
def _luby(i):
    """Luby restart sequence value for step i (1-based): 1,1,2,1,1,2,4,..."""
    while True:
        k = 1
        while (1 << k) - 1 < i:
            k += 1
        if (1 << k) - 1 == i:
            return 1 << (k - 1)
        i -= (1 << (k - 1)) - 1


@njit(cache=True)
def _reduce_db(db, watch_head, reason, trail, state, learnt_refs, scratch):
    """Drop the worse half of learned clauses (called at level 0)."""
    n = state[ST_NLEARNT]
    locked = scratch[:n]
    for i in range(n):
        locked[i] = 0
    for i in range(state[ST_TRAIL]):
        r = reason[trail[i] >> 1]
        if r >= 0:
            for j in range(n):
                if learnt_refs[j] == r:
                    locked[j] = 1
                    break
    # sort candidate indices by (lbd, -ref): prefer low lbd, then newer
    order = np.argsort(db[learnt_refs[:n] + 1] * np.int64(1 << 32) - learnt_refs[:n])
    keep_n = n // 2
    out = 0
    # the keep loop rewrites learnt_refs in place while indexing it in
    # sorted order, so it must read from a snapshot
    refs_snap = learnt_refs[:n].copy()
    for oi in range(n):
        i = order[oi]
        c = refs_snap[i]
        if locked[i] == 1 or db[c + 1] <= 3 or out < keep_n:
            learnt_refs[out] = c
            out += 1
        else:
            _detach_watch(db, watch_head, c, 0)
            _detach_watch(db, watch_head, c, 1)
            state[ST_GARBAGE] += HDR + db[c]
            db[c + 1] = -1
    # restore ref order so "newer" stays meaningful
    learnt_refs[:out] = np.sort(learnt_refs[:out])
    state[ST_NLEARNT] = out
    state[ST_NREDUCE] += 1
    state[ST_NEXT_REDUCE] = state[ST_CONFL] + 2000 + 300 * state[ST_NREDUCE]
    if state[ST_GARBAGE] * 2 > state[ST_DB_USED] - SCRATCH:
        _collect(db, watch_head, reason, trail, state, learnt_refs)


@njit(cache=True)
def _collect(db, watch_head, reason, trail, state, learnt_refs):
    """Compact the clause arena, dropping deleted clauses.

    Runs at decision level 0 with an empty propagation queue, where
    re-watching every clause on its current first two literals is safe.
    Reason refs of root-implied literals and learnt_refs (sorted
    ascending, matching arena order) are remapped during the scan.
    """
    used = state[ST_DB_USED]
    live = used - SCRATCH - state[ST_GARBAGE]
    tmp = np.empty(live, dtype=np.int32)
    nt = state[ST_TRAIL]
    nl = state[ST_NLEARNT]
    q = 0
    li = 0
    pos = SCRATCH
    while pos < used:
        size = db[pos]
        tot = HDR + size
        if db[pos + 1] != -1:
            new_ref = SCRATCH + q
            if li < nl and learnt_refs[li] == pos:
                learnt_refs[li] = new_ref
                li += 1
            for t in range(nt):
                v = trail[t] >> 1
                if reason[v] == pos:
                    reason[v] = new_ref
            for x in range(tot):
                tmp[q + x] = db[pos + x]
            q += tot
        pos += tot
    for x in range(live):
        db[SCRATCH + x] = tmp[x]
    state[ST_DB_USED] = SCRATCH + live
    state[ST_GARBAGE] = 0
    for i in range(watch_head.shape[0]):
        watch_head[i] = -1
    pos = SCRATCH
    while pos < state[ST_DB_USED]:
        attach_clause(db, watch_head, pos)
        pos += HDR + db[pos]


@njit(cache=True)
def search(db, watch_head, bin_start, bin_lits, lbin_head, lbin_lit,
           lbin_next, tern_start, tern_list, tern_lits3, assigns, level,
           reason, trail, trail_lim, phase, heap, heap_pos, activity, seen,
           learnt, mstk_v, mstk_k, mclear, state, params, assumps,
           learnt_refs, scratch, conflict_budget, db_cap, max_learnt):
    """Run CDCL until a verdict, the conflict budget, or a grow request."""
    start_conflicts = state[ST_CONFL]
    while True:
        confl = _propagate(db, watch_head, bin_start, bin_lits, lbin_head,
                           lbin_lit, lbin_next, tern_start, tern_list,
                           tern_lits3, assigns, level, reason, trail, state)
        if confl != -1:
            state[ST_CONFL] += 1
            if state[ST_LEVEL] == 0:
                return RES_UNSAT
            n, bt, lbd = _analyze(db, tern_lits3, assigns, level, reason, trail,
                                  state, seen, learnt, mstk_v, mstk_k, mclear,
                                  activity, heap, heap_pos, params, confl)
            _backtrack(assigns, level, reason, trail, trail_lim, phase, heap,
                       heap_pos, activity, state, bt)
            if n == 1:
                _enqueue(assigns, level, reason, trail, state, learnt[0], -1)
            elif n == 2:
                if state[ST_LBIN_USED] + 2 > lbin_lit.shape[0]:
                    return RES_GROW
                k = state[ST_LBIN_USED]
                l0 = learnt[0]
                l1 = learnt[1]
                lbin_lit[k] = l1
                lbin_next[k] = lbin_head[l0 ^ 1]
                lbin_head[l0 ^ 1] = k
                lbin_lit[k + 1] = l0
                lbin_next[k + 1] = lbin_head[l1 ^ 1]
                lbin_head[l1 ^ 1] = k + 1
                state[ST_LBIN_USED] = k + 2
                _enqueue(assigns, level, reason, trail, state, l0, -(l1 + 2))
            else:
                c = state[ST_DB_USED]
                if c + HDR + n > db_cap or state[ST_NLEARNT] >= max_learnt:
                    return RES_GROW
                db[c] = n
                db[c + 1] = lbd
                for i in range(n):
                    db[c + HDR + i] = learnt[i]
                state[ST_DB_USED] = c + HDR + n
                attach_clause(db, watch_head, c)
                learnt_refs[state[ST_NLEARNT]] = c
                state[ST_NLEARNT] += 1
                _enqueue(assigns, level, reason, trail, state, learnt[0], c)
            params[PR_VAR_INC] /= params[PR_VAR_DECAY]

            restart = False
            if params[PR_RESTART_MODE] < 0.5:
                if state[ST_CONFL] >= state[ST_NEXT_RESTART]:
                    restart = True
                    state[ST_LUBY_I] += 1
                    state[ST_NEXT_RESTART] = (state[ST_CONFL]
                                              + 128 * _luby(state[ST_LUBY_I]))
            else:
                params[PR_EMA_FAST] += (lbd - params[PR_EMA_FAST]) * 0.03125
                params[PR_EMA_SLOW] += (lbd - params[PR_EMA_SLOW]) * 6.1035e-05
                params[PR_EMA_TRAIL] += ((state[ST_TRAIL] - params[PR_EMA_TRAIL])
                                         * 0.000244140625)
                # hold back while the trail is unusually deep (likely progress)
                if (state[ST_CONFL] - state[ST_LAST_RESTART] >= 64
                        and params[PR_EMA_FAST] > 1.15 * params[PR_EMA_SLOW]
                        and state[ST_TRAIL] < 1.4 * params[PR_EMA_TRAIL]):
                    restart = True
            if restart:
                state[ST_RESTARTS] += 1
                state[ST_LAST_RESTART] = state[ST_CONFL]
                _backtrack(assigns, level, reason, trail, trail_lim, phase, heap,
                           heap_pos, activity, state, 0)
            if state[ST_CONFL] - start_conflicts >= conflict_budget:
                return RES_LIMIT
        else:
            if state[ST_LEVEL] == 0 and state[ST_CONFL] >= state[ST_NEXT_REDUCE]:
                _reduce_db(db, watch_head, reason, trail, state, learnt_refs,
                           scratch)
            # replay assumptions, one decision level each
            next_lit = -1
            while state[ST_LEVEL] < state[ST_ROOT]:
                a = assumps[state[ST_LEVEL]]
                av = _lit_value(assigns, a)
                if av == 0:
                    return RES_UNSAT
                trail_lim[state[ST_LEVEL]] = state[ST_TRAIL]
                state[ST_LEVEL] += 1
                if av == -1:
                    next_lit = a
                    break
            if next_lit == -1:
                v = -1
                while state[ST_HEAP] > 0:
                    u = _heap_pop(heap, heap_pos, activity, state)
                    if assigns[u] < 0:
                        v = u
                        break
                if v == -1:
                    return RES_SAT
                next_lit = 2 * v + (1 - phase[v])  # saved polarity
                trail_lim[state[ST_LEVEL]] = state[ST_TRAIL]
                state[ST_LEVEL] += 1
                state[ST_DECIS] += 1
            _enqueue(assigns, level, reason, trail, state, next_lit, -1)
