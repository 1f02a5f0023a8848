"""CNF simplification before search.

Bounded variable elimination with subsumption and self-subsuming
resolution, in the style of SatELite.  Gate encodings leave most
internal variables with a handful of occurrences each, so elimination
typically removes well over half the variables of a miter CNF and
shrinks the search space the solver has to cover.

Eliminated variables are recorded on a reconstruction stack so that a
model of the simplified formula can be extended to a model of the
original one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cnf import CnfFormula

# Above this many occurrences of a variable we do not even attempt
# elimination; the resolvent check would be quadratic in the tail.
_ELIM_OCC_CAP = 40


@dataclass
class SimplifiedCnf:
    """Result of preprocessing, with enough state to undo it on models."""

    cnf: CnfFormula
    num_vars: int
    status: str = "UNKNOWN"  # UNSAT when an empty clause was derived
    fixed: dict[int, bool] = field(default_factory=dict)
    # (var, clauses containing var, clauses containing -var), in
    # chronological elimination order.
    elim_stack: list[tuple[int, tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]]] = field(
        default_factory=list
    )

    def reconstruct(self, model: dict[int, bool]) -> dict[int, bool]:
        """Extend a model of the simplified CNF to the original variables.

        `model` maps variables of the simplified formula to values.
        Variables absent from both the model and the reconstruction
        state default to False.
        """
        # The solver may assign arbitrary values to variables that no
        # longer occur in the simplified clauses; fixed values win.
        full = dict(model)
        full.update(self.fixed)
        for v, pos, neg in reversed(self.elim_stack):
            # v=True satisfies every clause of `pos`; it is safe unless
            # some clause of `neg` relies on -v being true.
            ok_true = True
            for cl in neg:
                if not any(_lit_true(lit, full) for lit in cl if abs(lit) != v):
                    ok_true = False
                    break
            full[v] = ok_true
            if not ok_true:
                for cl in pos:
                    if not any(_lit_true(lit, full) for lit in cl if abs(lit) != v):
                        raise AssertionError("model reconstruction failed")
        for v in range(1, self.num_vars + 1):
            full.setdefault(v, False)
        return full


def _lit_true(lit: int, model: dict[int, bool]) -> bool:
    val = model.get(abs(lit))
    return val is not None and val == (lit > 0)


def _sig(clause: list[int]) -> int:
    s = 0
    for lit in clause:
        s |= 1 << (abs(lit) & 63)
    return s


class _State:
    def __init__(self, cnf: CnfFormula, freeze: frozenset[int]):
        self.num_vars = cnf.num_vars
        self.freeze = freeze
        self.clauses: list[list[int] | None] = []
        self.sigs: list[int] = []
        self.occur: dict[int, set[int]] = {}
        self.fixed: dict[int, bool] = {}
        self.unit_queue: list[int] = []
        self.unsat = False
        self.touched: set[int] = set()
        for cl in cnf.clauses:
            lits = sorted(set(cl), key=abs)
            if any(-l in lits for l in lits):
                continue
            self._add_clause(lits)

    def _add_clause(self, lits: list[int]) -> None:
        if not lits:
            self.unsat = True
            return
        if len(lits) == 1:
            self.unit_queue.append(lits[0])
            return
        cid = len(self.clauses)
        self.clauses.append(lits)
        self.sigs.append(_sig(lits))
        for l in lits:
            self.occur.setdefault(l, set()).add(cid)
            self.touched.add(abs(l))

    def _remove_clause(self, cid: int) -> None:
        cl = self.clauses[cid]
        if cl is None:
            return
        for l in cl:
            self.occur.get(l, set()).discard(cid)
            self.touched.add(abs(l))
        self.clauses[cid] = None

    def _strengthen(self, cid: int, lit: int) -> None:
        """Remove `lit` from clause `cid`."""
        cl = self.clauses[cid]
        assert cl is not None
        self.occur.get(lit, set()).discard(cid)
        cl.remove(lit)
        self.touched.update(abs(l) for l in cl)
        self.touched.add(abs(lit))
        if len(cl) == 1:
            self.unit_queue.append(cl[0])
            self.clauses[cid] = None
            self.occur.get(cl[0], set()).discard(cid)
        elif not cl:
            self.unsat = True
        else:
            self.sigs[cid] = _sig(cl)

    def propagate_units(self) -> None:
        while self.unit_queue and not self.unsat:
            lit = self.unit_queue.pop()
            v, val = abs(lit), lit > 0
            if v in self.fixed:
                if self.fixed[v] != val:
                    self.unsat = True
                continue
            self.fixed[v] = val
            for cid in list(self.occur.get(lit, ())):
                self._remove_clause(cid)
            for cid in list(self.occur.get(-lit, ())):
                self._strengthen(cid, -lit)

    def subsume_round(self, dirty: set[int]) -> None:
        """Subsumption and self-subsuming resolution seeded by dirty vars."""
        work = [cid for v in dirty for lit in (v, -v) for cid in self.occur.get(lit, ())]
        for cid in set(work):
            cl = self.clauses[cid]
            if cl is None:
                continue
            sig = self.sigs[cid]
            # Scan candidates through the least-occurring literal.
            best = min(cl, key=lambda l: len(self.occur.get(l, ())) + len(self.occur.get(-l, ())))
            for probe in (best, -best):
                for other in list(self.occur.get(probe, ())):
                    if other == cid:
                        continue
                    ocl = self.clauses[other]
                    if ocl is None or len(ocl) < len(cl):
                        continue
                    osig = self.sigs[other]
                    if sig & ~osig:
                        continue
                    if probe == best:
                        if all(l in ocl for l in cl):
                            self._remove_clause(other)
                    else:
                        # cl \ {best} plus best, ocl contains -best:
                        # resolving removes -best from ocl.
                        if all(l in ocl or l == best for l in cl):
                            self._strengthen(other, -best)
                    if self.clauses[cid] is None:
                        break
                if self.clauses[cid] is None:
                    break

    def try_eliminate(
        self, v: int
    ) -> tuple[int, tuple[tuple[int, ...], ...], tuple[tuple[int, ...], ...]] | None:
        if v in self.freeze or v in self.fixed:
            return None
        pos = [cid for cid in self.occur.get(v, ()) if self.clauses[cid] is not None]
        neg = [cid for cid in self.occur.get(-v, ()) if self.clauses[cid] is not None]
        if not pos and not neg:
            return None
        if len(pos) + len(neg) > _ELIM_OCC_CAP:
            return None
        resolvents: list[list[int]] = []
        limit = len(pos) + len(neg)
        for pc in pos:
            pcl = self.clauses[pc]
            assert pcl is not None
            for nc in neg:
                ncl = self.clauses[nc]
                assert ncl is not None
                merged = {l for l in pcl if l != v} | {l for l in ncl if l != -v}
                if any(-l in merged for l in merged):
                    continue
                resolvents.append(sorted(merged, key=abs))
                if len(resolvents) > limit:
                    return None
        pos_cls = tuple(tuple(self.clauses[c]) for c in pos)  # type: ignore[arg-type]
        neg_cls = tuple(tuple(self.clauses[c]) for c in neg)  # type: ignore[arg-type]
        for cid in pos + neg:
            self._remove_clause(cid)
        for r in resolvents:
            self._add_clause(r)
        return (v, pos_cls, neg_cls)


def preprocess(
    cnf: CnfFormula, freeze: tuple[int, ...] = (), max_rounds: int = 20
) -> SimplifiedCnf:
    """Simplify `cnf` by unit propagation, subsumption and elimination.

    Variables in `freeze` are never eliminated or fixed by pure-literal
    reasoning, so they can still be used as assumptions afterwards.
    """
    st = _State(cnf, frozenset(freeze))
    elim_stack: list[tuple[int, tuple, tuple]] = []
    st.propagate_units()
    st.subsume_round(set(range(1, cnf.num_vars + 1)))
    st.propagate_units()
    for _ in range(max_rounds):
        if st.unsat:
            break
        dirty = st.touched
        st.touched = set()
        changed = False
        order = sorted(
            (v for v in dirty if v not in st.fixed and v not in st.freeze),
            key=lambda v: len(st.occur.get(v, ())) * len(st.occur.get(-v, ())),
        )
        for v in order:
            rec = st.try_eliminate(v)
            if rec:
                elim_stack.append(rec)
                changed = True
                st.propagate_units()
                if st.unsat:
                    break
        if st.unsat or not changed:
            break
        st.subsume_round(set(st.touched))
        st.propagate_units()

    if st.unsat:
        return SimplifiedCnf(
            cnf=CnfFormula(cnf.num_vars, ((1,), (-1,))),
            num_vars=cnf.num_vars,
            status="UNSAT",
            fixed=st.fixed,
            elim_stack=elim_stack,
        )
    clauses = tuple(tuple(cl) for cl in st.clauses if cl is not None)
    # Frozen variables may be assumed later, so a fixed value must stay
    # visible to the solver as a unit rather than silently vanish.
    clauses += tuple(
        (v if val else -v,) for v, val in st.fixed.items() if v in st.freeze
    )
    return SimplifiedCnf(
        cnf=CnfFormula(cnf.num_vars, clauses),
        num_vars=cnf.num_vars,
        fixed=st.fixed,
        elim_stack=elim_stack,
    )
