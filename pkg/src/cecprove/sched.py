"""Runtime prediction and thread allocation across the three engines.

Exhaustive-simulation time comes from a closed-form model; SAT and BDD
times come from trained tree ensembles loaded from JSON, with graceful
fallbacks when no model file is given.  The allocation policy applies,
in order: an easy-case short circuit, the single-thread selection
heuristic, per-engine feasibility gates, and three regimes of the ratio
between predicted SAT and pooled ES time.  Dispatch then races the
planned engines and publishes the first definitive verdict.
"""

from __future__ import annotations

import json
import math
import threading
import time
from dataclasses import dataclass

from .features import FEATURE_NAMES, FeatureVector, cost_estimates
from .verdict import COUNTEREXAMPLE, EQUIVALENT, UNKNOWN, CheckResult

ALPHA = 0.0003
BETA = 23
GAMMA = 1.5  # ES feasibility margin on the per-thread estimate
PHI = 0.8  # BDD must beat this fraction of the SAT estimate
EASY_ES_PER_THREAD = 0.1
PRED_CAP = 1200.0


class MalformedModel(ValueError):
    pass


def analytic_es_time(num_gates: int, num_pis: int, alpha: float = ALPHA,
                     beta: int = BETA) -> float:
    """Closed-form sweep-time estimate; refit alpha/beta against measured
    fixtures when porting to new hardware."""
    return alpha * num_gates * 2.0 ** (num_pis - beta)


@dataclass(frozen=True)
class TreeEnsemble:
    base_score: float
    trees: tuple[tuple[dict, ...], ...]  # each tree: nodes, root at index 0

    def predict(self, f: FeatureVector) -> float:
        return predict(self, f)


@dataclass(frozen=True)
class Predictions:
    t_sat: float
    t_bdd: float
    t_es: float

    def __post_init__(self) -> None:
        for name in ("t_sat", "t_bdd", "t_es"):
            v = getattr(self, name)
            if not (v >= 0.0):
                raise ValueError(f"{name} must be >= 0, got {v}")
            object.__setattr__(self, name, min(float(v), PRED_CAP))


@dataclass(frozen=True)
class EnginePlan:
    sat_threads: int = 0
    es_threads: int = 0
    bdd_threads: int = 0
    es_on_device: bool = False  # reserved for offload targets; never set
    selected_single: str | None = None  # "SAT" | "ES" when chosen by selection alone


def _validate_tree(nodes) -> tuple[dict, ...]:
    if not isinstance(nodes, list) or not nodes:
        raise MalformedModel("tree must be a non-empty node list")
    out = []
    for nd in nodes:
        if not isinstance(nd, dict):
            raise MalformedModel("tree node must be an object")
        if "v" in nd:
            out.append({"v": float(nd["v"])})
            continue
        for k in ("f", "t", "l", "r"):
            if k not in nd:
                raise MalformedModel(f"split node missing {k!r}")
        f = int(nd["f"])
        if not 0 <= f < len(FEATURE_NAMES):
            raise MalformedModel(f"feature index {f} out of range")
        l, r = int(nd["l"]), int(nd["r"])
        if not (0 <= l < len(nodes) and 0 <= r < len(nodes)):
            raise MalformedModel("child index out of range")
        out.append({"f": f, "t": float(nd["t"]), "l": l, "r": r})
    return tuple(out)


def parse_ensemble(doc: dict) -> TreeEnsemble:
    if not isinstance(doc, dict):
        raise MalformedModel("model document must be an object")
    if doc.get("version") != 1:
        raise MalformedModel(f"unsupported model version {doc.get('version')!r}")
    names = doc.get("feature_names")
    if list(names or ()) != list(FEATURE_NAMES):
        raise MalformedModel("feature_names does not match the frozen order")
    trees = tuple(_validate_tree(t.get("nodes")) for t in doc.get("trees", []))
    return TreeEnsemble(float(doc.get("base_score", 0.0)), trees)


def load_model(path: str) -> dict[str, TreeEnsemble]:
    """Read a model file: either {"SAT": doc, "BDD": doc} or one bare doc
    (treated as the SAT model; BDD then stays on its fallback)."""
    with open(path) as fh:
        raw = json.load(fh)
    if isinstance(raw, dict) and "feature_names" in raw:
        return {"SAT": parse_ensemble(raw)}
    if not isinstance(raw, dict) or not raw:
        raise MalformedModel("model file must hold engine-keyed documents")
    out = {}
    for engine, doc in raw.items():
        if engine not in ("SAT", "BDD"):
            raise MalformedModel(f"unknown engine key {engine!r}")
        out[engine] = parse_ensemble(doc)
    return out


def predict(ensemble: TreeEnsemble, f: FeatureVector) -> float:
    total = ensemble.base_score
    for nodes in ensemble.trees:
        i = 0
        steps = 0
        while "v" not in nodes[i]:
            nd = nodes[i]
            i = nd["l"] if f.values[nd["f"]] < nd["t"] else nd["r"]
            steps += 1
            if steps > len(nodes):
                raise MalformedModel("cyclic tree")
        total += nodes[i]["v"]
    return min(max(total, 0.0), PRED_CAP)


def make_predictions(fv: FeatureVector, models: dict[str, TreeEnsemble] | None
                     ) -> Predictions:
    """Model-based SAT/BDD estimates with analytic fallbacks.

    Without a SAT model the cost_SAT structure estimate is scaled by the
    same alpha as the ES model; without a BDD model the estimate pins to
    the cap, which the feasibility rule can never accept.
    """
    num_gates = fv["num_gates"]
    num_pis = fv["num_PIs"]
    t_es = analytic_es_time(int(num_gates), int(num_pis))
    models = models or {}
    if "SAT" in models:
        t_sat = predict(models["SAT"], fv)
    else:
        t_sat = ALPHA * fv["cost_SAT"]
    t_bdd = predict(models["BDD"], fv) if "BDD" in models else PRED_CAP
    return Predictions(t_sat=min(t_sat, PRED_CAP), t_bdd=t_bdd,
                       t_es=min(t_es, PRED_CAP))


def selection_plan(cost_sat: float, cost_es: float, n: int) -> EnginePlan:
    """All n threads to the engine the structural cost ratio favours.

    This is the whole policy of the earlier hybrid tools: SAT when
    cost_SAT <= cost_ES, ES otherwise, nothing else considered.  The
    n = 1 case of plan_allocation and the selection-only ablation mode
    both reduce to it.
    """
    if cost_sat <= cost_es:
        return EnginePlan(sat_threads=n, selected_single="SAT")
    return EnginePlan(es_threads=n, selected_single="ES")


def plan_allocation(n: int, p: Predictions, cutoff: float,
                    cost_sat: float = 0.0, cost_es: float = 1.0) -> EnginePlan:
    """Distribute n threads; rules apply strictly in order."""
    if n < 1:
        raise ValueError("need at least one thread")
    if p.t_es / n <= EASY_ES_PER_THREAD:
        return EnginePlan(es_threads=n,
                          selected_single="ES" if n == 1 else None)
    if n == 1:
        return selection_plan(cost_sat, cost_es, 1)

    es_ok = p.t_es / n <= GAMMA * cutoff
    bdd_ok = p.t_bdd < PHI * p.t_sat

    rho = p.t_sat / (n * p.t_es)
    if rho < 0.5:
        es = 1 if es_ok else 0
        bdd = 1 if bdd_ok and n - es >= 2 else 0  # SAT keeps >= 1 thread
        return EnginePlan(sat_threads=n - es - bdd, es_threads=es,
                          bdd_threads=bdd)
    if rho <= 2.0:
        es = n // 2 if es_ok else 0
        sat = n - es
        bdd = 0
        if bdd_ok and sat >= 2:
            sat -= 1
            bdd = 1
        return EnginePlan(sat_threads=sat, es_threads=es, bdd_threads=bdd)
    bdd = 1 if bdd_ok else 0
    if es_ok:
        return EnginePlan(sat_threads=1, bdd_threads=bdd,
                          es_threads=n - 1 - bdd)
    return EnginePlan(sat_threads=n - bdd, bdd_threads=bdd)


def dispatch(sm, plan: EnginePlan, budget: float | None = None,
             bdd_max_nodes: int | None = None, seed: int = 0) -> CheckResult:
    """Race the planned engines; the first settled verdict cancels the rest."""
    from .bdd import BddLimits, bdd_check
    from .es import es_check
    from .partition import sat_check

    stop = threading.Event()
    lock = threading.Lock()
    settled: list[CheckResult] = []
    leftovers: dict[str, CheckResult] = {}

    def publish(r: CheckResult) -> None:
        with lock:
            if r.verdict != UNKNOWN:
                if not settled:
                    settled.append(r)
                    stop.set()
            else:
                leftovers[r.engine or "?"] = r

    jobs = []
    if plan.sat_threads > 0:
        jobs.append(lambda: sat_check(sm, threads=plan.sat_threads,
                                      budget=budget, cancel=stop.is_set,
                                      seed=seed))
    if plan.es_threads > 0:
        jobs.append(lambda: es_check(sm, workers=plan.es_threads,
                                     budget=budget, cancel=stop.is_set))
    if plan.bdd_threads > 0:
        limits = BddLimits(max_nodes=bdd_max_nodes) if bdd_max_nodes \
            else BddLimits()
        jobs.append(lambda: bdd_check(sm, limits=limits, budget=budget,
                                      cancel=stop.is_set))
    if not jobs:
        raise ValueError("plan enables no engine")

    def run(job) -> None:
        try:
            publish(job())
        except Exception as exc:  # an engine bug must not hang the race
            publish(CheckResult(UNKNOWN, reason=f"error: {exc}", engine="?"))

    threads = [threading.Thread(target=run, args=(j,)) for j in jobs]
    for t in threads:
        t.start()
    for t in threads:
        t.join()

    if settled:
        return settled[0]
    reasons = {r.reason for r in leftovers.values()}
    reason = "timeout" if "timeout" in reasons else \
        (sorted(reasons)[0] if reasons else "")
    stats = {"engines": {k: dict(r.stats, reason=r.reason)
                         for k, r in leftovers.items()}}
    return CheckResult(UNKNOWN, reason=reason, stats=stats)


def auto_check(sm, threads: int, cutoff: float,
               models: dict[str, TreeEnsemble] | None = None,
               seed: int = 0, budget: float | None = None,
               bdd_max_nodes: int | None = None,
               select_only: bool = False) -> CheckResult:
    """Extract features, predict, plan, dispatch: the full hybrid path.

    select_only skips prediction and allocation entirely and falls back
    to the bare cost-ratio engine choice with all threads.
    """
    from .features import extract_features

    fv = extract_features(sm, seed=seed)
    if select_only:
        p = None
        plan = selection_plan(fv["cost_SAT"], fv["cost_ES"], threads)
    else:
        p = make_predictions(fv, models)
        plan = plan_allocation(threads, p, cutoff,
                               cost_sat=fv["cost_SAT"], cost_es=fv["cost_ES"])
    r = dispatch(sm, plan, budget=budget if budget is not None else cutoff,
                 bdd_max_nodes=bdd_max_nodes, seed=seed)
    r.stats.setdefault("plan", {"sat": plan.sat_threads, "es": plan.es_threads,
                                "bdd": plan.bdd_threads,
                                "single": plan.selected_single})
    if p is not None:
        r.stats.setdefault("predictions", {"t_sat": p.t_sat, "t_bdd": p.t_bdd,
                                           "t_es": p.t_es})
    return r
