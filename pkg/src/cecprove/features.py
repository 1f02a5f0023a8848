"""The 32-value feature vector driving runtime prediction.

Structure statistics (XOR blocks and chains, distances, degrees) are
aggregated over gate nodes; simulation statistics (stability, entropy)
come from a 4096-pattern random drive.  The vector layout is frozen:
trained models address features by index, so the order below is part of
the model-file contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .cnf import tseitin
from .sim import ones_fraction, random_sim
from .xag import GateKind, Xag

FEATURE_NAMES = (
    "num_PIs", "num_gates", "num_XOR_gates", "num_AND_gates",
    "num_CNF_vars", "num_CNF_clauses", "num_CNF_lits",
    "min_XOR_block", "max_XOR_block", "avg_XOR_block", "geo_mean_XOR_block",
    "min_XOR_chain", "max_XOR_chain", "avg_XOR_chain", "geo_mean_XOR_chain",
    "max_idis", "avg_idis", "max_odis", "avg_odis",
    "max_sum_dis", "min_sum_dis", "avg_sum_dis",
    "max_out_degree", "avg_out_degree",
    "cost_SAT", "cost_ES",
    "min_stability", "max_stability", "avg_stability",
    "min_entropy", "max_entropy", "avg_entropy",
)

NUM_FEATURES = 32
assert len(FEATURE_NAMES) == NUM_FEATURES

_COST_CAP = (1 << 63) - 1

SIM_WORDS = 64  # 4096 patterns, the same budget the sweeping phase uses


@dataclass(frozen=True)
class FeatureVector:
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != NUM_FEATURES:
            raise ValueError(f"expected {NUM_FEATURES} values, got {len(self.values)}")

    def __getitem__(self, name: str) -> float:
        return self.values[FEATURE_NAMES.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))


def xor_blocks(xag: Xag) -> list[set[int]]:
    """Connected components of XOR gates linked by direct fanin edges."""
    first = xag.first_gate
    is_xor = [False] * xag.num_nodes
    for i, g in enumerate(xag.gates):
        is_xor[first + i] = g.kind == GateKind.XOR
    parent = list(range(xag.num_nodes))

    def find(v: int) -> int:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for i, g in enumerate(xag.gates):
        z = first + i
        if not is_xor[z]:
            continue
        for fan in (g.in0, g.in1):
            if is_xor[fan.node]:
                parent[find(z)] = find(fan.node)
    comps: dict[int, set[int]] = {}
    for v in range(first, xag.num_nodes):
        if is_xor[v]:
            comps.setdefault(find(v), set()).add(v)
    return list(comps.values())


def xor_chains(xag: Xag) -> list[list[int]]:
    """Peel longest fanin-connected XOR paths until every gate is used.

    Ties break toward the lowest node index, making the decomposition
    deterministic; scoring and features both rely on this exact split.
    """
    first = xag.first_gate
    is_xor = [False] * xag.num_nodes
    xor_fanins: dict[int, list[int]] = {}
    for i, g in enumerate(xag.gates):
        z = first + i
        if g.kind != GateKind.XOR:
            continue
        is_xor[z] = True
        fans = []
        for fan in (g.in0, g.in1):
            if fan.node >= first and xag.gate_at(fan.node).kind == GateKind.XOR:
                fans.append(fan.node)
        xor_fanins[z] = fans
    remaining = {v for v in range(first, xag.num_nodes) if is_xor[v]}
    chains: list[list[int]] = []
    while remaining:
        length: dict[int, int] = {}
        best_fan: dict[int, int] = {}
        for v in sorted(remaining):  # ascending = topological for gate ids
            ln, bf = 1, -1
            for u in xor_fanins[v]:
                if u in remaining and length[u] + 1 > ln:
                    ln, bf = length[u] + 1, u
            length[v] = ln
            best_fan[v] = bf
        end = min((v for v in remaining), key=lambda v: (-length[v], v))
        chain = []
        v = end
        while v != -1:
            chain.append(v)
            v = best_fan[v]
        chain.reverse()
        chains.append(chain)
        remaining.difference_update(chain)
    return chains


def distances(xag: Xag) -> tuple[list[float], list[float]]:
    """Shortest edge counts to any PI (idis) and to the output (odis).

    Nodes outside the output cone keep odis = inf; constants sit at
    distance 0 like PIs do.
    """
    inf = math.inf
    idis = [inf] * xag.num_nodes
    idis[0] = 0.0
    for v in range(1, xag.num_pis + 1):
        idis[v] = 0.0
    first = xag.first_gate
    for i, g in enumerate(xag.gates):
        idis[first + i] = min(idis[g.in0.node], idis[g.in1.node]) + 1
    odis = [inf] * xag.num_nodes
    out = xag.output
    odis[out.node] = 0.0
    for node in range(xag.num_nodes - 1, first - 1, -1):
        d = odis[node]
        if d == inf:
            continue
        g = xag.gate_at(node)
        for fan in (g.in0, g.in1):
            if d + 1 < odis[fan.node]:
                odis[fan.node] = d + 1
    return idis, odis


def cost_estimates(xag: Xag) -> tuple[int, int]:
    """Worst-case engine costs: SAT from XOR blocks, ES from input count."""
    cost_es = 1 << xag.num_pis if xag.num_pis < 63 else _COST_CAP
    cost_sat = 0
    for block in xor_blocks(xag):
        cost_sat += 1 << len(block) if len(block) < 63 else _COST_CAP
        if cost_sat >= _COST_CAP:
            return _COST_CAP, min(cost_es, _COST_CAP)
    return cost_sat, min(cost_es, _COST_CAP)


def stability_entropy(xag: Xag, words: int = SIM_WORDS,
                      seed: int = 0) -> tuple[list[float], list[float]]:
    """Per-node signal bias statistics under a random pattern drive."""
    if words < 1:
        raise ValueError("words must be >= 1")
    p = ones_fraction(random_sim(xag, words=words, seed=seed))
    stability = []
    entropy = []
    for v in range(xag.num_nodes):
        pv = float(p[v])
        stability.append(max(pv, 1.0 - pv))
        if pv <= 0.0 or pv >= 1.0:
            entropy.append(0.0)
        else:
            entropy.append(-pv * math.log2(pv) - (1 - pv) * math.log2(1 - pv))
    return stability, entropy


def _stats(values: list[float]) -> tuple[float, float, float, float]:
    """(min, max, avg, geometric mean); every slot 0 for an empty set."""
    if not values:
        return 0.0, 0.0, 0.0, 0.0
    geo = math.exp(sum(math.log(v) for v in values) / len(values)) \
        if all(v > 0 for v in values) else 0.0
    return min(values), max(values), sum(values) / len(values), geo


def extract_features(sm, seed: int = 0) -> FeatureVector:
    """Assemble the frozen 32-entry vector for one sub-miter."""
    xag: Xag = sm.circuit
    sim_seed = (seed ^ (0x9E3779B9 * (getattr(sm, "id", 0) + 1))) & 0xFFFFFFFF

    first = xag.first_gate
    n_xor = sum(1 for g in xag.gates if g.kind == GateKind.XOR)
    n_and = xag.num_gates - n_xor

    cnf = tseitin(xag, assert_output_true=True)
    n_lits = sum(len(c) for c in cnf.clauses)

    blk = [float(len(b)) for b in xor_blocks(xag)]
    chn = [float(len(c)) for c in xor_chains(xag)]
    blk_min, blk_max, blk_avg, blk_geo = _stats(blk)
    chn_min, chn_max, chn_avg, chn_geo = _stats(chn)

    idis, odis = distances(xag)
    gate_i = []
    gate_o = []
    gate_s = []
    for v in range(first, xag.num_nodes):
        if odis[v] == math.inf or idis[v] == math.inf:
            continue  # outside the cone; sub-miters are trimmed anyway
        gate_i.append(idis[v])
        gate_o.append(odis[v])
        gate_s.append(idis[v] + odis[v])
    _, i_max, i_avg, _ = _stats(gate_i)
    _, o_max, o_avg, _ = _stats(gate_o)
    s_min, s_max, s_avg, _ = _stats(gate_s)

    fanout = xag.fanout_counts()
    deg = [float(fanout[v]) for v in range(first, xag.num_nodes)]
    _, deg_max, deg_avg, _ = _stats(deg)

    cost_sat, cost_es = cost_estimates(xag)

    stab, entr = stability_entropy(xag, seed=sim_seed)
    if xag.num_gates:
        stab_set = stab[first:]
        entr_set = entr[first:]
    else:
        # gateless cone: fall back to the output signal itself
        stab_set = [stab[xag.output.node]]
        entr_set = [entr[xag.output.node]]
    st_min, st_max, st_avg, _ = _stats(stab_set)
    en_min, en_max, en_avg, _ = _stats(entr_set)

    return FeatureVector((
        float(xag.num_pis), float(xag.num_gates), float(n_xor), float(n_and),
        float(cnf.num_vars), float(len(cnf.clauses)), float(n_lits),
        blk_min, blk_max, blk_avg, blk_geo,
        chn_min, chn_max, chn_avg, chn_geo,
        i_max, i_avg, o_max, o_avg,
        s_max, s_min, s_avg,
        deg_max, deg_avg,
        float(cost_sat), float(cost_es),
        st_min, st_max, st_avg,
        en_min, en_max, en_avg,
    ))
