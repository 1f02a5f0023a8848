"""Word-parallel random simulation shared by sweeping and feature extraction.

Each node gets a row of 64-bit words; bit b of word w is the node's value
under pattern w*64+b.  Callers either supply the PI words (replaying a
counterexample neighbourhood) or ask for seeded random ones.
"""

from __future__ import annotations

import numpy as np

from .xag import GateKind, Xag


def random_pi_words(num_pis: int, words: int, seed: int) -> np.ndarray:
    """(num_pis, words) matrix of random words; row i drives PI i+1."""
    rng = np.random.default_rng(seed)
    return rng.integers(0, 1 << 64, size=(num_pis, words), dtype=np.uint64)


def simulate(xag: Xag, pi_words: np.ndarray) -> np.ndarray:
    """Value words for every node under the given PI drive."""
    if pi_words.shape[0] != xag.num_pis:
        raise ValueError(f"expected {xag.num_pis} PI rows, got {pi_words.shape[0]}")
    words = pi_words.shape[1]
    vals = np.zeros((xag.num_nodes, words), dtype=np.uint64)
    vals[1:xag.num_pis + 1] = pi_words
    ones = np.uint64(0xFFFFFFFFFFFFFFFF)
    base = xag.first_gate
    for i, g in enumerate(xag.gates):
        a = vals[g.in0.node]
        if g.in0.neg:
            a = a ^ ones
        b = vals[g.in1.node]
        if g.in1.neg:
            b = b ^ ones
        vals[base + i] = (a & b) if g.kind == GateKind.AND else (a ^ b)
    return vals


def random_sim(xag: Xag, words: int = 64, seed: int = 0) -> np.ndarray:
    return simulate(xag, random_pi_words(xag.num_pis, words, seed))


def ones_fraction(vals: np.ndarray) -> np.ndarray:
    """Per-node fraction of 1-bits across all simulated patterns."""
    counts = np.bitwise_count(vals).sum(axis=1, dtype=np.int64)
    return counts / float(vals.shape[1] * 64)
