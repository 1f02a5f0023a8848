import numpy as np
from hypothesis import given, settings, strategies as st

from cecprove.eval import evaluate
from cecprove.sim import ones_fraction, random_pi_words, random_sim, simulate
from cecprove.xag import XagBuilder, random_xag


def test_random_pi_words_shape_and_determinism():
    w = random_pi_words(5, 8, seed=3)
    assert w.shape == (5, 8) and w.dtype == np.uint64
    assert np.array_equal(w, random_pi_words(5, 8, seed=3))
    assert not np.array_equal(w, random_pi_words(5, 8, seed=4))


def test_simulate_bit_convention():
    # bit b of word w on row i is PI i+1's value for pattern 64*w + b
    b = XagBuilder(2)
    g = b.add_and(b.pi(1), b.pi(2))
    x = b.finish([g])
    pis = random_pi_words(2, 4, seed=9)
    vals = simulate(x, pis)
    for w in range(4):
        for bit in (0, 17, 63):
            bits = [(int(pis[i, w]) >> bit) & 1 for i in range(2)]
            want = evaluate(x, bits)
            got = (int(vals[g.node, w]) >> bit) & 1
            assert got == want


@given(st.integers(0, 300), st.integers(1, 4))
@settings(max_examples=25, deadline=None)
def test_simulate_agrees_with_evaluate(seed, words):
    x = random_xag(5, 30, seed)
    pis = random_pi_words(x.num_pis, words, seed=seed + 1)
    vals = simulate(x, pis)
    out = x.output
    for w in range(words):
        for bit in (0, 31, 63):
            bits = [(int(pis[i, w]) >> bit) & 1 for i in range(x.num_pis)]
            got = (int(vals[out.node, w]) >> bit) & 1
            if out.neg:
                got ^= 1
            assert got == evaluate(x, bits)


def test_constant_and_pi_rows():
    x = random_xag(3, 10, seed=0)
    pis = random_pi_words(3, 2, seed=0)
    vals = simulate(x, pis)
    assert int(vals[0, 0]) == 0  # node 0 is constant false
    assert np.array_equal(vals[1:4], pis)


def test_random_sim_wrapper():
    x = random_xag(4, 20, seed=5)
    v1 = random_sim(x, words=3, seed=11)
    v2 = random_sim(x, words=3, seed=11)
    assert np.array_equal(v1, v2)
    assert v1.shape == (x.num_nodes, 3)


def test_ones_fraction():
    rows = np.array([[0, 0xFFFFFFFFFFFFFFFF], [0, 0]], dtype=np.uint64)
    frac = ones_fraction(rows)
    assert frac.shape == (2,)
    assert frac[0] == 0.5 and frac[1] == 0.0
