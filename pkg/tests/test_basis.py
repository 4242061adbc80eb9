from itertools import product
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import two_body
from syknqs.basis import ANNIHILATED, apply_two_body, build_sector_basis, popcount


def test_two_site_sector():
    b = build_sector_basis(2, 1)
    assert list(b.states) == [0b01, 0b10]
    assert len(b) == 2


def test_sizes():
    assert build_sector_basis(4, 2).dim == 6
    assert build_sector_basis(18, 9).dim == comb(18, 9) == 48620


@pytest.mark.parametrize("L,n", [(1, 0), (1, 1), (5, 2), (8, 4), (10, 3), (12, 6)])
def test_invariants(L, n):
    b = build_sector_basis(L, n)
    assert b.dim == comb(L, n)
    assert np.all(popcount(b.states) == n)
    assert np.all(np.diff(b.states) > 0)
    assert np.array_equal(b.rank_index(b.states), np.arange(b.dim))
    brute = [w for w in range(1 << L) if bin(w).count("1") == n]
    assert list(b.states) == brute


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 20).flatmap(lambda L: st.tuples(st.just(L), st.integers(0, L))), st.data())
def test_rank_matches_binary_search(Ln, data):
    L, n = Ln
    b = build_sector_basis(L, n)
    idx = data.draw(st.lists(st.integers(0, b.dim - 1), min_size=1, max_size=20))
    words = b.states[idx]
    assert np.array_equal(b.rank_index(words), np.searchsorted(b.states, words))
    assert b.rank_index(int(words[0])) == idx[0]


@pytest.mark.parametrize("L,n", [(0, 0), (31, 3), (4, 5), (4, -1)])
def test_bad_arguments(L, n):
    with pytest.raises(ValueError):
        build_sector_basis(L, n)


def test_number_operator_string():
    out = apply_two_body(0b0011, 0, 1, 1, 0)
    assert (out.word, out.sign) == (0b0011, 1)


def test_annihilate_empty():
    # sites 2,3 occupied; c_0 hits an empty site
    assert apply_two_body(0b1100, 0, 1, 1, 0) is ANNIHILATED


def test_five_site_example():
    word = 0b01101  # sites 0, 2, 3 occupied
    out = apply_two_body(word, 1, 4, 2, 0)
    expected = two_body(word, 1, 4, 2, 0, 5)
    assert (out.word, out.sign) == expected
    assert out.word == 0b11010
    # c_0: no sites below -> +1; c_2: none occupied below after removal -> +1;
    # c†_4: sites 3 occupied below -> -1; c†_1: none below -> +1
    assert out.sign == -1


def test_index_out_of_range():
    with pytest.raises(ValueError):
        apply_two_body(0b11, 0, 1, 2, 0, L=2)
    with pytest.raises(ValueError):
        apply_two_body(0b11, -1, 1, 1, 0)


@pytest.mark.parametrize("L", [1, 2, 3, 4, 5])
def test_exhaustive_against_symbolic_oracle(L):
    mismatches = 0
    for word in range(1 << L):
        for i, j, k, l in product(range(L), repeat=4):
            out = apply_two_body(word, i, j, k, l, L)
            ref = two_body(word, i, j, k, l, L)
            got = None if out.annihilated else (out.word, out.sign)
            mismatches += got != ref
            if got is not None:
                assert bin(got[0]).count("1") == bin(word).count("1")
    assert mismatches == 0


def _element(bra, ket, i, j, k, l, L):
    out = apply_two_body(ket, i, j, k, l, L)
    return 0 if out.annihilated or out.word != bra else out.sign


def test_adjoint_consistency():
    L = 5
    for w, w2 in product(range(1 << L), repeat=2):
        if bin(w).count("1") != bin(w2).count("1"):
            continue
        for i, j, k, l in [(0, 1, 2, 3), (4, 2, 1, 0), (1, 3, 3, 1), (2, 0, 4, 1)]:
            assert _element(w2, w, i, j, k, l, L) == _element(w, w2, l, k, j, i, L)
