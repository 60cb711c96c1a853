from __future__ import annotations

import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppkit.arith import QuadElt, embed_int, hensel_sqrt
from fppkit.errors import NoUnitEntry, RecognitionFailed
from fppkit.linalg import det_bareiss, rref
from fppkit.reconstruct import (gram_schmidt, is_lll_reduced, lll, rationalize_vector,
                                recognize_quad)

P, E = 11, 21
Q = P**E
S = int(hensel_sqrt(-7, P, E))


def _random_basis(rng: random.Random, n: int):
    while True:
        B = [[rng.randint(-50, 50) for _ in range(n)] for _ in range(n)]
        if det_bareiss(B):
            return B


def _coords(B, v):
    """Coordinates of v in the row basis B."""
    n = len(B)
    aug = [[Fraction(B[j][i]) for j in range(n)] + [Fraction(v[i])] for i in range(n)]
    R, _, _ = rref(aug)
    return [R[i][n] for i in range(n)]


def test_lll_on_seeded_bases():
    for seed in range(1000):
        rng = random.Random(seed)
        B = _random_basis(rng, 3)
        red = lll(B)
        assert is_lll_reduced(red)
        assert abs(det_bareiss(red)) == abs(det_bareiss(B))
        # same lattice: each reduced vector has integral coordinates in B
        for v in red:
            assert all(c.denominator == 1 for c in _coords(B, v))


@pytest.mark.parametrize("seed", range(5))
def test_gram_determinant(seed):
    B = _random_basis(random.Random(seed), 4)
    bsq, _ = gram_schmidt(B)
    prod = Fraction(1)
    for x in bsq:
        prod *= x
    assert prod == det_bareiss(B) ** 2


@pytest.mark.parametrize("x", [
    QuadElt(Fraction(1, 2), Fraction(1, 2)),
    QuadElt(Fraction(-27, 232), Fraction(1, 232)),
    QuadElt(Fraction(149, 10), Fraction(-197, 70)),
    QuadElt(3),
    QuadElt(0, 1),
])
def test_recognize_examples(x):
    assert recognize_quad(embed_int(x, S, P, Q), S, Q) == x


@given(st.integers(-10**4, 10**4), st.integers(-10**4, 10**4), st.integers(1, 10**4))
@settings(max_examples=100)
def test_recognize_small_heights(u, v, c):
    if c % P == 0:
        return
    x = QuadElt(Fraction(u, c), Fraction(v, c))
    assert recognize_quad(embed_int(x, S, P, Q), S, Q) == x


def test_random_residues_fail():
    rng = random.Random(0)
    failures = 0
    for _ in range(100):
        try:
            recognize_quad(rng.randrange(Q), S, Q)
        except RecognitionFailed:
            failures += 1
    assert failures == 100


def test_conjugate_branch():
    x = QuadElt(Fraction(3, 5), Fraction(-2, 7))
    a = embed_int(x, S, P, Q)
    assert recognize_quad(a, -S % Q, Q) == x.conjugate()


@given(st.lists(st.tuples(st.integers(-99, 99), st.integers(-99, 99)), min_size=1, max_size=8))
@settings(max_examples=50)
def test_rationalize_roundtrip(pairs):
    xs = [QuadElt(1)] + [QuadElt(a, b) / 3 for a, b in pairs]
    lam = 12345
    v = [embed_int(x, S, P, Q) * lam % Q for x in xs]
    assert rationalize_vector(v, S, Q) == xs


def test_rationalize_needs_unit():
    with pytest.raises(NoUnitEntry):
        rationalize_vector([0, P, P**2], S, Q)
