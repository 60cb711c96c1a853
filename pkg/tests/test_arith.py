from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppkit.arith import (PadicElt, PadicRing, QuadElt, W, crt_pair, embed_int, embed_quad,
                          hensel_sqrt, is_irreducible, parse_quad, serialize_quad,
                          seventh_root_of_unity, smallest_irreducible, sqrt_mod_prime)
from fppkit.errors import BadPrime, NotAResidue, Ramified

small = st.integers(-50, 50)
rats = st.builds(Fraction, small, st.integers(1, 30))
quads = st.builds(QuadElt, rats, rats)


@given(quads, quads, quads)
def test_quad_ring_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x


@given(quads)
def test_quad_inverse(x):
    if x:
        assert x * x.inverse() == QuadElt(1)
        assert x / x == 1


def test_w_squared():
    assert W * W == QuadElt(-7)
    assert W.conjugate() == -W
    assert (QuadElt(1, 1) / 2).norm() == 2


@given(quads)
def test_serialize_roundtrip(x):
    assert parse_quad(serialize_quad(x)) == x


@pytest.mark.parametrize("p", [11, 23, 43])
def test_sqrt_mod_prime(p):
    r = sqrt_mod_prime(-7 % p, p)
    assert r * r % p == -7 % p


def test_non_residue():
    with pytest.raises(NotAResidue):
        sqrt_mod_prime(2, 11)


@pytest.mark.parametrize("branch", ["small", "large"])
def test_hensel_sqrt(branch):
    s = hensel_sqrt(-7, 11, 21, branch)
    assert s * s == s.ring(-7)
    assert (int(s) % 11 == 2) == (branch == "small")


def test_hensel_sqrt_ramified():
    with pytest.raises(Ramified):
        hensel_sqrt(11, 11, 5)


@given(quads, quads)
@settings(max_examples=50)
def test_embedding_is_a_ring_map(x, y):
    p, q = 11, 11**21
    s = int(hensel_sqrt(-7, p, 21))
    try:
        ex, ey = embed_int(x, s, p, q), embed_int(y, s, p, q)
        exy = embed_int(x * y, s, p, q)
    except BadPrime:
        return
    assert exy == ex * ey % q
    assert embed_int(x + y, s, p, q) == (ex + ey) % q
    assert int(embed_quad(x, hensel_sqrt(-7, p, 21))) == ex


def test_bad_prime():
    with pytest.raises(BadPrime):
        embed_int(Fraction(1, 11), 2, 11, 11**3)


@pytest.mark.parametrize("k", [2, 3])
def test_smallest_irreducible(k):
    f = smallest_irreducible(11, k)
    assert is_irreducible(f, 11)


def test_extension_inverse_and_frobenius():
    R = PadicRing.extension(11, 3, 6)
    x = R((3, 5, 7))
    assert x * x.inverse() == R.one
    F = R.residue_field()
    y = F((3, 5, 7))
    assert y.frobenius().frobenius().frobenius() == y


@pytest.mark.parametrize("p,k", [(11, 3), (43, 1)])
def test_seventh_root(p, k):
    R = PadicRing.extension(p, k, 12) if k > 1 else PadicRing(p, 12)
    s = int(hensel_sqrt(-7, p, 12))
    z = seventh_root_of_unity(R, s)
    assert z**7 == R.one and z != R.one
    # Gauss sum identity pins zeta up to the squaring automorphism
    assert z + z**2 + z**4 == R((s - 1) * pow(2, -1, R.q) % R.q)


def test_crt_pair():
    x, m = crt_pair(2, 5, 3, 7)
    assert (x % 5, x % 7, m) == (2, 3, 35)


def test_padic_valuation():
    R = PadicRing(11, 5)
    assert R(121 * 3).valuation() == 2
    assert not R(0) and R(0).valuation() == 5
    assert isinstance(R(3) * 2, PadicElt)


def test_canonical_root_mod_121():
    assert int(hensel_sqrt(-7, 11, 1)) == 2
    assert int(hensel_sqrt(-7, 11, 2)) == 90


@pytest.mark.parametrize("x,residue", [
    (QuadElt(1, 1) / 2, 7),
    (QuadElt(-5, 1), 8),
    (QuadElt(4, -4), 7),
    (QuadElt(-4), 7),
])
def test_cut_coefficients_reduce_to_triples(x, residue):
    assert embed_int(x, 2, 11, 11) == residue
