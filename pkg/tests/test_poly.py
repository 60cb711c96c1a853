from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppkit.arith import PadicRing, QuadElt, hensel_sqrt, seventh_root_of_unity
from fppkit.errors import DegreeMismatch, NoSeventhRoot, ParseError
from fppkit.poly import (G3, G7, G7_WEIGHTS, Poly, all_group_elements, count_monomials,
                         g3_act, g7_act, g7_weight, monomial_basis, monomial_matrix,
                         orbit_sums, parse_equations, serialize_equations, serialize_poly)

coeffs = st.builds(QuadElt, st.builds(Fraction, st.integers(-40, 40), st.integers(1, 12)),
                   st.builds(Fraction, st.integers(-40, 40), st.integers(1, 12)))
monos2 = st.sampled_from(monomial_basis(2, 10))
quadrics = st.dictionaries(monos2, coeffs, min_size=1, max_size=6).map(lambda d: Poly(10, d))


@given(quadrics)
@settings(max_examples=60)
def test_parse_serialize_roundtrip(f):
    f = Poly(10, {m: c for m, c in f.terms.items() if c})
    if f.is_zero():
        return
    (g,) = parse_equations(serialize_poly(f), nvars=10)
    assert g == f


def test_parse_published_form():
    (f,) = parse_equations("1/8*((1 - 27*w)/29*U1*U3 + 8*U4*U7)")
    assert f.coeff((0, 1, 0, 1, 0, 0, 0, 0, 0, 0)) == QuadElt(Fraction(1, 232), Fraction(-27, 232))
    assert f.coeff((0, 0, 0, 0, 1, 0, 0, 1, 0, 0)) == 1


@pytest.mark.parametrize("text", ["U1 +", "U1*(U2", "U1 ^ x", "U1 + $"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_equations(text)


def test_inhomogeneous_rejected():
    with pytest.raises(DegreeMismatch):
        parse_equations("U0*U1 + U2")


def test_serialize_equations_roundtrip():
    polys = orbit_sums()
    assert parse_equations(serialize_equations(polys, header="orbit sums"), nvars=10) == polys


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_diff_and_eval(pt):
    x, y = Poly.var(0, 3), Poly.var(1, 3)
    f = x * x * y + y * 3
    assert f.diff(0).eval(pt) == 2 * pt[0] * pt[1]
    assert f.eval_mod(pt, 7) == f.eval(pt) % 7


def test_substitute_truncates():
    t = Poly.var(0, 2)
    f = Poly.var(0, 1) ** 3
    g = f.substitute([t + 1], maxdeg=1)
    assert g == t * 3 + 1


@pytest.mark.parametrize("d,n", [(2, 10), (5, 10), (6, 6)])
def test_monomial_counts(d, n):
    assert len(monomial_basis(d, n)) == count_monomials(d, n)


def test_monomial_matrix_matches_eval():
    pts = [(1, 2, 3), (4, 5, 6)]
    B = monomial_basis(2, 3)
    M = monomial_matrix(pts, B, 101)
    for i, x in enumerate(pts):
        for j, m in enumerate(B):
            assert M[i, j] == Poly.monomial(m).eval_mod(list(x), 101)


@pytest.fixture(scope="module")
def zeta():
    R = PadicRing.extension(11, 3, 8)
    return seventh_root_of_unity(R, int(hensel_sqrt(-7, 11, 8)))


def test_group_orders(zeta):
    ident = G3 ** 0
    assert G3**3 == ident and G3 != ident
    assert G7**7 == ident
    assert len(set(all_group_elements())) == 21


@given(st.sampled_from(monomial_basis(3, 10)), st.sampled_from(monomial_basis(2, 10)))
def test_weight_additivity(a, b):
    ab = tuple(x + y for x, y in zip(a, b))
    assert g7_weight(ab) == (g7_weight(a) + g7_weight(b)) % 7


def test_g3_normalizes_g7():
    conj = G3 @ G7 @ G3.inverse()
    assert conj in [G7**k for k in range(7)]


@given(quadrics, st.lists(st.integers(0, 10), min_size=10, max_size=10))
@settings(max_examples=30, deadline=None)
def test_action_contract(f, x):
    # (g.f)(g.x) = f(x) for every group element
    R = PadicRing.extension(11, 3, 4)
    z = seventh_root_of_unity(R, int(hensel_sqrt(-7, 11, 4)))
    s = hensel_sqrt(-7, 11, 4)
    conv = lambda c: R(int(c.a.numerator * pow(c.a.denominator, -1, R.q)  # noqa: E731
                           + c.b.numerator * pow(c.b.denominator, -1, R.q) * int(s)) % R.q) \
        if c.a.denominator % 11 and c.b.denominator % 11 else None
    fc = f.map_coeffs(conv)
    if any(c is None for c in fc.terms.values()):
        return
    xr = [R(v) for v in x]
    for g in (G3, G7, G3 @ G7):
        gf = g.apply_poly(fc, z)
        assert gf.eval(g.apply_point(xr, z)) == fc.eval(xr)


def test_g7_needs_zeta():
    with pytest.raises(NoSeventhRoot):
        g7_act(orbit_sums()[1], None)


def test_orbit_sums_are_g3_invariant_and_weight_zero_only_for_u0():
    L = orbit_sums()
    assert all(g3_act(f) == f for f in L)
    assert {g7_weight(m) for m in L[0].terms} == {0}
    assert G7_WEIGHTS[1:4] == (6, 5, 3)
