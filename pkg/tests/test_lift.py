from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppkit.arith import QuadElt
from fppkit.errors import CountTooLarge, CutNotRigid, Inconsistent, SingularSeed
from fppkit.lift import (Block, LiftProblem, curve_point_family, digits_chooser, hensel,
                         lift_cut_system, lift_point, linearize, random_chooser)
from fppkit.poly import Poly, orbit_sums
from fppkit.reconstruct import recognize_quad
from fppkit.scheme import Embedding

P = 11
X, Y = Poly.var(0, 2), Poly.var(1, 2)
ELLIPTIC = Y * Y - X * X * X - X
ELL_POINTS = [(x, y) for x in range(P) for y in range(P)
              if (y * y - x**3 - x) % P == 0 and ((3 * x * x + 1) % P or y % P)]


def _elliptic(e: int) -> LiftProblem:
    return LiftProblem([ELLIPTIC], [Block("x", "point", 2)], P, e)


@given(st.sampled_from(ELL_POINTS), st.integers(0, 10**6), st.integers(2, 12))
@settings(max_examples=40)
def test_hensel_telescoping(seed, rs, e):
    prob = _elliptic(e + 1)
    hi = hensel(prob, list(seed), e + 1, random_chooser(rs, P))
    lo = hensel(prob, list(seed), e, random_chooser(rs, P))
    assert [v % P**e for v in hi] == lo
    assert ELLIPTIC.eval_mod(hi, P ** (e + 1)) == 0
    assert [v % P for v in lo] == list(seed)


def test_hensel_rejects_non_points():
    with pytest.raises(Inconsistent):
        linearize(_elliptic(4), [1, 1])


def test_hensel_precision_guard():
    with pytest.raises(ValueError):
        hensel(_elliptic(4), list(ELL_POINTS[0]), 5)


def test_digits_chooser():
    ch = digits_chooser(5 + 3 * P, P)
    assert ch(1, 2) == [5, 0] and ch(2, 2) == [3, 0]


def test_curve_point_family_distinct():
    prob = _elliptic(6)
    seed = list(ELL_POINTS[1])
    fam = curve_point_family(prob, seed, 4, 20)
    pts = [f["x"] for f in fam]
    assert len(set(pts)) == 20
    later = curve_point_family(prob, seed, 4, 5, start=20)
    assert not {f["x"] for f in later} & set(pts)


def test_curve_point_family_count_limit():
    with pytest.raises(CountTooLarge):
        curve_point_family(_elliptic(3), list(ELL_POINTS[1]), 2, P + 1)


def test_lift_point_on_toy(toy_scheme, toy_pool, emb):
    for x in toy_pool.points[:5]:
        y = lift_point(toy_scheme, x, emb.at(8))
        assert toy_scheme.contains_mod(y, emb.at(8))
        assert tuple(v % P for v in y) == x


def test_lift_point_singular_seed(toy_scheme, toy_pool, emb):
    with pytest.raises(SingularSeed):
        lift_point(toy_scheme, toy_pool.points[0], emb.at(4), codim=8)


def _cut_points(toy, toy_ctx):
    L = toy.designed_cut()
    return [x for x in toy_ctx.pool.on(L, toy_ctx.emb)]


def test_lift_cut_recognizes_design(toy, toy_scheme, toy_ctx):
    E = Embedding(P, 10, "small")
    L0, *Ls = orbit_sums()
    pts = _cut_points(toy, toy_ctx)
    res = lift_cut_system(toy_scheme, L0, Ls, (7, 0, 0), pts[:3], E, extra_points=pts[3:])
    got = tuple(recognize_quad(a, E.s, E.q) for a in res.coefficients)
    assert got == (QuadElt(1, 1) / 2, QuadElt(0), QuadElt(0))


def test_lift_cut_not_rigid(toy, toy_scheme, toy_ctx):
    E = Embedding(P, 6, "small")
    L0, *Ls = orbit_sums()
    pts = _cut_points(toy, toy_ctx)
    with pytest.raises(CutNotRigid):
        lift_cut_system(toy_scheme, L0, Ls, (7, 0, 0), pts[:1], E, max_points=1)
