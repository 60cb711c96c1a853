from __future__ import annotations

import itertools
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fppkit import linalg
from fppkit.arith import PadicElt, PadicRing, QuadElt, smallest_irreducible
from fppkit.errors import PrecisionExhausted
from fppkit.pipelines.context import cut_curve_sampler, quadric_basis, rows, surface_sampler

small_mats = st.integers(1, 5).flatmap(lambda n: st.integers(1, 5).flatmap(
    lambda m: st.lists(st.lists(st.integers(-6, 6), min_size=m, max_size=m),
                       min_size=n, max_size=n)))


def test_rank_nullity_exhaustive_f2():
    for bits in itertools.product((0, 1), repeat=9):
        A = np.array(bits).reshape(3, 3)
        N = linalg.nullspace_mod(A, 2)
        assert linalg.rank_mod(A, 2) + N.shape[0] == 3
        assert not np.any(A.dot(N.T) % 2)


@given(small_mats)
def test_rref_over_rationals(M):
    F = [[Fraction(x) for x in r] for r in M]
    _, rk, _ = linalg.rref(F)
    N = linalg.nullspace(F)
    assert rk + len(N) == len(M[0])
    for v in N:
        assert all(sum(a * b for a, b in zip(r, v)) == 0 for r in F)


@given(small_mats, st.sampled_from([5, 7, 11]))
def test_nullspace_mod_and_solver(M, p):
    A = np.array(M) % p
    S = linalg.ModPSolver(A, p)
    assert S.rank == linalg.rank_mod(A, p)
    assert not np.any(A.dot(S.kernel.T) % p)
    x = np.arange(A.shape[1]) % p
    b = A.dot(x) % p
    y = S.solve(b)
    assert y is not None and np.array_equal(A.dot(y) % p, b)


def test_solver_inconsistent():
    S = linalg.ModPSolver([[1, 0], [1, 0]], 7)
    assert S.solve([1, 2]) is None


def test_rref_over_quad_field():
    w = QuadElt(0, 1)
    M = [[QuadElt(1), w], [w, QuadElt(-7)]]
    assert linalg.rank(M) == 1


@given(small_mats, st.integers(2, 6))
@settings(max_examples=60)
def test_smith_kernel_vectors(M, e):
    p = 3
    q = p**e
    A = np.array(M, dtype=object) % q
    sd = linalg.smith_mod(A, p, e)
    assert sd.valuations == sorted(sd.valuations)
    for v in sd.kernel_basis():
        assert not any(int(x) for x in A.dot(np.array(v, dtype=object)) % q)
        assert any(x % p for x in v)


def test_padic_nullspace_certificate():
    p, e = 11, 6
    M = [[1, 0, 0], [0, p**4, 0]]
    ns = linalg.padic_nullspace(M, p, e, margin=1, strict=False)
    assert ns.dim == 1 and ns.certified
    with pytest.raises(PrecisionExhausted):
        linalg.padic_nullspace(M, p, e, margin=2)


def _ext_stack(entries, k):
    rows_, cols = len(entries), len(entries[0])
    out = np.zeros((k, rows_, cols), dtype=object)
    for i, r in enumerate(entries):
        for j, x in enumerate(r):
            for t in range(k):
                out[t, i, j] = x.c[t]
    return out


@pytest.mark.parametrize("seed", range(5))
def test_smith_ext_against_expansion_on_galois_stable_rows(seed):
    # Frobenius-closed rows span a subspace defined over F_p
    p, k = 11, 3
    f = smallest_irreducible(p, k)
    F = PadicRing(p, 1, f)
    rng = random.Random(seed)
    ncols = 6
    entries = []
    for _ in range(rng.choice([1, 2])):
        r = [F([rng.randrange(p) for _ in range(k)]) for _ in range(ncols)]
        for _ in range(k):
            entries.append(r)
            r = [x.frobenius() for x in r]
    ext = ncols - len(linalg.smith_ext(_ext_stack(entries, k), p, 1, f))
    scalar = ncols - linalg.rank_mod(linalg.expand_extension_rows(entries).astype(np.int64), p)
    assert ext == scalar


@given(small_mats, st.integers(2, 5))
@settings(max_examples=30, deadline=None)
def test_smith_ext_on_scalar_rows(M, e):
    p, k = 11, 3
    f = smallest_irreducible(p, k)
    A = np.zeros((k,) + np.array(M).shape, dtype=object)
    A[0] = np.array(M, dtype=object)
    assert linalg.smith_ext(A, p, e, f) == linalg.smith_mod(A[0], p, e).valuations


def test_smith_ext_planted_kernel():
    # R-kernel of dimension 3 even though the scalar kernel is trivial
    p, e, k = 11, 6, 3
    f = smallest_irreducible(p, k)
    R = PadicRing(p, e, f)
    rng = random.Random(1)
    ncols = 6
    twisted = [[R([rng.randrange(R.q) for _ in range(k)]) for _ in range(ncols)]
               for _ in range(3)]
    assert ncols - len(linalg.smith_ext(_ext_stack(twisted, k), p, e, f)) == 3
    scalar = linalg.smith_mod(linalg.expand_extension_rows(twisted), p, e, want_transform=False)
    assert ncols - scalar.rank == 0


@given(small_mats, st.integers(2, 5))
@settings(max_examples=40, deadline=None)
def test_smith_ext_reduces_to_smith_mod_for_k1(M, e):
    p = 5
    A = np.array(M, dtype=object)[None, :, :]
    assert linalg.smith_ext(A, p, e, [0, 1]) == linalg.smith_mod(A[0], p, e).valuations


@given(st.integers(1, 5).flatmap(lambda n: st.lists(
    st.lists(st.integers(-9, 9), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_bareiss_matches_berkowitz(M):
    assert linalg.det_bareiss(M) == linalg.det_berkowitz(M)
    Q = [[QuadElt(x, x % 3) for x in r] for r in M]
    assert linalg.det_bareiss(Q) == linalg.det_berkowitz(Q)


def test_det_over_extension_ring():
    R = PadicRing.extension(11, 3, 4)
    rng = random.Random(3)
    M = [[R([rng.randrange(R.q) for _ in range(3)]) for _ in range(3)] for _ in range(3)]
    d = linalg.det(M)
    assert isinstance(d, PadicElt) and d == linalg.det_berkowitz(M)


def test_echelon_mod_requires_saturation():
    with pytest.raises(PrecisionExhausted):
        linalg.echelon_mod([[11, 22]], 11, 4)


# certified dimension can only drop as precision grows, and is stable once certified


def build_pipeline_matrices(ctx, toy) -> dict:
    """Quadric rows on the designed cut curve and on the toy surface."""
    B = quadric_basis()
    L = toy.designed_cut()
    smooth = set(ctx.smooth_points())
    cut = cut_curve_sampler(ctx, L, [x for x in ctx.pool.on(L, ctx.emb) if x in smooth])
    surf = surface_sampler(ctx)
    return {"cut": rows(cut.sample(70), B, ctx.emb.q),
            "surface": rows(surf.sample(70), B, ctx.emb.q)}


def check_monotone(M) -> None:
    dims = {}
    for e in (6, 12, 18):
        ns = linalg.padic_nullspace(M % 11**e, 11, e, margin=3, strict=False)
        dims[e] = (ns.dim, ns.certified)
    assert dims[6][0] >= dims[12][0] >= dims[18][0]
    assert len({d for d, ok in dims.values() if ok}) <= 1
    assert dims[18][1]


@pytest.fixture(scope="module")
def pipeline_matrices(toy, toy_scheme, toy_fixtures, toy_pool, tmp_path_factory):
    from fppkit.pipelines.config import RunConfig
    from fppkit.pipelines.context import Context

    cfg = RunConfig(cache_dir=str(tmp_path_factory.mktemp("lin")), precision=18)
    ctx = Context(cfg, scheme=toy_scheme, fixtures=toy_fixtures)
    ctx._pool = toy_pool
    return build_pipeline_matrices(ctx, toy)


@pytest.mark.parametrize("which", ["cut", "surface"])
def test_certified_dimension_monotone(pipeline_matrices, which):
    check_monotone(pipeline_matrices[which])


def test_scaled_identity_has_no_nullspace():
    ns = linalg.padic_nullspace([[11 * int(i == j) for j in range(4)] for i in range(4)], 11, 3,
                                margin=1)
    assert ns.dim == 0 and ns.certified
