"""Pipeline stages.  Each takes a Context and returns a finished Report."""

from __future__ import annotations

import itertools
import logging
import math
import time

import numpy as np

from .. import linalg
from ..arith import QuadElt
from ..errors import (BudgetExceeded, CutNotRigid, DatasetMissing, FixtureMismatch, Inconsistent,
                      PrecisionExhausted, RecognitionFailed, SeedShortage)
from ..lift import hensel, lift_cut_system
from ..poly import (G3, G7_WEIGHTS, Poly, format_coeff, g3_act, g7_weight, monomial_basis)
from ..reconstruct import recognize_quad
from ..scheme import formal_neighborhood, is_nonreduced_cut, normalize, vanishing_conditions
from . import torsion
from .context import (Context, Sampler, coefficient_vector, cut_curve_sampler, cut_forms,
                      cut_from_triple, kernel_polys, poly_values, quadric_basis, rows,
                      scheme_sampler, shuffled, surface_sampler, translate_rows,
                      weight_columns)
from .data import optional_dataset
from .report import Report

log = logging.getLogger(__name__)

QUADRIC_COLUMNS = 55


# ---------------------------------------------------------------------------
# helpers


def _mod_values(ctx: Context, forms, points, e: int) -> np.ndarray:
    """Values of forms (exact or integer coefficients) at points mod p^e."""
    E = ctx.emb.at(e)
    q = E.q
    out = np.zeros((len(points), len(forms)), dtype=object)
    for j, f in enumerate(forms):
        g = E.poly(f)
        for i, x in enumerate(points):
            out[i, j] = g.eval_mod(list(x), q)
    return out


def _vanishes(ctx: Context, polys, points, e: int) -> bool:
    if not polys or not points:
        return True
    return not np.any(_mod_values(ctx, polys, points, e))


def _kernel_vanishes(basis, M, q: int) -> bool:
    """Every kernel vector annihilates the rows of M mod q."""
    if not basis:
        return True
    K = np.array(basis, dtype=object).T
    return not np.any(M.dot(K) % q)


def _n_rows(ctx: Context, cols: int) -> int:
    return cols + ctx.cfg.row_slack


def _certify(ctx: Context, r, name: str, M, expect: int | None):
    """Certified kernel with dimension check recorded in the report."""
    ns = ctx.kernel(M, strict=False)
    r.find(f"{name}_dim", ns.dim)
    r.find(f"{name}_certificate", ns.label)
    r.find(f"{name}_valuations", ns.valuation_profile())
    r.check(f"{name}_certified", ns.certified, ns.ambiguous)
    if expect is not None:
        r.check(f"{name}_dim", ns.dim == expect, {"got": ns.dim, "expected": expect})
    return ns


def _pool_where(ctx: Context, zero=(), nonzero=()) -> list:
    """Smooth pool points where the ``zero`` forms vanish and the others do not."""
    p = ctx.cfg.prime
    pts = ctx.smooth_points()
    if not pts:
        return []
    out = np.ones(len(pts), dtype=bool)
    if zero:
        out &= ~np.any(_mod_values(ctx, zero, pts, 1), axis=1)
    for f in nonzero:
        out &= _mod_values(ctx, [f], pts, 1)[:, 0] != 0
    return [x for x, ok in zip(pts, out) if ok]


def _off_translates(ctx: Context, L: Poly, points) -> list:
    """Points off every g7-translate of the cut L (tested in the residue ring)."""
    if not points:
        return []
    zp = [z.reduce(1) for z in ctx.zeta_powers()]
    E = ctx.emb.at(1)
    coeffs = [0] * 10
    for m, c in L.terms.items():
        coeffs[m.index(1)] = E(c)
    keep = []
    for x in points:
        vals = []
        for j in range(7):
            acc = zp[0] * 0
            for i, c in enumerate(coeffs):
                if c and x[i] % E.p:
                    acc = acc + zp[(j * G7_WEIGHTS[i]) % 7] * (c * x[i] % E.p)
            vals.append(bool(acc))
        if all(vals):
            keep.append(x)
    return keep


def _save_kernel(ctx: Context, name: str, polys, exact) -> None:
    header = "exact over Q(sqrt(-7))" if exact is not None else \
        f"p-adic coefficients mod {ctx.cfg.prime}^{ctx.cfg.precision}"
    ctx.save_equations(name, exact if exact is not None else polys, header)


def _recognized(ctx: Context, r, name: str, ns, columns):
    exact = ctx.rationalize(ns.basis, columns)
    r.find(f"{name}_rationalized", exact is not None)
    if exact is None:
        r.note(f"{name}: kept at p-adic precision (recognition failed)")
    return exact


def _jacobian_rank_mod_p(polys, x, p: int) -> int:
    J = np.array([[g.eval_mod(list(x), p) for g in (f.diff(i) for i in range(len(x)))]
                  for f in polys], dtype=np.int64)
    return linalg.rank_mod(J, p) if J.size else 0


# ---------------------------------------------------------------------------
# pool and cut search


def cmd_pool(ctx: Context):
    r = ctx.report("pool")
    pool = ctx.pool
    p = ctx.cfg.prime
    pts = set(pool.points)
    closed = all(normalize(G3.apply_point(x), p) in pts for x in pool.points)
    r.find("points", len(pool))
    r.find("strategy", pool.strategy)
    r.find("rank_histogram", pool.rank_histogram())
    r.find("digest", pool.digest)
    r.find("g3_closed", closed)
    if ctx.is_surface:
        r.check("g3_closure", closed)
        if pool.strategy == "full":
            r.check("count_range", 111 <= len(pool) <= 133, len(pool))
        else:
            r.note("partial pool from linear slices")
    return r.finish()


def search_cuts(ctx: Context, min_support: int | None = None) -> dict:
    """Flag ansatz triples whose cut is nonreduced at every pool point on it."""
    p, emb, S = ctx.cfg.prime, ctx.emb, ctx.scheme
    min_support = min_support or ctx.cfg.min_support
    L0, *Ls = cut_forms(ctx)
    pts = ctx.pool.points
    V = _mod_values(ctx, [L0] + Ls, pts, 1).astype(np.int64)
    flagged, undetermined = {}, {}
    for a in itertools.product(range(p), repeat=len(Ls)):
        vals = (V[:, 0] + V[:, 1:].dot(np.array(a, dtype=np.int64))) % p
        on = [pts[i] for i in np.nonzero(vals == 0)[0]]
        if not on:
            undetermined[a] = 0
            continue
        if is_nonreduced_cut(S, cut_from_triple(ctx, a), on, emb):
            if len(on) >= min_support:
                flagged[a] = len(on)
            else:
                undetermined[a] = len(on)
    return {"flagged": flagged, "undetermined": undetermined}


def cmd_search_cuts(ctx: Context, min_support: int | None = None):
    r = ctx.report("search-cuts")
    t0 = time.perf_counter()
    res = search_cuts(ctx, min_support)
    flagged = sorted(res["flagged"])
    r.find("triples", flagged)
    r.find("support", {str(a): n for a, n in sorted(res["flagged"].items())})
    r.find("undetermined", len(res["undetermined"]))
    r.find("undetermined_with_points", sorted(a for a, n in res["undetermined"].items() if n))
    r.find("candidate_seconds", round(time.perf_counter() - t0, 3))
    if ctx.is_surface:
        r.check("triples", set(flagged) == ctx.fixtures.search_triples,
                {"expected": sorted(ctx.fixtures.search_triples)})
        U0 = cut_forms(ctx)[0]
        fixed = g3_act(U0) == U0 and all(g7_weight(m) == 0 for m in U0.terms)
        r.check("zero_triple_fixed_by_aut", (0, 0, 0) not in flagged or fixed)
    return r.finish()


def _labels_for(ctx: Context, triples) -> dict:
    try:
        order = [tuple(t) for t in ctx.fixtures.blocks["search_triples"]]
        names = ctx.fixtures.blocks["cut_labels"]
        known = dict(zip(order, names))
    except KeyError:
        known = {}
    return {a: known.get(tuple(a), "cut" + "".join(f"_{v}" for v in a)) for a in triples}


def lift_cut(ctx: Context, a) -> dict:
    """Lift one flagged triple and recognize its coefficients."""
    S, emb, cfg = ctx.scheme, ctx.emb, ctx.cfg
    L0, *Ls = cut_forms(ctx)
    on = [x for x in ctx.pool.on(cut_from_triple(ctx, a), emb) if x in set(ctx.smooth_points())]
    on = shuffled(on, cfg.seed)
    k = cfg.lift_points
    cl = lift_cut_system(S, L0, Ls, a, on[:k], emb, extra_points=on[k:],
                         max_points=cfg.max_lift_points)
    exact = [recognize_quad(c, emb.s, emb.q) for c in cl.coefficients]
    if [emb(x) for x in exact] != [int(c) for c in cl.coefficients]:
        raise RecognitionFailed("recognized coefficients do not re-embed")
    # smallest precision from which recognition already returns the final answer
    p = cfg.prime
    min_e = cfg.precision
    for e in range(2, cfg.precision + 1):
        q = p**e
        try:
            if [recognize_quad(int(c) % q, emb.s % q, q) for c in cl.coefficients] == exact:
                min_e = e
                break
        except RecognitionFailed:
            continue
    L = L0
    for c, Li in zip(exact, Ls):
        L = L + Li * c
    xs = [cl.state.values[f"x{i}"] for i in range(len(cl.points))]
    on_curve = _vanishes(ctx, [L], xs, emb.e)
    return {"cut": L, "coefficients": exact, "points": len(cl.points),
            "escalations": cl.escalations, "min_precision": min_e, "verified": on_curve}


def cmd_lift_cuts(ctx: Context, triples=None):
    r = ctx.report("lift-cuts")
    if triples is None:
        triples = sorted(search_cuts(ctx)["flagged"])
    labels = _labels_for(ctx, triples)
    lifted = {}
    for a in triples:
        name = labels[a]
        try:
            res = lift_cut(ctx, a)
        except (CutNotRigid, RecognitionFailed, Inconsistent, SeedShortage) as exc:
            r.check(f"{name}_lifted", False, str(exc))
            continue
        lifted[name] = res["cut"]
        r.find(name, {"triple": a, "coefficients": [format_coeff(c) for c in res["coefficients"]],
                      "points": res["points"], "escalations": res["escalations"],
                      "min_precision": res["min_precision"]})
        r.check(f"{name}_verified", res["verified"])
    if ctx.is_surface:
        ref = ctx.fixtures.cuts
        for name, L in lifted.items():
            if name in ref:
                r.check(f"{name}_matches_fixture", L == ref[name].map_coeffs(QuadElt.coerce))
    try:
        order = [n for n in ctx.fixtures.blocks["cut_labels"] if n in lifted]
    except KeyError:
        order = list(lifted)
    if lifted and len(order) == len(lifted):
        ctx.save_equations("cuts", [lifted[n] for n in order], "cuts: " + " ".join(order))
    return r.finish()


# ---------------------------------------------------------------------------
# torsion curves and group relations


def _cut_sampler(ctx: Context, L: Poly, name: str) -> Sampler:
    seeds = shuffled(ctx.pool.on(L, ctx.emb), ctx.cfg.seed)
    smooth = set(ctx.smooth_points())
    sm = cut_curve_sampler(ctx, L, [x for x in seeds if x in smooth], name)
    if not sm.seeds:
        raise SeedShortage(f"no usable pool point on the curve of {name}")
    return sm


def class_rows(ctx: Context, per_curve: int, basis=None):
    """Quadric rows at points of all 15 torsion curves, as coefficient stacks."""
    basis = basis or quadric_basis()
    cuts, _ = ctx.cuts()
    q = ctx.emb.q
    base = {}
    for rep in ("D", "D1", "D8"):
        pts = _cut_sampler(ctx, cuts[rep], rep).sample(per_curve)
        base[rep] = rows(pts, basis, q)
    zpow = ctx.zeta_powers()
    return {lab: translate_rows(base[torsion.class_orbit(lab)], basis,
                                torsion.translate_index(lab), zpow, q)
            for lab in torsion.LABELS}


def group_relations(stacks: dict, p: int, e: int, f, margin: int) -> dict:
    relations, ambiguous = [], []
    for triple in itertools.combinations(torsion.LABELS, 3):
        M = np.concatenate([stacks[a] for a in triple], axis=1)
        ns = linalg.ext_nullspace_dim(M, p, e, f, margin, strict=False)
        if not ns.certified:
            ambiguous.append(triple)
        elif ns.dim == 0:
            relations.append(triple)
    return {"relations": relations, "ambiguous": ambiguous}


def cmd_group_relations(ctx: Context):
    r = ctx.report("group-relations")
    cfg = ctx.cfg
    _, src = ctx.cuts()
    r.inputs["cuts"] = src
    per_curve = math.ceil(_n_rows(ctx, QUADRIC_COLUMNS) / 3)
    stacks = class_rows(ctx, per_curve)
    ring = ctx.zeta.ring
    res = group_relations(stacks, cfg.prime, cfg.precision, ring.f, cfg.margin)
    table = torsion.check_group_table(res["relations"])
    r.find("points_per_curve", per_curve)
    r.find("relations", res["relations"])
    r.find("ambiguous", res["ambiguous"])
    r.find("coordinates", table["coordinates"])
    r.check("no_ambiguous_triples", not res["ambiguous"], res["ambiguous"])
    for key in ("complete", "distinct", "consistent", "c7_closed"):
        r.check(key, table[key])
    r.check("relation_count", table["relations"] == 35, table["relations"])
    for target, ok in torsion.verify_expected(table["coordinates"]).items():
        r.check(f"relation_{target}", ok)
    return r.finish()


def cmd_curve_quadrics(ctx: Context, label: str = "D", expect: int | None = 28):
    r = ctx.report("curve-quadrics")
    r.inputs["class"] = label
    cuts, src = ctx.cuts()
    r.inputs["cuts"] = src
    rep = torsion.class_orbit(label) if label in torsion.LABELS else label
    j = torsion.translate_index(label) if label in torsion.LABELS else 0
    basis = quadric_basis()
    q, qm = ctx.emb.q, ctx.cfg.prime ** (ctx.cfg.precision - ctx.cfg.margin)
    sm = _cut_sampler(ctx, cuts[rep], rep)
    M = rows(sm.sample(_n_rows(ctx, len(basis))), basis, q)
    ns = _certify(ctx, r, "quadrics", M, expect)
    hold = rows(sm.sample(ctx.cfg.holdout), basis, q)
    r.check("holdout", _kernel_vanishes(ns.basis, hold, qm))
    exact = _recognized(ctx, r, "quadrics", ns, basis)
    if exact is not None:
        r.check("exact_holdout", _kernel_vanishes(
            [coefficient_vector(f, basis, ctx.emb) for f in exact], hold, qm))
    _save_kernel(ctx, f"quadrics-{rep}", kernel_polys(ns.basis, basis), exact)
    if j:
        # the translate's system: coefficients scaled by zeta^(-j wt), checked on translated points
        zpow = ctx.zeta_powers()
        T = translate_rows(hold, basis, j, zpow, q)
        ring = zpow[0].ring
        ok = True
        for v in ns.basis:
            acc = [np.zeros(T.shape[1], dtype=object) for _ in range(ring.k)]
            for c, (m, coef) in enumerate(zip(basis, v)):
                zc = zpow[(-j * g7_weight(m)) % 7].c
                col = [T[t][:, c] for t in range(ring.k)]
                prod = linalg.ext_mul(col, [np.full(T.shape[1], z * int(coef) % q, dtype=object)
                                            for z in zc], ring.f, q)
                acc = [a + b for a, b in zip(acc, prod)]
            ok &= not any(np.any(a % qm) for a in acc)
        r.check("translate_holdout", ok)
        r.note(f"{label} = g7^{j} {rep}: system obtained by translating the {rep} quadrics")
    extra = optional_dataset(ctx.cfg.data_dir, f"quadrics_{rep}.txt")
    if extra is not None:
        r.check("dataset_in_span", _span_contains(ctx, ns.basis, extra, basis))
    return r.finish()


def _span_contains(ctx: Context, kbasis, polys, columns) -> bool:
    cfg = ctx.cfg
    A = np.array(kbasis, dtype=object)
    B = np.array([coefficient_vector(f, columns, ctx.emb) for f in polys], dtype=object)
    rk = linalg.unit_rank(A, cfg.prime, cfg.precision, cfg.margin)
    return linalg.unit_rank(np.vstack([A, B]), cfg.prime, cfg.precision, cfg.margin) == rk


# ---------------------------------------------------------------------------
# 4H: s3, d and the r3 curve


def fixture_structure(ctx: Context, r) -> None:
    """Weight and invariance checks on the fixture forms (no surface needed)."""
    fx = ctx.fixtures
    s3, d = fx.one("s3"), fx.one("d")
    r.check("s3_weights", {g7_weight(m) for m in s3.terms} == {2},
            sorted({g7_weight(m) for m in s3.terms}))
    ans = {m for f in fx.equations("s3_ansatz") for m in f.terms}
    r.check("s3_in_ansatz", set(s3.terms) <= ans)
    r.check("d_weight_zero", {g7_weight(m) for m in d.terms} == {0})
    r.check("d_g3_invariant", g3_act(d) == d)
    E = ctx.emb.at(1)
    got = {tuple(E(L.coeff(_unit(i))) for i in (1, 4, 7)) for L in fx.cuts.values()}
    r.find("cuts_mod_p", sorted(got))
    if ctx.cfg.prime == 11:
        r.check("cuts_reduce_to_triples", got == fx.search_triples, sorted(got))


def _unit(i: int) -> tuple:
    return tuple(int(k == i) for k in range(10))


def formal_constraints(ctx: Context, r, order: int | None = None) -> int:
    """Free coefficients of the s3 ansatz after vanishing at the C7-fixed points."""
    fx = ctx.fixtures
    order = order or ctx.cfg.fnbhd_order
    ansatz = fx.equations("s3_ansatz")
    rows_ = []
    for x in fx.c7_fixed_points[1:]:
        fn = formal_neighborhood(ctx.scheme, x, order)
        rows_ += vanishing_conditions(fn, ansatz, order)
    rank = linalg.rank(rows_) if rows_ else 0
    free = len(ansatz) - rank
    r.find("s3_free_coefficients", {"before": len(ansatz), "after": free})
    s3 = fx.one("s3")
    # ansatz entries are single monomials, so the s3 coordinates are read off directly
    coeffs = [QuadElt.coerce(s3.coeff(m)) / QuadElt.coerce(c)
              for f in ansatz for m, c in f.terms.items()]
    sat = all(sum((c * v for c, v in zip(coeffs, row)), QuadElt(0)) == 0 for row in rows_)
    r.check("s3_satisfies_constraints", sat)
    return free


def sextic_identity(ctx: Context, r, npoints: int | None = None) -> None:
    """s3 s5 s6 - d^3 vanishes at lifted surface points mod p^(e-m)."""
    fx = ctx.fixtures
    cfg = ctx.cfg
    npoints = npoints or cfg.fixture_points
    s3, d = fx.one("s3"), fx.one("d")
    s5 = g3_act(s3)
    s6 = g3_act(s5)
    F = ctx.emb.poly(s3 * s5 * s6 - d * d * d)
    pts = surface_sampler(ctx).sample(npoints)
    qm = cfg.prime ** (cfg.precision - cfg.margin)
    vals = [F.eval_mod(list(x), qm) for x in pts]
    r.find("sextic_identity_points", len(pts))
    r.check("sextic_identity", not any(vals), sum(1 for v in vals if v))


def r3_sampler(ctx: Context) -> Sampler:
    fx = ctx.fixtures
    s3, d = fx.one("s3"), fx.one("d")
    s5 = g3_act(s3)
    s6 = g3_act(s5)
    seeds = shuffled(_pool_where(ctx, zero=[s3, d], nonzero=[s5, s6]), ctx.cfg.seed)
    T = ctx.scheme.extend(d, "surface+d")
    sm = scheme_sampler(ctx, T, seeds, 1, "r3")
    if not sm.seeds:
        raise SeedShortage("no smooth pool point on r3 off r5 and r6")
    return sm


def cmd_verify_fixtures(ctx: Context):
    r = Report("verify-fixtures", ctx.cfg.to_dict())
    fixture_structure(ctx, r)
    try:
        S = ctx.scheme
    except DatasetMissing as exc:
        r.check("surface_checks", False, f"BLOCKED: {exc}")
        return r.finish("blocked")
    for i, x in enumerate(ctx.fixtures.c7_fixed_points, 1):
        r.check(f"p{i}_on_surface", S.contains(list(x)))
    free = formal_constraints(ctx, r)
    r.check("formal_neighborhood_8_to_6", free == 6, free)
    sextic_identity(ctx, r)
    return r.finish()


def cmd_four_h(ctx: Context, expect: int | None = 21):
    r = ctx.report("four-h")
    fixture_structure(ctx, r)
    free = formal_constraints(ctx, r)
    r.check("formal_neighborhood_8_to_6", free == 6, free)
    sextic_identity(ctx, r)
    basis = quadric_basis()
    q, qm = ctx.emb.q, ctx.cfg.prime ** (ctx.cfg.precision - ctx.cfg.margin)
    sm = r3_sampler(ctx)
    r.find("r3_seeds", len(sm))
    M = rows(sm.sample(_n_rows(ctx, len(basis))), basis, q)
    ns = _certify(ctx, r, "r3_quadrics", M, expect)
    r.check("r3_holdout", _kernel_vanishes(ns.basis, rows(sm.sample(ctx.cfg.holdout), basis, q), qm))
    squares = [basis.index(tuple(2 * int(k == i) for k in range(10))) for i in (7, 8, 9)]
    absent = all(int(v[c]) % qm == 0 for v in ns.basis for c in squares)
    r.check("no_U7_U8_U9_squares", absent)
    for i, x in enumerate(ctx.fixtures.c7_fixed_points, 1):
        r.check(f"p{i}_on_surface", ctx.scheme.contains(list(x)))
        r.check(f"p{i}_on_r3_system", _kernel_vanishes(ns.basis, rows([x], basis, q), qm))
    exact = _recognized(ctx, r, "r3_quadrics", ns, basis)
    _save_kernel(ctx, "r3", kernel_polys(ns.basis, basis), exact)
    extra = optional_dataset(ctx.cfg.data_dir, "r3_quadrics21.txt", 10)
    if extra is not None:
        r.check("dataset_in_span", _span_contains(ctx, ns.basis, extra, basis))
    return r.finish()


# ---------------------------------------------------------------------------
# 5H + D and 5H


def image_equations(ctx: Context, r, name: str, sections, sampler: Sampler, count: int,
                    degree: int, expect: int | None, holdout: int = 50):
    """Degree-``degree`` equations of the image of the map given by ``sections``."""
    q, p = ctx.emb.q, ctx.cfg.prime
    qm = p ** (ctx.cfg.precision - ctx.cfg.margin)
    nz = len(sections)

    def image(n):
        out = []
        while len(out) < n:
            for v in poly_values(sections, sampler.sample(n - len(out)), q):
                if any(c % p for c in v):
                    out.append(normalize(v, p, q))
        return out

    basis = monomial_basis(degree, nz)
    ns = _certify(ctx, r, name, rows(image(count), basis, q), expect)
    r.check(f"{name}_holdout", _kernel_vanishes(ns.basis, rows(image(holdout), basis, q), qm))
    eqs = kernel_polys(ns.basis, basis)
    smooth = [_jacobian_rank_mod_p(eqs, x, p) for x in image(20)]
    r.find(f"{name}_jacobian_ranks", sorted(set(smooth)))
    r.check(f"{name}_smooth_sample", all(k == 3 for k in smooth), smooth)
    return ns, eqs, basis


def _sections(ctx: Context, r, name: str, samplers, basis, expect: int | None):
    q = ctx.emb.q
    n = _n_rows(ctx, len(basis))
    M = np.vstack([rows(s.sample(n), basis, q) for s in samplers])
    ns = _certify(ctx, r, name, M, expect)
    return ns, kernel_polys(ns.basis, basis)


def cmd_five_h_d(ctx: Context, expect_sections: int | None = 6, expect_sextics: int | None = 56):
    r = ctx.report("five-h-d")
    cuts, src = ctx.cuts()
    r.inputs["cuts"] = src
    basis = quadric_basis()
    ns, sections = _sections(ctx, r, "sections", [_cut_sampler(ctx, cuts["D"], "D"),
                                                   r3_sampler(ctx)], basis, expect_sections)
    exact = _recognized(ctx, r, "sections", ns, basis)
    _save_kernel(ctx, "fivehd_sections", sections, exact)
    sns, sextics, sb = image_equations(ctx, r, "sextics", sections, surface_sampler(ctx),
                                       ctx.cfg.image_points, 6, expect_sextics)
    _save_kernel(ctx, "fivehd_sextics", sextics, _recognized(ctx, r, "sextics", sns, sb))
    return r.finish()


def five_h_sections(ctx: Context, r, expect: int | None = 6, budget: float | None = None):
    """Weight-homogeneous quintics vanishing on r3 and the D1..D7 curves, mod I5.

    A weight-w quintic that vanishes on the D1 curve vanishes on every g7
    translate of it, so each weight block only needs points on r3 and D1.
    """
    cfg = ctx.cfg
    budget = budget or cfg.five_h_budget
    t0 = time.perf_counter()
    q, p, e = ctx.emb.q, cfg.prime, cfg.precision
    cuts, _ = ctx.cuts()
    quintics = monomial_basis(5, 10)
    surf = surface_sampler(ctx)
    generic = rows(surf.sample(406 + cfg.row_slack), quintics, q)
    curves = [r3_sampler(ctx), _cut_sampler(ctx, cuts["D1"], "D1")]
    sections, standard, dims = [], 0, {}
    for w in range(7):
        if time.perf_counter() - t0 > budget:
            raise BudgetExceeded(f"5H sections exceeded {budget} s at weight {w}")
        cols = weight_columns(quintics, w)
        idx = [quintics.index(m) for m in cols]
        sd = linalg.smith_mod(generic[:, idx], p, e, want_transform=False)
        if any(v >= e - cfg.margin for v in sd.valuations):
            raise PrecisionExhausted(f"quintic ideal rank not certified at weight {w}")
        std = [cols[sd.perm[i]] for i in range(sd.rank)]
        standard += len(std)
        n = len(std) + cfg.row_slack
        M = np.vstack([rows(c.sample(n), std, q) for c in curves])
        ns = ctx.kernel(M)
        dims[w] = ns.dim
        sections += kernel_polys(ns.basis, std)
    r.find("standard_monomials", standard)
    r.check("quintic_quotient_dim", standard == 406, standard)
    r.find("sections_by_weight", dims)
    if expect is not None:
        r.check("sections_dim", len(sections) == expect, len(sections))
    return sections, surf


def section_curve_sampler(ctx: Context, F: Poly, avoid, name: str) -> Sampler:
    """Points on the moving part of {F = 0}, seeded off the fixed curves."""
    fx = ctx.fixtures
    s3 = fx.one("s3")
    cuts, _ = ctx.cuts()
    seeds = _pool_where(ctx, zero=[F], nonzero=[s3, *avoid])
    seeds = _off_translates(ctx, cuts["D1"], seeds)
    sm = scheme_sampler(ctx, ctx.scheme.extend(F, name), shuffled(seeds, ctx.cfg.seed), 1, name)
    if not sm.seeds:
        raise SeedShortage(f"no usable seed on the moving curve of {name}")
    return sm


def cmd_five_h(ctx: Context, expect_sections: int | None = 6, expect_sextics: int | None = 59,
               expect_quadrics: int | None = 15):
    r = ctx.report("five-h")
    p, q = ctx.cfg.prime, ctx.emb.q
    qm = p ** (ctx.cfg.precision - ctx.cfg.margin)
    Z, surf = five_h_sections(ctx, r, expect_sections)
    ctx.save_equations("fiveh_sections", Z, "quintic sections by weight")
    ns, sextics, sb = image_equations(ctx, r, "sextics", Z, surf, ctx.cfg.image_points, 6,
                                      expect_sextics)
    ctx.save_equations("fiveh_sextics", sextics, "sextics in Z1..Z6")
    singular = []
    for i in range(len(Z)):
        e_i = tuple(int(k == i) for k in range(len(Z)))
        on = _vanishes(ctx, sextics, [e_i], ctx.cfg.precision - ctx.cfg.margin)
        if on and _jacobian_rank_mod_p(sextics, e_i, p) < 3:
            singular.append(i)
    r.find("singular_coordinate_points", singular)
    r.check("three_singular_coordinate_points", len(singular) == 3, singular)
    r.note("coordinate order follows the weight-ordered section basis")
    basis = quadric_basis()
    allq = []
    for i, F in enumerate(Z):
        sm = section_curve_sampler(ctx, F, [], f"Z{i + 1}")
        M = rows(sm.sample(_n_rows(ctx, len(basis))), basis, q)
        kns = _certify(ctx, r, f"Z{i + 1}_quadrics", M, expect_quadrics)
        r.check(f"Z{i + 1}_holdout",
                _kernel_vanishes(kns.basis, rows(sm.sample(ctx.cfg.holdout), basis, q), qm))
        polys = kernel_polys(kns.basis, basis)
        ctx.save_equations(f"fiveh_Z{i + 1}_quadrics", polys)
        allq += polys
    common = [x for x in ctx.pool.points if _vanishes(ctx, allq, [x], 1)]
    r.find("quadrics_total", len(allq))
    r.check("no_common_pool_zero", not common, common)
    r.note("basepoint freeness checked on F_p-points only")
    return r.finish()


# ---------------------------------------------------------------------------
# 4H + T


def cmd_four_h_torsion(ctx: Context, label: str = "D1", expect_sections: int | None = 3,
                       expect_quadrics: int | None = 21, section_index: int = 1):
    r = ctx.report("four-h-torsion")
    r.inputs["class"] = label
    p, q = ctx.cfg.prime, ctx.emb.q
    qm = p ** (ctx.cfg.precision - ctx.cfg.margin)
    cuts, src = ctx.cuts()
    r.inputs["cuts"] = src
    Z = ctx.load_equations("fiveh_sections")
    if Z is None:
        Z, _ = five_h_sections(ctx, r, None)
    Zc = Z[section_index]
    r.find("five_h_section", f"Z{section_index + 1}")
    basis = quadric_basis()
    L = cuts[label]
    zs = section_curve_sampler(ctx, Zc, [L], f"Z{section_index + 1}")
    ns, secs = _sections(ctx, r, "sections", [_cut_sampler(ctx, L, label), zs], basis,
                         expect_sections)
    systems = []
    det_checked = False
    for k, Qk in enumerate(secs):
        sm = section_curve_sampler(ctx, Qk, [Zc, L], f"{label}_s{k}")
        M = rows(sm.sample(_n_rows(ctx, len(basis))), basis, q)
        kns = _certify(ctx, r, f"s{k}_quadrics", M, expect_quadrics)
        r.check(f"s{k}_holdout",
                _kernel_vanishes(kns.basis, rows(sm.sample(ctx.cfg.holdout), basis, q), qm))
        systems.append(kernel_polys(kns.basis, basis))
        if not det_checked and label != "D":
            det_checked = True
            pts = _one_per_seed(sm, 10)
            D = np.array([[int(v) for v in x] for x in pts], dtype=object)
            val = _det_valuation(D, p, ctx.cfg.precision) if len(pts) == 10 else None
            r.find("determinant_valuation", val)
            r.check("determinant_unit", val == 0, {"points": len(pts)})
    common = [x for x in ctx.pool.points
              if all(_vanishes(ctx, s, [x], 1) for s in systems)]
    r.check("no_common_pool_zero", not common, common)
    r.note("other classes in the C3 orbit follow by the g3 action; not recomputed")
    return r.finish()


def _one_per_seed(sm: Sampler, n: int) -> list:
    q = sm.p**sm.e
    out = []
    for s in sm.seeds[:n]:
        xs = hensel(s.problem, s.x0, sm.e, sm._chooser(s, s.used), s.lin)
        s.used += 1
        out.append(normalize(s.problem.unpack(xs, q)[s.block], sm.p, q))
    return out


def _det_valuation(D, p: int, e: int) -> int:
    sd = linalg.smith_mod(D, p, e, want_transform=False)
    if sd.rank < D.shape[0]:
        return e
    return sum(sd.valuations)


STAGES = {
    "pool": cmd_pool,
    "search-cuts": cmd_search_cuts,
    "lift-cuts": cmd_lift_cuts,
    "group-relations": cmd_group_relations,
    "curve-quadrics": cmd_curve_quadrics,
    "four-h": cmd_four_h,
    "five-h-d": cmd_five_h_d,
    "five-h": cmd_five_h,
    "four-h-torsion": cmd_four_h_torsion,
    "verify-fixtures": cmd_verify_fixtures,
}


HARD_FAIL = {"four-h", "verify-fixtures"}


def run_stage(name: str, ctx: Context, **kw):
    """Run a stage and append its report; fixture stages fail hard."""
    rep = STAGES[name](ctx, **kw)
    rep.write(ctx.cfg.report)
    if name in HARD_FAIL and rep.status == "failed":
        bad = [k for k, v in rep.checks.items() if not v["ok"]]
        raise FixtureMismatch(f"{name}: failed checks {bad}")
    return rep
