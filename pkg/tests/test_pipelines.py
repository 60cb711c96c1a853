from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fppkit.arith import QuadElt
from fppkit.cli import build_parser, main
from fppkit.errors import DatasetMissing, ParseError
from fppkit.pipelines import stages, torsion
from fppkit.pipelines.config import RunConfig
from fppkit.pipelines.context import (Context, cut_curve_sampler, quadric_basis, rows,
                                      translate_rows)
from fppkit.pipelines.data import load_fixtures, load_surface, parse_fixtures
from fppkit.pipelines.report import Report
from fppkit.poly import G7, monomial_basis
from fppkit.toy import nonreduced_triples_oracle

W = QuadElt(0, 1)
DATA = Path(__file__).resolve().parents[1] / "data"


# -- configuration and reports


def test_config_from_text():
    cfg = RunConfig.from_text("prime = 23\nprecision = 12  # comment\nbranch = large\n")
    assert (cfg.prime, cfg.precision, cfg.branch) == (23, 12, "large")


@pytest.mark.parametrize("text", ["nonsense = 3", "prime 11", "margin = 30"])
def test_config_rejects(text):
    with pytest.raises(ValueError):
        RunConfig.from_text(text)


def test_report_json(tmp_path):
    r = Report("demo", {"prime": 11})
    r.find("dim", 28)
    r.check("holdout", True)
    r.check("other", False, {"why": (1, 2)})
    r.finish()
    path = tmp_path / "r.jsonl"
    r.write(path)
    r.write(path)
    docs = [json.loads(ln) for ln in path.read_text().splitlines()]
    assert len(docs) == 2 and docs[0]["status"] == "failed"
    assert docs[0]["checks"]["other"]["detail"] == {"why": [1, 2]}
    assert "check holdout: PASS" in r.text()


# -- data


def test_fixture_file_parses():
    fx = load_fixtures(DATA)
    assert fx.search_triples == {(0, 0, 0), (7, 0, 0), (8, 7, 7)}
    assert list(fx.cuts) == ["D", "D1", "D8"]
    assert fx.cuts["D1"].coeff((0, 1) + (0,) * 8) == QuadElt(Fraction(1, 2), Fraction(1, 2))
    assert len(fx.c7_fixed_points) == 3


def test_bad_fixture_block():
    with pytest.raises(ParseError):
        parse_fixtures("@x weird\n1 2 3\n")


def test_missing_surface(tmp_path):
    with pytest.raises(DatasetMissing):
        load_surface(tmp_path)


# -- torsion table


def _synthetic_coords():
    # F_2 + F_8 with alpha^3 = alpha + 1; g7 acts by alpha on F_8
    powers = [(1, 0, 0)]
    for _ in range(6):
        a, b, c = powers[-1]
        powers.append((0, a, b) if not c else (1, a ^ 1, b))
    coords = {"D": (1, 0, 0, 0)}
    for i in range(7):
        coords[f"D{i + 1}"] = (0,) + powers[i]
        coords[f"D{i + 8}"] = (1,) + powers[i]
    return coords


def test_torsion_table_from_synthetic_relations():
    rel = torsion.zero_sum_triples(_synthetic_coords())
    table = torsion.check_group_table(rel)
    assert table["relations"] == 35
    assert table["complete"] and table["distinct"] and table["consistent"] and table["c7_closed"]
    assert all(torsion.verify_expected(table["coordinates"]).values())


def test_torsion_table_detects_missing_relation():
    rel = sorted(torsion.zero_sum_triples(_synthetic_coords()))
    table = torsion.check_group_table(rel[:-1])
    assert not table["consistent"]


@given(st.sampled_from(torsion.LABELS))
def test_c7_shift_has_order_seven(label):
    x = label
    for _ in range(7):
        x = torsion.c7_shift(x)
    assert x == label
    assert torsion.class_orbit(torsion.c7_shift(label)) == torsion.class_orbit(label)


# -- stages on the toy surface


def test_pool_stage(toy_ctx):
    r = stages.cmd_pool(toy_ctx)
    assert r.status == "ok" and r.findings["points"] == 133


def test_search_matches_oracle(toy_ctx, toy):
    res = stages.search_cuts(toy_ctx)
    oracle = set(nonreduced_triples_oracle(toy, toy_ctx.emb))
    assert set(res["flagged"]) == oracle == {(0, 1, 10), (7, 0, 0)}
    assert all(n == 12 for n in res["flagged"].values())


def test_lift_design(toy_ctx):
    r = stages.cmd_lift_cuts(toy_ctx, triples=[(7, 0, 0)])
    assert r.status == "ok"
    assert r.findings["A"]["coefficients"] == ["(1 + 1*w)/2", "0", "0"]
    cuts, src = toy_ctx.cuts()
    assert src == "lift-cuts cache" and list(cuts) == ["A"]


def test_lift_second_cut(toy_ctx, toy_scheme):
    res = stages.lift_cut(toy_ctx, (0, 1, 10))
    assert res["verified"]
    assert res["coefficients"][0] == QuadElt(Fraction(-149, 10), Fraction(197, 70))
    L = res["cut"]
    assert toy_ctx.emb.at(1).poly(L).eval_mod(list(toy_ctx.pool.on(L, toy_ctx.emb)[0]), 11) == 0


def test_curve_quadrics_on_toy(toy_ctx):
    r = stages.cmd_curve_quadrics(toy_ctx, label="A", expect=50)
    assert r.status == "ok", r.checks
    assert r.findings["quadrics_dim"] == 50


def test_translate_rows_match_direct_evaluation(toy_ctx, toy):
    basis = monomial_basis(2, 10)
    L = toy.designed_cut()
    smooth = set(toy_ctx.smooth_points())
    sm = cut_curve_sampler(toy_ctx, L, [x for x in toy_ctx.pool.on(L, toy_ctx.emb) if x in smooth])
    pts = sm.sample(4)
    q = toy_ctx.emb.q
    zpow = toy_ctx.zeta_powers()
    R = zpow[0].ring
    base = rows(pts, basis, q)
    for j in (1, 3):
        T = translate_rows(base, basis, j, zpow, q)
        g = G7**j
        for i, x in enumerate(pts):
            y = g.apply_point([R(v) for v in x], toy_ctx.zeta)
            for c, m in enumerate(basis):
                val = R.one
                for k, a in enumerate(m):
                    for _ in range(a):
                        val = val * y[k]
                assert [int(T[t, i, c]) for t in range(R.k)] == [int(v) for v in val.c]


def test_rationalize_roundtrip_in_context(toy_ctx):
    cols = quadric_basis()[:3]
    f = [QuadElt(1), W / 3, QuadElt(5, -2)]
    v = [toy_ctx.emb(x) for x in f]
    (poly,) = toy_ctx.rationalize([v], cols)
    assert [poly.coeff(m) for m in cols] == f


def test_verify_fixtures_blocked_without_surface(tmp_path):
    import shutil
    shutil.copy(DATA / "fixtures.txt", tmp_path / "fixtures.txt")
    ctx = Context(RunConfig(data_dir=str(tmp_path), cache_dir=str(tmp_path / "c")))
    r = stages.run_stage("verify-fixtures", ctx)
    assert r.status == "blocked"
    assert all(v["ok"] for k, v in r.checks.items() if k != "surface_checks")
    assert r.checks["cuts_reduce_to_triples"]["ok"]


# -- command line


def test_parser_accepts_flags_on_both_sides():
    a = build_parser().parse_args(["--prime", "23", "curve-quadrics", "--class", "D5",
                                   "--precision", "15"])
    assert (a.prime, a.precision, a.label, a.stage) == (23, 15, "D5", "curve-quadrics")


def test_parser_rejects_unknown_class():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["four-h-torsion", "--class", "D3"])


def test_cli_reports_missing_dataset(tmp_path, capsys):
    rc = main(["pool", "--data-dir", str(tmp_path), "--cache-dir", str(tmp_path / "c")])
    assert rc == 2
    assert "DatasetMissing" in capsys.readouterr().err


def test_mod_values_shape(toy_ctx, toy):
    V = stages._mod_values(toy_ctx, [toy.designed_cut()], toy_ctx.pool.points[:5], 1)
    assert np.asarray(V).shape == (5, 1)
